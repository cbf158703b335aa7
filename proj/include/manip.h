/* manip.h - C API for the tabletop manipulation engine.
 *
 * All functions return manip_status; MANIP_OK is 0. On failure,
 * manip_last_error() returns a thread-local description of what went wrong.
 * Strings returned through char** are heap-allocated; release them with
 * manip_string_free(). Opaque handles are released with their _free call.
 */
#ifndef MANIP_H
#define MANIP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MANIP_API __declspec(dllexport)
#else
#define MANIP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum manip_status {
  MANIP_OK = 0,
  MANIP_ERR_INVALID_ARGUMENT,
  MANIP_ERR_IO,
  MANIP_ERR_EMPTY_INPUT,
  MANIP_ERR_SINGULAR_INTRINSICS,
  MANIP_ERR_EMPTY_CLOUD,
  MANIP_ERR_DEGENERATE_HEATMAP,
  MANIP_ERR_INDEX_OUT_OF_RANGE,
  MANIP_ERR_UNLABELED_POINT,
  MANIP_ERR_TOO_LONG,
  MANIP_ERR_EMPTY_TRAJECTORY,
  MANIP_ERR_SYNTAX,
  MANIP_ERR_UNKNOWN_PRIMITIVE,
  MANIP_ERR_BAD_KEYWORD,
  MANIP_ERR_UNTERMINATED_STRING,
  MANIP_ERR_UNVALIDATED_PLAN,
  MANIP_ERR_NO_CANDIDATES,
  MANIP_ERR_UNKNOWN_PART,
  MANIP_ERR_EMPTY_RESULT,
  MANIP_ERR_PLACEMENT_FAILURE,
  MANIP_ERR_OUT_OF_WORKSPACE,
  MANIP_ERR_UNKNOWN_NAME,
  MANIP_ERR_MISSING_OBJECT,
  MANIP_ERR_MISSING_TARGET,
  MANIP_ERR_UNREACHABLE_WAYPOINT,
  MANIP_ERR_UNKNOWN_TASK,
  MANIP_ERR_ORACLE_FAILURE,
  MANIP_ERR_INTERNAL,
  /* Not a core error: a plan parsed but has validation violations. */
  MANIP_ERR_VALIDATION = 100,
} manip_status;

typedef struct manip_cloud manip_cloud;
typedef struct manip_plan manip_plan;

MANIP_API const char* manip_version(void);
MANIP_API const char* manip_last_error(void);
MANIP_API void manip_string_free(char* s);

/* ---- point clouds (binary little-endian PLY) ---- */

MANIP_API manip_status manip_cloud_load_ply(const char* path, manip_cloud** out);
MANIP_API manip_status manip_cloud_save_ply(const manip_cloud* cloud, const char* path);
MANIP_API size_t manip_cloud_size(const manip_cloud* cloud);
/* xyz must hold 3 * manip_cloud_size doubles. */
MANIP_API manip_status manip_cloud_positions(const manip_cloud* cloud, double* xyz);
MANIP_API void manip_cloud_free(manip_cloud* cloud);

/* ---- plan DSL ---- */

MANIP_API manip_status manip_plan_parse(const char* source, manip_plan** out);
MANIP_API manip_status manip_plan_format(const manip_plan* plan, char** text_out);
/* Report JSON: {"violations":[{"step","code","message"}]}. Status is MANIP_OK
 * even when violations exist; *violation_count tells. */
MANIP_API manip_status manip_plan_validate(const manip_plan* plan, char** report_json,
                                           int* violation_count);
MANIP_API void manip_plan_free(manip_plan* plan);

/* Parse + validate a .lp file in one call. MANIP_OK: no violations;
 * MANIP_ERR_VALIDATION: violations (report still returned); parse errors
 * return their own status with {"error":{...}} in the report. */
MANIP_API manip_status manip_validate_plan_file(const char* path, char** report_json);

/* ---- action codec ---- */

/* action_json is either inline JSON or a path to a JSON file with
 * {"position":[3], "rotation_euler_deg":[3], "open":bool}. Output:
 * {"heatmaps":[{axis,bin_positions,probs,degenerate} x3],
 *  "rotation_bins":[3], "open":bool}. */
MANIP_API manip_status manip_encode_action(const char* cloud_ply_path, const char* action_json,
                                           int half_count, double bin_size, char** result_json);

/* ---- object grounding ---- */

/* exclude_csv: comma-separated instance ids or NULL. Writes the winning
 * instance's merged cloud to out_cloud_path when non-NULL. Output JSON:
 * {"instance_id", "cloud_path", "members":[...]} */
MANIP_API manip_status manip_ground(const char* detections_json_path,
                                    const char* query_embedding_json_path,
                                    const char* exclude_csv, const char* out_cloud_path,
                                    char** result_json);

/* ---- tasks and evaluation ---- */

/* Write the bundled desk task catalog as tasks/<task_id>/<variation>.json
 * with adjacent .lp oracle plans. */
MANIP_API manip_status manip_export_tasks(const char* dir);

/* Run the evaluation protocol. suite_dir NULL uses the bundled catalog;
 * levels_csv NULL/"" selects every level; plan_path overrides every task's
 * oracle plan; controller NULL/"" or "heuristic" uses the built-in motion
 * planner, "subprocess:<command>" delegates each control request to the
 * command over stdin/stdout JSON. csv_out receives the summary CSV when
 * non-NULL. */
MANIP_API manip_status manip_run_suite(const char* suite_dir, const char* levels_csv, int seeds,
                                       int episodes, int max_steps, int jobs,
                                       const char* plan_path, const char* controller,
                                       char** report_json, char** csv_out);

/* Export oracle keyframe demonstrations for one task variation. */
MANIP_API manip_status manip_demo_gen(const char* suite_dir, const char* task_id, int variation,
                                      uint64_t seed, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* MANIP_H */
