#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace manip {

// One code per failure mode; mirrored one-to-one by the C API status enum.
enum class ErrorCode : int {
  Ok = 0,
  InvalidArgument,
  Io,
  EmptyInput,
  SingularIntrinsics,
  EmptyCloud,
  DegenerateHeatmap,
  IndexOutOfRange,
  UnlabeledPoint,
  TooLong,
  EmptyTrajectory,
  Syntax,
  UnknownPrimitive,
  BadKeyword,
  UnterminatedString,
  UnvalidatedPlan,
  NoCandidates,
  UnknownPart,
  EmptyResult,
  PlacementFailure,
  OutOfWorkspace,
  UnknownName,
  MissingObject,
  MissingTarget,
  UnreachableWaypoint,
  UnknownTask,
  OracleFailure,
  Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

// FNV-1a. Used wherever the file formats or the evaluation protocol need a
// stable hash (episode seed derivation, fixture embeddings); must never change.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Deterministic RNG. std::mt19937_64 is bit-stable across platforms, but the
// standard distributions are not, so uniform/gaussian are derived by hand.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi_inclusive) {
    return lo + int(next_u64() % std::uint64_t(hi_inclusive - lo + 1));
  }

  // Box-Muller; one value per call so the stream stays simple to reason about.
  double gaussian();

private:
  std::uint64_t state_;
};

}  // namespace manip
