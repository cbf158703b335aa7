#include <doctest.h>

#include "helpers.hpp"
#include "manip/math.hpp"

using namespace manip;

TEST_CASE("pose compose and inverse") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Pose pose;
    pose.rotation = Quat(Eigen::AngleAxisd(rng.uniform(-3, 3),
                                           testutil::random_unit_vector(rng, 3)));
    pose.position = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    CHECK((pose.apply_inverse(pose.apply(p)) - p).norm() < 1e-12);
    Pose round = pose.compose(pose.inverse());
    CHECK((round.apply(p) - p).norm() < 1e-12);
  }
}

TEST_CASE("euler conversion roundtrip") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    Vec3 euler(rng.uniform(0, 360), rng.uniform(0, 360), rng.uniform(0, 360));
    Quat q = euler_deg_to_quat(euler);
    Vec3 back = quat_to_euler_deg(q);
    Quat q2 = euler_deg_to_quat(back);
    // Euler angles are not unique, the rotation is.
    CHECK(std::abs(std::abs(q.dot(q2)) - 1.0) < 1e-9);
  }
  CHECK(wrap_degrees(-10.0) == doctest::Approx(350.0));
  CHECK(wrap_degrees(720.0) == doctest::Approx(0.0));
  CHECK(circular_distance_deg(357.6, 0.0) == doctest::Approx(2.4));
  CHECK(circular_distance_deg(357.6, 355.0) == doctest::Approx(2.6));
}

TEST_CASE("obb containment and distance") {
  Obb box{Vec3(0, 0, 0), Vec3(0.05, 0.1, 0.15), Mat3::Identity()};
  CHECK(box.contains(Vec3(0, 0, 0)));
  CHECK(box.contains(Vec3(0.05, 0.1, 0.15)));  // corner, closed bound
  CHECK(!box.contains(Vec3(0.06, 0, 0)));
  CHECK(box.distance(Vec3(0, 0, 0)) == 0.0);
  CHECK(box.distance(Vec3(0.15, 0, 0)) == doctest::Approx(0.1));

  Obb other{Vec3(0.2, 0, 0), Vec3(0.05, 0.05, 0.05), Mat3::Identity()};
  CHECK(!obb_overlap(box, other));
  CHECK(obb_distance(box, other) == doctest::Approx(0.1).epsilon(1e-6));
  Obb touching{Vec3(0.1, 0, 0), Vec3(0.05, 0.05, 0.05), Mat3::Identity()};
  CHECK(obb_overlap(box, touching));
  CHECK(obb_distance(box, touching) == 0.0);
}

TEST_CASE("obb distance vs point-sample oracle on rotated boxes") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    Obb a{Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)),
          Vec3(rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1)),
          Quat(Eigen::AngleAxisd(rng.uniform(0, 3), testutil::random_unit_vector(rng, 3)))
              .toRotationMatrix()};
    Obb b{Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)),
          Vec3(rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1)),
          Quat(Eigen::AngleAxisd(rng.uniform(0, 3), testutil::random_unit_vector(rng, 3)))
              .toRotationMatrix()};
    double estimated = obb_distance(a, b);
    // Dense surface-sample oracle (upper bound on the true distance).
    double sampled = 1e300;
    for (int i = 0; i < 2000; ++i) {
      Vec3 sa(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      Vec3 sb(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      int ka = rng.uniform_int(0, 2);
      int kb = rng.uniform_int(0, 2);
      sa[ka] = sa[ka] > 0 ? 1.0 : -1.0;
      sb[kb] = sb[kb] > 0 ? 1.0 : -1.0;
      Vec3 pa = a.center + a.rotation * sa.cwiseProduct(a.half_extents);
      Vec3 pb = b.center + b.rotation * sb.cwiseProduct(b.half_extents);
      sampled = std::min(sampled, (pa - pb).norm());
    }
    if (obb_overlap(a, b)) {
      CHECK(estimated == 0.0);
    } else {
      CHECK(estimated <= sampled + 1e-9);
      CHECK(estimated >= 0.0);
    }
  }
}

TEST_CASE("segment vs obb entry") {
  Obb box{Vec3(0, 0, 0), Vec3(0.1, 0.1, 0.1), Mat3::Identity()};
  auto hit = segment_obb_entry(Vec3(-1, 0, 0), Vec3(1, 0, 0), box);
  REQUIRE(hit.has_value());
  CHECK(*hit == doctest::Approx(0.45));  // enters at x = -0.1
  CHECK(!segment_obb_entry(Vec3(-1, 0.5, 0), Vec3(1, 0.5, 0), box).has_value());
  auto inside = segment_obb_entry(Vec3(0, 0, 0), Vec3(1, 0, 0), box);
  REQUIRE(inside.has_value());
  CHECK(*inside == 0.0);
  CHECK(!segment_obb_entry(Vec3(0.2, 0, 0), Vec3(0.15, 0, 0), box).has_value());
}
