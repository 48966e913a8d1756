#include <doctest.h>

#include "climbsim/curriculum.hpp"
#include "climbsim/rng.hpp"

using namespace climbsim;
using namespace climbsim::curriculum;

TEST_CASE("theta schedule anchors") {
  CHECK(theta_of(0) == 0.0);
  CHECK(theta_of(1200) == 0.0);
  CHECK(theta_of(11200) == doctest::Approx(0.25 * kPi).epsilon(1e-14));
  CHECK(theta_of(21200) == doctest::Approx(0.5 * kPi).epsilon(1e-14));
  CHECK(theta_of(35000) == 0.5 * kPi);
  CHECK(theta_of(1e6) == 0.5 * kPi);
  // exact linear segment
  for (double t : {2000.0, 5000.0, 15000.0}) {
    const double expected = 0.5 * kPi * (t - 1200.0) / 20000.0;
    CHECK(theta_of(t) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("prob_attach schedule anchors") {
  CHECK(prob_attach_of(0) == 1.0);
  CHECK(prob_attach_of(1200) == 1.0);
  CHECK(prob_attach_of(21200) == 1.0);
  CHECK(prob_attach_of(28100) == doctest::Approx(0.925).epsilon(1e-14));
  CHECK(prob_attach_of(35000) == doctest::Approx(0.85).epsilon(1e-14));
  CHECK(prob_attach_of(1e6) == doctest::Approx(0.85).epsilon(1e-14));
}

TEST_CASE("kappa schedule") {
  CHECK(kappa_of(0) == 1.0);
  CHECK(kappa_of(1200) == 1.0);
  for (double t : {1201.0, 11200.0, 21200.0, 28100.0, 35000.0, 1e6}) {
    const double expected = std::pow(0.99975, t - 1200.0);
    CHECK(kappa_of(t) == doctest::Approx(expected).epsilon(1e-14));
  }
  CHECK(velocity_scale_of(1.0) == doctest::Approx(1.0));
  CHECK(velocity_scale_of(0.0) == doctest::Approx(1.5));
  CHECK(penalty_scale_of(1.0) == doctest::Approx(1.0));
  CHECK(penalty_scale_of(0.0) == doctest::Approx(0.5));
}

TEST_CASE("gravity rotation preserves magnitude and hits the wall axis") {
  Rng rng(7);
  for (int k = 0; k < 1000; ++k) {
    const double t = rng.uniform(0.0, 40000.0);
    CHECK(gravity_of(t).norm() == doctest::Approx(9.81).epsilon(1e-13));
  }
  const Vec3 g_wall = gravity_of(21200.0);
  CHECK(g_wall.x() == doctest::Approx(-9.81).epsilon(1e-13));
  CHECK(std::abs(g_wall.y()) < 1e-12);
  CHECK(std::abs(g_wall.z()) < 1e-9);
  CHECK(gravity_of(0.0).z() == doctest::Approx(-9.81));
}

TEST_CASE("phase boundaries and smoothness gate") {
  CHECK(phase_of(0) == 1);
  CHECK(phase_of(1200) == 1);
  CHECK(phase_of(1201) == 2);
  CHECK(phase_of(21200) == 2);
  CHECK(phase_of(21201) == 3);
  CHECK_FALSE(smoothness_active(999));
  CHECK(smoothness_active(1000));
  CHECK(smoothness_active(1e6));
}

TEST_CASE("desk-scale compression preserves the schedule shape") {
  const double s = 0.01;
  CHECK(theta_of(1200 * s, s) == 0.0);
  CHECK(theta_of(21200 * s, s) == doctest::Approx(0.5 * kPi).epsilon(1e-13));
  CHECK(prob_attach_of(35000 * s, s) == doctest::Approx(0.85).epsilon(1e-12));
  // kappa matches the uncompressed value at corresponding points
  for (double t : {2000.0, 11200.0, 30000.0}) {
    CHECK(kappa_of(t * s, s) == doctest::Approx(kappa_of(t)).epsilon(1e-12));
  }
  // monotone ramps
  double prev = -1;
  for (double t = 0; t < 400; t += 1) {
    const double th = theta_of(t, s);
    CHECK(th >= prev);
    prev = th;
  }
}

TEST_CASE("CurriculumState snapshot") {
  const CurriculumState s1 = CurriculumState::at(500.0, 1.0, false);
  CHECK(s1.phase == 1);
  CHECK_FALSE(s1.adhesion_enabled);
  CHECK_FALSE(s1.smoothness_active);
  const CurriculumState s1b = CurriculumState::at(500.0, 1.0, true);
  CHECK(s1b.adhesion_enabled);
  const CurriculumState s2 = CurriculumState::at(5000.0, 1.0, false);
  CHECK(s2.phase == 2);
  CHECK(s2.adhesion_enabled);  // always on after phase 1
  CHECK(s2.theta == doctest::Approx(theta_of(5000.0)));
  CHECK(s2.gravity.norm() == doctest::Approx(9.81).epsilon(1e-13));
}
