#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "climbsim/reward.hpp"
#include "climbsim/rng.hpp"

#include "reward_oracle.h"

using namespace climbsim;

TEST_CASE("gait indicator") {
  CHECK(gait_indicator(kPi / 4, 0) == 1);
  CHECK(gait_indicator(kPi / 4, 1) == -1);
  CHECK(gait_indicator(kPi, 1) == 1);
  CHECK(gait_indicator(kPi, 0) == -1);
  CHECK(gait_indicator(0.0, 1) == 1);  // phi = 0 is outside the open window
}

TEST_CASE("velocity reward at zero error with kappa = 1") {
  RewardInputs in;
  in.v_desired = Vec3(0.3, 0.1, 0.2);
  in.v_xy = Eigen::Vector2d(0.3, 0.1);
  in.omega_z = 0.2;
  CurriculumState sched;  // kappa = 1
  const RewardBreakdown r = compute_rewards(in, sched);
  CHECK(r.lv == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.av == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("gait reward with all feet swinging correctly") {
  RewardInputs in;
  in.v_desired = Vec3(0.3, 0, 0);
  for (int i = 0; i < 4; ++i) {
    in.phi[i] = kPi / 4;
    in.contact[i] = 0;
  }
  CurriculumState sched;
  const RewardBreakdown r = compute_rewards(in, sched);
  CHECK(r.g == doctest::Approx(2.0));
}

TEST_CASE("trivial zeros") {
  RewardInputs in;
  in.v_desired = Vec3::Zero();  // standing
  for (int i = 0; i < 4; ++i) {
    in.phi[i] = kPi;  // stance window
    in.contact[i] = 1;
    in.a_magnet[i] = 1.0;
  }
  CurriculumState sched;
  const RewardBreakdown r = compute_rewards(in, sched);
  CHECK(r.am == 0.0);
  CHECK(r.jp == 0.0);  // q == q_nominal == 0
  CHECK(r.sc == doctest::Approx(2.0));
}

TEST_CASE("smoothness terms gated until iteration 1000") {
  RewardInputs in;
  in.action = VecX::Constant(16, 1.0);
  in.action_prev = VecX::Zero(16);
  in.action_prev2 = VecX::Constant(16, 1.0);
  CurriculumState early = CurriculumState::at(999.0);
  CurriculumState late = CurriculumState::at(1000.0);
  CHECK(compute_rewards(in, early).as1 == 0.0);
  CHECK(compute_rewards(in, early).as2 == 0.0);
  CHECK(compute_rewards(in, late).as1 == doctest::Approx(2.5 * 16.0));
  // a - 2*a_prev + a_prev2 = 2 per channel
  CHECK(compute_rewards(in, late).as2 == doctest::Approx(1.2 * 4.0 * 16.0));
}

using oracle::OracleTerms;
using oracle::reward_oracle;
using oracle::random_inputs;

TEST_CASE("pipeline matches the independent oracle on randomized inputs") {
  Rng rng(42);
  const double ts[] = {0.0, 1000.0, 1200.0, 21200.0, 35000.0};
  for (int k = 0; k < 1000; ++k) {
    const RewardInputs in = random_inputs(rng);
    for (double t : ts) {
      const CurriculumState sched = CurriculumState::at(t);
      const RewardBreakdown r = compute_rewards(in, sched);
      const OracleTerms o = reward_oracle(in, sched.kappa, sched.smoothness_active);
      CAPTURE(k);
      CAPTURE(t);
      CHECK(r.lv == doctest::Approx(o.lv).epsilon(1e-9));
      CHECK(r.av == doctest::Approx(o.av).epsilon(1e-9));
      CHECK(r.sc == doctest::Approx(o.sc).epsilon(1e-9));
      CHECK(r.g == doctest::Approx(o.g).epsilon(1e-9));
      CHECK(r.fh == doctest::Approx(o.fh).epsilon(1e-9));
      CHECK(r.fs == doctest::Approx(o.fs).epsilon(1e-9));
      CHECK(r.fc == doctest::Approx(o.fc).epsilon(1e-9));
      CHECK(std::abs(r.o - o.o) < 1e-7);  // atan2 vs acos formulations
      CHECK(r.tau == doctest::Approx(o.tau).epsilon(1e-9));
      CHECK(r.jp == doctest::Approx(o.jp).epsilon(1e-9));
      CHECK(r.js == doctest::Approx(o.js).epsilon(1e-9));
      CHECK(r.ja == doctest::Approx(o.ja).epsilon(1e-9));
      CHECK(r.as1 == doctest::Approx(o.as1).epsilon(1e-9));
      CHECK(r.as2 == doctest::Approx(o.as2).epsilon(1e-9));
      CHECK(r.bm == doctest::Approx(o.bm).epsilon(1e-9));
      CHECK(r.am == doctest::Approx(o.am).epsilon(1e-9));
      CHECK(std::abs(r.total - o.total) < 1e-7 * (1 + std::abs(o.total)));
      // breakdown invariant
      CHECK(r.total ==
            doctest::Approx(r.positive_sum() * std::exp(-0.2 * r.penalty_sum()))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("leg permutation symmetry") {
  Rng rng(5);
  const RewardInputs in = random_inputs(rng);
  RewardInputs perm = in;
  const int p[4] = {2, 3, 0, 1};
  for (int i = 0; i < 4; ++i) {
    perm.phi[i] = in.phi[p[i]];
    perm.p_z[i] = in.p_z[p[i]];
    perm.foot_v_xy[i] = in.foot_v_xy[p[i]];
    perm.foot_v_z[i] = in.foot_v_z[p[i]];
    perm.contact[i] = in.contact[p[i]];
    perm.a_magnet[i] = in.a_magnet[p[i]];
  }
  CurriculumState sched = CurriculumState::at(21200.0);
  const RewardBreakdown a = compute_rewards(in, sched);
  const RewardBreakdown b = compute_rewards(perm, sched);
  CHECK(a.g == doctest::Approx(b.g).epsilon(1e-12));
  CHECK(a.fh == doctest::Approx(b.fh).epsilon(1e-12));
  CHECK(a.fs == doctest::Approx(b.fs).epsilon(1e-12));
  CHECK(a.fc == doctest::Approx(b.fc).epsilon(1e-12));
  CHECK(a.am == doctest::Approx(b.am).epsilon(1e-12));
  CHECK(a.total == doctest::Approx(b.total).epsilon(1e-12));
}

TEST_CASE("total stays within the positive-group bound") {
  Rng rng(9);
  CurriculumState sched = CurriculumState::at(30000.0);
  for (int k = 0; k < 200; ++k) {
    const RewardBreakdown r = compute_rewards(random_inputs(rng), sched);
    // penalties are non-negative, so the exponential factor lies in (0, 1]
    CHECK(r.penalty_sum() >= 0.0);
    CHECK(std::abs(r.total) <= std::abs(r.positive_sum()) + 1e-15);
  }
}
