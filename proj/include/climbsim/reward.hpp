#pragma once

#include <array>
#include <cmath>

#include "climbsim/curriculum.hpp"
#include "climbsim/math.hpp"
#include "climbsim/model.hpp"

namespace climbsim {

/// Swing window of the gait clock.
inline bool in_swing_window(double phi) { return phi > 0.0 && phi < 0.5 * kPi; }

/// Gait indicator: +1 when the foot does what the clock asks (swing in the
/// swing window, contact outside it), -1 otherwise.
inline int gait_indicator(double phi, int contact) {
  const bool swing = in_swing_window(phi);
  if (swing) return contact ? -1 : 1;
  return contact ? 1 : -1;
}

inline double desired_foot_height(double phi) {
  return in_swing_window(phi) ? 0.08 : 0.0;
}

struct RewardInputs {
  Vec3 v_desired{0, 0, 0};  // (vx, vy, wz) command
  Eigen::Vector2d v_xy{0, 0};
  double omega_z = 0;
  double v_z = 0;
  Eigen::Vector2d omega_xy{0, 0};
  std::array<double, kNumLegs> phi{};       // gait phases, [0, 2pi)
  std::array<double, kNumLegs> p_z{};       // foot heights above the wall
  std::array<Eigen::Vector2d, kNumLegs> foot_v_xy{};
  std::array<double, kNumLegs> foot_v_z{};
  std::array<int, kNumLegs> contact{};
  VecX tau = VecX::Zero(kNumJoints);
  VecX q = VecX::Zero(kNumJoints);
  VecX qd = VecX::Zero(kNumJoints);
  VecX qdd = VecX::Zero(kNumJoints);
  VecX q_nominal = VecX::Zero(kNumJoints);
  VecX action = VecX::Zero(16);
  VecX action_prev = VecX::Zero(16);
  VecX action_prev2 = VecX::Zero(16);
  std::array<double, kNumLegs> a_magnet{};
  Vec3 body_z_world{0, 0, 1};   // base z-axis in world frame
  Vec3 up_axis_world{0, 0, 1};  // gravity-rotated world z-axis

  RewardInputs() {
    for (auto& v : foot_v_xy) v.setZero();  // Eigen does not zero-initialize
  }
};

struct RewardBreakdown {
  // positive group
  double lv = 0, av = 0, sc = 0, g = 0, fh = 0;
  // penalty group
  double fs = 0, fc = 0, o = 0, tau = 0, jp = 0, js = 0, ja = 0;
  double as1 = 0, as2 = 0, bm = 0, am = 0;
  double total = 0;

  double positive_sum() const { return lv + av + g + fh + sc; }
  double penalty_sum() const {
    return fs + fc + o + tau + jp + js + ja + as1 + as2 + bm + am;
  }
};

inline RewardBreakdown compute_rewards(const RewardInputs& in,
                                       const CurriculumState& sched) {
  RewardBreakdown r;
  const double vel_scale = curriculum::velocity_scale_of(sched.kappa);
  const double pen_scale = curriculum::penalty_scale_of(sched.kappa);
  const bool standing = in.v_desired.x() == 0.0 && in.v_desired.y() == 0.0 &&
                        in.v_desired.z() == 0.0;

  const Eigen::Vector2d v_err(in.v_desired.x() - in.v_xy.x(),
                              in.v_desired.y() - in.v_xy.y());
  r.lv = vel_scale * 3.0 * std::exp(-5.0 * v_err.squaredNorm());
  const double w_err = in.v_desired.z() - in.omega_z;
  r.av = vel_scale * 3.0 * std::exp(-5.0 * w_err * w_err);

  double sc_sum = 0, g_sum = 0, fh_sum = 0, fs_sum = 0, fc_sum = 0, am_sum = 0;
  for (int i = 0; i < kNumLegs; ++i) {
    sc_sum += (standing && in.contact[i]) ? 1.0 : -1.0;
    g_sum += gait_indicator(in.phi[i], in.contact[i]);
    const double dh = desired_foot_height(in.phi[i]) - in.p_z[i];
    if (in_swing_window(in.phi[i])) fh_sum += dh * dh;
    fs_sum += in.contact[i] * in.foot_v_xy[i].squaredNorm();
    fc_sum += (1 - in.contact[i]) * dh * dh * std::sqrt(std::abs(in.foot_v_z[i]));
    const double am_err = in.contact[i] - in.a_magnet[i];
    am_sum += am_err * am_err;
  }
  r.sc = 0.5 * sc_sum;
  r.g = 0.5 * g_sum;
  r.fh = 0.5 * std::exp(-fh_sum);
  r.fs = pen_scale * 0.5 * fs_sum;
  r.fc = 140.0 * fc_sum;
  r.o = 3.0 * angle_between(in.body_z_world, in.up_axis_world);
  r.tau = pen_scale * 0.003 * in.tau.squaredNorm();
  r.jp = (standing ? 3.0 : 0.75) * (in.q - in.q_nominal).squaredNorm();
  r.js = 0.003 * in.qd.squaredNorm();
  r.ja = 0.003 * in.qdd.squaredNorm();
  if (sched.smoothness_active) {
    r.as1 = 2.5 * (in.action - in.action_prev).squaredNorm();
    r.as2 =
        1.2 * (in.action - 2.0 * in.action_prev + in.action_prev2).squaredNorm();
  }
  r.bm = 3.0 * std::exp(-0.5 * in.omega_xy.squaredNorm() + 0.2 * std::abs(in.v_z));
  r.am = 0.15 * am_sum;

  r.total = r.positive_sum() * std::exp(-0.2 * r.penalty_sum());
  return r;
}

}  // namespace climbsim
