#pragma once

#include <stdexcept>

#include "climbsim/math.hpp"
#include "climbsim/model.hpp"
#include "climbsim/rng.hpp"

namespace climbsim {

constexpr double kGaitPeriod = 1.2;  // s
constexpr int kObsDim = 85;
constexpr int kEstimatorInputDim = 74;   // observation minus estimator slice
constexpr int kEstimatorOutputDim = 11;  // base vel (3) + heights (4) + contacts (4)

// Observation layout (fixed order, also the documented wire order):
//   [0,12)   joint positions
//   [12,24)  joint velocities
//   [24,48)  previous joint position targets, last two control steps
//   [48,51)  base orientation as projected gravity in base frame
//   [51,54)  base angular velocity (body frame)
//   [54,66)  foot positions relative to base
//   [66,69)  estimated base linear velocity
//   [69,73)  estimated foot heights
//   [73,77)  estimated contact probabilities
//   [77,85)  gait clock encoding
constexpr int kEstimatorSliceBegin = 66;
constexpr int kEstimatorSliceEnd = 77;

/// Gait phase of leg i at time t (legs ordered RR, FR, RL, FL).
inline double gait_phase(double t, int leg, double period = kGaitPeriod) {
  return wrap_two_pi(2.0 * kPi / period * t + 0.5 * kPi * (leg + 1));
}

/// 8-dimensional clock encoding [sin phi_i, cos phi_i] for the four legs.
inline Eigen::Matrix<double, 8, 1> clock_encode(double t, double period = kGaitPeriod) {
  Eigen::Matrix<double, 8, 1> enc;
  for (int i = 0; i < kNumLegs; ++i) {
    const double phi = gait_phase(t, i, period);
    enc[2 * i] = std::sin(phi);
    enc[2 * i + 1] = std::cos(phi);
  }
  return enc;
}

/// First-order low-pass: (1 - alpha) * old + alpha * new.
inline VecX low_pass(const VecX& old_v, const VecX& new_v, double alpha = 0.35) {
  if (old_v.size() != new_v.size())
    throw std::invalid_argument("low_pass: length mismatch");
  return (1.0 - alpha) * old_v + alpha * new_v;
}

struct NoiseModel {
  double orientation = 0.05;       // rad, plus a per-episode bias of same bound
  double orientation_bias = 0.05;  // rad
  double joint_pos = 0.1;          // rad
  double ang_vel = 0.1;            // rad/s
  double joint_vel = 0.5;          // rad/s
  double joint_pos_hist = 0.1;     // rad
  double joint_vel_hist = 0.5;     // rad/s (unused: history holds targets)
  double foot_pos = 0.015;         // m

  static NoiseModel zero() {
    NoiseModel n;
    n.orientation = n.orientation_bias = n.joint_pos = n.ang_vel = 0;
    n.joint_vel = n.joint_pos_hist = n.joint_vel_hist = n.foot_pos = 0;
    return n;
  }
};

struct EstimatorOutput {
  Vec3 base_lin_vel{0, 0, 0};
  Eigen::Vector4d foot_heights = Eigen::Vector4d::Zero();
  Eigen::Vector4d contact_prob = Eigen::Vector4d::Zero();
};

/// Builds the policy observation: noise on the raw proprioceptive channels,
/// then the low-pass filter, then the estimator outputs and the clock.
/// The clock bypasses noise and filtering (it is an exact function of
/// time), and the estimator slice is inserted as produced: the estimator
/// already consumes the filtered proprioception, so its outputs are not
/// re-filtered.
class ObservationAssembler {
 public:
  explicit ObservationAssembler(NoiseModel noise = NoiseModel{},
                                double alpha = 0.35, double period = kGaitPeriod)
      : noise_(noise), alpha_(alpha), period_(period) {}

  void reset(Rng& rng) {
    for (int i = 0; i < 3; ++i)
      orientation_bias_[i] = rng.uniform(-noise_.orientation_bias, noise_.orientation_bias);
    first_ = true;
  }

  /// Noise + filter over the 66 proprioceptive channels; returns the
  /// estimator input (filtered proprioception + clock).
  VecX advance(const RobotState& state, const VecX& targets_prev,
               const VecX& targets_prev2, double t, Rng& rng,
               const Vec3& gravity_dir = Vec3(0, 0, -1)) {
    VecX raw(kEstimatorSliceBegin);
    auto u = [&](double b) { return b > 0 ? rng.uniform(-b, b) : 0.0; };
    for (int j = 0; j < kNumJoints; ++j) raw[j] = state.q[j] + u(noise_.joint_pos);
    for (int j = 0; j < kNumJoints; ++j) raw[12 + j] = state.qd[j] + u(noise_.joint_vel);
    for (int j = 0; j < kNumJoints; ++j) {
      raw[24 + j] = targets_prev[j] + u(noise_.joint_pos_hist);
      raw[36 + j] = targets_prev2[j] + u(noise_.joint_pos_hist);
    }
    const Vec3 grav_proj =
        state.base_orientation.toRotationMatrix().transpose() * gravity_dir;
    for (int k = 0; k < 3; ++k)
      raw[48 + k] = grav_proj[k] + orientation_bias_[k] + u(noise_.orientation);
    for (int k = 0; k < 3; ++k) raw[51 + k] = state.base_ang_vel[k] + u(noise_.ang_vel);
    for (int i = 0; i < kNumLegs; ++i)
      for (int k = 0; k < 3; ++k)
        raw[54 + 3 * i + k] = state.foot_pos_base[i][k] + u(noise_.foot_pos);

    if (first_) {
      filtered_ = raw;
      first_ = false;
    } else {
      filtered_ = low_pass(filtered_, raw, alpha_);
    }
    clock_ = clock_encode(t, period_);

    VecX est_in(kEstimatorInputDim);
    est_in.head(kEstimatorSliceBegin) = filtered_;
    est_in.tail(8) = clock_;
    return est_in;
  }

  /// Full observation from the last advance() plus the estimator outputs.
  VecX compose(const EstimatorOutput& est) const {
    VecX obs(kObsDim);
    obs.head(kEstimatorSliceBegin) = filtered_;
    for (int k = 0; k < 3; ++k) obs[66 + k] = est.base_lin_vel[k];
    for (int i = 0; i < kNumLegs; ++i) obs[69 + i] = est.foot_heights[i];
    for (int i = 0; i < kNumLegs; ++i) obs[73 + i] = est.contact_prob[i];
    obs.tail(8) = clock_;
    return obs;
  }

  VecX assemble(const RobotState& state, const VecX& targets_prev,
                const VecX& targets_prev2, const EstimatorOutput& est, double t,
                Rng& rng, const Vec3& gravity_dir = Vec3(0, 0, -1)) {
    advance(state, targets_prev, targets_prev2, t, rng, gravity_dir);
    return compose(est);
  }

  /// Estimator input slice of an already-assembled observation.
  static VecX estimator_input(const VecX& obs) {
    VecX in(kEstimatorInputDim);
    in.head(kEstimatorSliceBegin) = obs.head(kEstimatorSliceBegin);
    in.tail(kObsDim - kEstimatorSliceEnd) = obs.tail(kObsDim - kEstimatorSliceEnd);
    return in;
  }

 private:
  NoiseModel noise_;
  double alpha_;
  double period_;
  Vec3 orientation_bias_{0, 0, 0};
  VecX filtered_;
  Eigen::Matrix<double, 8, 1> clock_;
  bool first_ = true;
};

}  // namespace climbsim
