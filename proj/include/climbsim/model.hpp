#pragma once

#include <array>
#include <deque>
#include <stdexcept>
#include <vector>

#include "climbsim/config.hpp"
#include "climbsim/math.hpp"
#include "climbsim/rng.hpp"

namespace climbsim {

constexpr int kNumLegs = 4;
constexpr int kNumJoints = 12;  // 3 per leg: hip abduction, hip pitch, knee
// Leg order follows the clock convention: RR, FR, RL, FL.

struct RobotModel {
  double body_mass = 8.0;   // kg
  double foot_mass = 0.2;   // kg per foot
  // leg segments: abduction link, thigh, calf
  double l1 = 0.08, l2 = 0.21, l3 = 0.21;
  // diagonal, body frame; large enough that contact damping at the foot
  // lever arms stays below the per-step rotational stability bound
  Vec3 base_inertia{0.15, 0.25, 0.30};
  double joint_inertia = 0.02;          // reflected inertia per joint
  // time constant of the low-pass applied to the reported joint
  // acceleration; the instantaneous tau/I of the massless-leg servo rings
  // at the actuator bandwidth and is not what an onboard estimator sees
  double qdd_filter_tau = 0.2;  // s
  double ankle_inertia = 1e-4;
  double torque_limit = 40.0;  // N*m
  // per-leg-joint limits (hip abduction, hip pitch, knee)
  Vec3 joint_min{-0.8, -1.6, -2.4};
  Vec3 joint_max{0.8, 1.6, 2.4};
  Vec3 nominal_leg{0.0, 0.7, -1.4};
  Vec3 nominal_ankle_rpy{0.0, 0.523599, 0.0};
  double foot_face_radius = 0.025;  // m, magnet face
  // hip positions in base frame, order RR, FR, RL, FL
  std::array<Vec3, kNumLegs> hip_offsets{
      Vec3(-0.15, -0.10, 0), Vec3(0.15, -0.10, 0),
      Vec3(-0.15, 0.10, 0), Vec3(0.15, 0.10, 0)};
  std::array<double, kNumLegs> leg_side{-1, -1, 1, 1};  // y sign of abduction link

  VecX nominal_joint_config() const {
    VecX q(kNumJoints);
    for (int i = 0; i < kNumLegs; ++i) q.segment<3>(3 * i) = nominal_leg;
    return q;
  }

  double clamp_joint(int j, double q) const {
    return clamp(q, joint_min[j % 3], joint_max[j % 3]);
  }

  /// Base height at which the nominal configuration puts the feet on z = 0.
  double rest_height() const {
    return l2 * std::cos(nominal_leg[1]) + l3 * std::cos(nominal_leg[1] + nominal_leg[2]);
  }

  static RobotModel from_config(const Config& c) {
    RobotModel m;
    m.body_mass = c.get_double("robot.body_mass", m.body_mass);
    m.foot_mass = c.get_double("robot.foot_mass", m.foot_mass);
    m.l1 = c.get_double("robot.l1", m.l1);
    m.l2 = c.get_double("robot.l2", m.l2);
    m.l3 = c.get_double("robot.l3", m.l3);
    m.joint_inertia = c.get_double("robot.joint_inertia", m.joint_inertia);
    m.torque_limit = c.get_double("robot.torque_limit", m.torque_limit);
    return m;
  }
};

struct SurfacePatch {
  double x_min, x_max, y_min, y_max;
  bool ferromagnetic = true;
};

struct WallEnvironment {
  Vec3 wall_point{0, 0, 0};
  Vec3 wall_normal{0, 0, 1};  // unit, points toward the robot
  Vec3 gravity{0, 0, -9.81};  // set by the curriculum
  double friction = 0.4;      // sampled per episode in [0.3, 0.5]
  double contact_stiffness = 3e4;   // N/m
  double contact_damping = 300.0;   // N*s/m
  // kept low: damping at the foot lever arm must stay well under
  // I / (h^2 * dt) or the base pitch mode flip-flops at the step rate
  double tangential_damping = 100.0;
  // a foot this close to the wall still reads as touching (sensor tolerance)
  double contact_tolerance = 0.002;
  std::vector<SurfacePatch> surface_map;  // later patches override earlier ones
  double bottom_edge_x = -2.0;  // wall edge along the down-slope direction

  /// Signed penetration of a world point into the wall (positive = inside).
  double penetration(const Vec3& p) const {
    return -(p - wall_point).dot(wall_normal);
  }

  bool ferromagnetic_at(const Vec3& p) const {
    bool ferro = true;  // bare steel unless a patch says otherwise
    for (const auto& patch : surface_map) {
      if (p.x() >= patch.x_min && p.x() <= patch.x_max &&
          p.y() >= patch.y_min && p.y() <= patch.y_max) {
        ferro = patch.ferromagnetic;
      }
    }
    return ferro;
  }
};

struct ActuationConfig {
  double base_kp = 100.0;  // N*m/rad
  double base_kd = 2.0;    // N*m*s/rad
  double kp_scale = 0.5;   // sampled in [0.4, 0.6]
  double kd_scale = 0.15;  // sampled in [0.12, 0.18]
  double ankle_kp = 0.05;
  double ankle_kd = 0.001;
  double action_delay = 0.0;  // s, in [0, 0.008]

  static ActuationConfig sample(Rng& rng) {
    ActuationConfig a;
    a.kp_scale = rng.uniform(0.4, 0.6);
    a.kd_scale = rng.uniform(0.12, 0.18);
    a.ankle_kp = 0.05 + rng.uniform(-0.01, 0.01);
    a.ankle_kd = 0.001 + rng.uniform(-0.0005, 0.0005);
    a.action_delay = rng.uniform(0.0, 0.008);
    return a;
  }
};

struct RobotState {
  Vec3 base_position{0, 0, 0};
  Quat base_orientation{1, 0, 0, 0};
  Vec3 base_lin_vel{0, 0, 0};
  Vec3 base_ang_vel{0, 0, 0};  // body frame
  VecX q = VecX::Zero(kNumJoints);
  VecX qd = VecX::Zero(kNumJoints);
  VecX qdd = VecX::Zero(kNumJoints);
  VecX tau = VecX::Zero(kNumJoints);
  std::array<Vec3, kNumLegs> ankle_rpy{};
  std::array<Vec3, kNumLegs> ankle_rpy_rate{};
  std::array<Vec3, kNumLegs> foot_pos_base{};
  std::array<Vec3, kNumLegs> foot_pos_world{};
  std::array<Vec3, kNumLegs> foot_vel_world{};
  std::array<Vec3, kNumLegs> foot_normal_world{};  // magnet face normal
  std::array<int, kNumLegs> contact_flags{};
  double sim_time = 0.0;

  RobotState() {
    // Eigen vectors do not zero-initialize; the arrays must be cleared
    for (int i = 0; i < kNumLegs; ++i) {
      ankle_rpy[i].setZero();
      ankle_rpy_rate[i].setZero();
      foot_pos_base[i].setZero();
      foot_pos_world[i].setZero();
      foot_vel_world[i].setZero();
      foot_normal_world[i].setZero();
    }
  }

  bool finite() const {
    auto ok = [](double v) { return std::isfinite(v); };
    for (int i = 0; i < 3; ++i)
      if (!ok(base_position[i]) || !ok(base_lin_vel[i]) || !ok(base_ang_vel[i]))
        return false;
    if (!ok(base_orientation.w()) || !ok(base_orientation.x())) return false;
    return q.allFinite() && qd.allFinite();
  }
};

struct NonFiniteState : std::runtime_error {
  NonFiniteState() : std::runtime_error("simulation state became non-finite") {}
};

struct FkResult {
  std::array<Vec3, kNumLegs> foot_pos_base;
  std::array<Vec3, kNumLegs> foot_pos_world;
  std::array<Vec3, kNumLegs> face_normal_world;
};

/// Point-foot forward kinematics plus the magnet-face normal per foot.
/// Joint values outside the limits are clamped, never faulted.
inline FkResult forward_kinematics(const RobotModel& m, const Vec3& base_pos,
                                   const Quat& base_quat, const VecX& q,
                                   const std::array<Vec3, kNumLegs>& ankle_rpy) {
  FkResult out;
  const Eigen::Matrix3d R = base_quat.toRotationMatrix();
  for (int i = 0; i < kNumLegs; ++i) {
    const double q0 = m.clamp_joint(0, q[3 * i + 0]);
    const double q1 = m.clamp_joint(1, q[3 * i + 1]);
    const double q2 = m.clamp_joint(2, q[3 * i + 2]);
    const Vec3 ab(0, m.leg_side[i] * m.l1, 0);
    const Vec3 thigh = rot_y(q1) * Vec3(0, 0, -m.l2);
    const Vec3 calf = rot_y(q1 + q2) * Vec3(0, 0, -m.l3);
    const Vec3 p_base = m.hip_offsets[i] + rot_x(q0) * (ab + thigh + calf);
    out.foot_pos_base[i] = p_base;
    out.foot_pos_world[i] = base_pos + R * p_base;
    const Vec3& rpy = ankle_rpy[i];
    const Eigen::Matrix3d R_ankle = rot_z(rpy[2]) * rot_y(rpy[1]) * rot_x(rpy[0]);
    out.face_normal_world[i] = R * R_ankle * Vec3(0, 0, -1);
  }
  return out;
}

/// Air gap between the magnet face and the wall: clearance of the foot
/// point plus the lever of the face tilt over the face radius.
inline double alignment_gap(const RobotModel& m, const Vec3& foot_world,
                            const Vec3& face_normal, const WallEnvironment& env) {
  const double clearance = std::max(0.0, -env.penetration(foot_world));
  const double tilt = angle_between(face_normal, -env.wall_normal);
  return clearance + m.foot_face_radius * std::sin(std::min(tilt, 0.5 * kPi));
}

/// Ankle roll/pitch that puts the magnet face flush on the wall, given the
/// base orientation (yaw left free).
inline Vec3 aligned_ankle_rpy(const Quat& base_quat, const Vec3& wall_normal) {
  const Vec3 nb = -(base_quat.toRotationMatrix().transpose() * wall_normal);
  const double r = std::asin(clamp(nb.y(), -1.0, 1.0));
  const double cr = std::cos(r);
  double p = 0.0;
  if (std::abs(cr) > 1e-9) p = std::asin(clamp(-nb.x() / cr, -1.0, 1.0));
  return Vec3(r, p, 0.0);
}

struct StepForces {
  std::array<Vec3, kNumLegs> contact;  // unilateral penalty + friction
  std::array<double, kNumLegs> normal_force;
};

/// Zero-filled per-foot vector array. Eigen vectors do not zero-initialize,
/// so `std::array<Vec3, kNumLegs>{}` must never be used for that purpose.
inline std::array<Vec3, kNumLegs> zero_foot_vectors() {
  std::array<Vec3, kNumLegs> a;
  for (auto& v : a) v.setZero();
  return a;
}

/// One semi-implicit Euler step of the reduced-order model. Legs are
/// massless and kinematic: joint PD dynamics drive q, feet follow FK, and
/// contact/adhesion forces at the feet act on the floating base. Contact is
/// a unilateral penalty (never pulls); any pulling force must arrive via
/// adhesion_forces.
inline RobotState step(const RobotState& state, const RobotModel& m,
                       const WallEnvironment& env, const ActuationConfig& act,
                       const VecX& joint_targets,
                       const std::array<Vec3, kNumLegs>& adhesion_forces,
                       double dt, StepForces* forces_out = nullptr) {
  RobotState s = state;

  // joint PD dynamics (massless legs, per-joint reflected inertia)
  const double kp = act.base_kp * act.kp_scale;
  const double kd = act.base_kd * act.kd_scale;
  for (int j = 0; j < kNumJoints; ++j) {
    double tau = kp * (joint_targets[j] - s.q[j]) - kd * s.qd[j];
    tau = clamp(tau, -m.torque_limit, m.torque_limit);
    s.tau[j] = tau;
    const double qdd_inst = tau / m.joint_inertia;
    // reported acceleration is low-passed; the raw reflected-inertia
    // value is integration-step ringing, not a measurable signal
    s.qdd[j] += dt / m.qdd_filter_tau * (qdd_inst - s.qdd[j]);
    s.qd[j] += qdd_inst * dt;
    s.q[j] += s.qd[j] * dt;
    const double qc = m.clamp_joint(j, s.q[j]);
    if (qc != s.q[j]) {
      s.q[j] = qc;
      s.qd[j] = 0.0;
    }
  }

  // ankle compliance toward nominal; contact relaxes toward wall-aligned
  const Vec3 rpy_aligned = aligned_ankle_rpy(s.base_orientation, env.wall_normal);
  for (int i = 0; i < kNumLegs; ++i) {
    Vec3& rpy = s.ankle_rpy[i];
    Vec3& rate = s.ankle_rpy_rate[i];
    const Vec3 torque =
        act.ankle_kp * (m.nominal_ankle_rpy - rpy) - act.ankle_kd * rate;
    rate += torque / m.ankle_inertia * dt;
    rpy += rate * dt;
    if (state.contact_flags[i]) {
      // kinematic alignment of the face against the wall while pressed
      const double blend = std::min(1.0, 400.0 * dt);
      rpy += blend * (Vec3(rpy_aligned[0], rpy_aligned[1], rpy[2]) - rpy);
      rate *= (1.0 - blend);
    }
  }

  // feet follow kinematics
  const FkResult fk =
      forward_kinematics(m, s.base_position, s.base_orientation, s.q, s.ankle_rpy);
  s.foot_pos_base = fk.foot_pos_base;
  s.foot_normal_world = fk.face_normal_world;

  const double total_mass = m.body_mass + kNumLegs * m.foot_mass;
  Vec3 force = env.gravity * total_mass;
  Vec3 torque_world = Vec3::Zero();

  StepForces forces{};
  for (int i = 0; i < kNumLegs; ++i) {
    const Vec3& p = state.foot_pos_world[i];  // pre-step foot position
    const Vec3& v = state.foot_vel_world[i];
    const double pen = env.penetration(p);
    Vec3 f = Vec3::Zero();
    double normal_mag = 0.0;
    if (pen > 0.0) {
      const double v_n = v.dot(env.wall_normal);  // >0 = separating
      normal_mag = std::max(
          0.0, env.contact_stiffness * pen - env.contact_damping * v_n);
      const Vec3 v_t = v - v_n * env.wall_normal;
      Vec3 f_t = -env.tangential_damping * v_t;
      const double cap = env.friction * normal_mag;
      if (f_t.norm() > cap) f_t *= cap / f_t.norm();
      f = normal_mag * env.wall_normal + f_t;
    }
    forces.contact[i] = f;
    forces.normal_force[i] = normal_mag;
    const Vec3 f_total = f + adhesion_forces[i];
    force += f_total;
    torque_world += (p - state.base_position).cross(f_total);
    s.contact_flags[i] = pen >= -env.contact_tolerance ? 1 : 0;
  }

  // floating base, semi-implicit Euler
  s.base_lin_vel += force / total_mass * dt;
  s.base_position += s.base_lin_vel * dt;

  const Eigen::Matrix3d R = s.base_orientation.toRotationMatrix();
  const Vec3 torque_body = R.transpose() * torque_world;
  const Vec3 I = m.base_inertia;
  const Vec3 w = s.base_ang_vel;
  const Vec3 Iw(I[0] * w[0], I[1] * w[1], I[2] * w[2]);
  const Vec3 wdot((torque_body[0] - (w[1] * Iw[2] - w[2] * Iw[1])) / I[0],
                  (torque_body[1] - (w[2] * Iw[0] - w[0] * Iw[2])) / I[1],
                  (torque_body[2] - (w[0] * Iw[1] - w[1] * Iw[0])) / I[2]);
  s.base_ang_vel += wdot * dt;
  s.base_orientation = integrate_quat(s.base_orientation, s.base_ang_vel, dt);

  // refresh world foot positions and velocities at the new base pose
  const FkResult fk2 =
      forward_kinematics(m, s.base_position, s.base_orientation, s.q, s.ankle_rpy);
  for (int i = 0; i < kNumLegs; ++i) {
    s.foot_pos_world[i] = fk2.foot_pos_world[i];
    s.foot_vel_world[i] = (fk2.foot_pos_world[i] - state.foot_pos_world[i]) / dt;
    // contact flag against the post-step position
    s.contact_flags[i] = env.penetration(fk2.foot_pos_world[i]) >= -env.contact_tolerance ? 1 : 0;
  }
  s.foot_normal_world = fk2.face_normal_world;
  s.sim_time += dt;

  if (!s.finite()) throw NonFiniteState{};
  if (forces_out) *forces_out = forces;
  return s;
}

/// Initial state: nominal configuration standing on the wall plane.
inline RobotState nominal_state(const RobotModel& m, const WallEnvironment& env) {
  RobotState s;
  s.q = m.nominal_joint_config();
  for (auto& rpy : s.ankle_rpy) rpy = m.nominal_ankle_rpy;
  s.base_position = env.wall_point + env.wall_normal * m.rest_height();
  const FkResult fk =
      forward_kinematics(m, s.base_position, s.base_orientation, s.q, s.ankle_rpy);
  s.foot_pos_base = fk.foot_pos_base;
  s.foot_pos_world = fk.foot_pos_world;
  s.foot_normal_world = fk.face_normal_world;
  for (int i = 0; i < kNumLegs; ++i)
    s.contact_flags[i] = env.penetration(fk.foot_pos_world[i]) >= -env.contact_tolerance ? 1 : 0;
  return s;
}

/// Bounded buffer replaying joint targets with a fixed latency. Queries
/// interpolate linearly between buffered entries.
class ActionDelayBuffer {
 public:
  void reset(const VecX& initial, double t0) {
    buf_.clear();
    buf_.push_back({t0, initial});
  }

  void push(double t, const VecX& targets) {
    buf_.push_back({t, targets});
    while (buf_.size() > 2 && buf_[1].first <= t - kMaxDelay) buf_.pop_front();
  }

  VecX query(double t, double delay) const {
    const double tq = t - delay;
    if (buf_.empty()) return VecX();
    if (tq <= buf_.front().first) return buf_.front().second;
    for (size_t k = buf_.size() - 1; k > 0; --k) {
      if (buf_[k - 1].first <= tq) {
        const auto& [t0, v0] = buf_[k - 1];
        const auto& [t1, v1] = buf_[k];
        if (tq >= t1) return v1;
        const double a = (tq - t0) / (t1 - t0);
        return (1.0 - a) * v0 + a * v1;
      }
    }
    return buf_.back().second;
  }

 private:
  static constexpr double kMaxDelay = 0.016;
  std::deque<std::pair<double, VecX>> buf_;
};

inline VecX apply_action_delay(const ActionDelayBuffer& buffer, double now,
                               double delay) {
  return buffer.query(now, delay);
}

}  // namespace climbsim
