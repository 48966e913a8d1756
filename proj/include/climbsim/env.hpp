#pragma once

#include <array>
#include <string>

#include "climbsim/adhesion.hpp"
#include "climbsim/config.hpp"
#include "climbsim/curriculum.hpp"
#include "climbsim/log.hpp"
#include "climbsim/model.hpp"
#include "climbsim/observation.hpp"
#include "climbsim/reward.hpp"

namespace climbsim {

enum class AblationVariant { Full, NoCurriculum, NoProbabilistic, NoModeling };

inline AblationVariant ablation_from_name(const std::string& s) {
  if (s == "full") return AblationVariant::Full;
  if (s == "no-curriculum") return AblationVariant::NoCurriculum;
  if (s == "no-probabilistic") return AblationVariant::NoProbabilistic;
  if (s == "no-modeling") return AblationVariant::NoModeling;
  throw std::runtime_error("unknown ablation variant: " + s);
}

inline const char* ablation_name(AblationVariant v) {
  switch (v) {
    case AblationVariant::Full: return "full";
    case AblationVariant::NoCurriculum: return "no-curriculum";
    case AblationVariant::NoProbabilistic: return "no-probabilistic";
    case AblationVariant::NoModeling: return "no-modeling";
  }
  return "?";
}

struct EnvConfig {
  RobotModel model;
  AdhesionParams adhesion;
  NoiseModel noise;
  double sim_dt = 0.002;
  int decimation = 5;  // control at 100 Hz
  double episode_length = 10.0;
  double freeze_timeout = 5.0;     // all-feet-attached early termination
  double fall_separation = 0.6;    // m of wall-normal base distance
  double fall_below_edge = 0.5;    // m past the bottom edge
  Vec3 cmd_min{-0.5, -0.3, -0.5};
  Vec3 cmd_max{0.5, 0.3, 0.5};
  double stand_prob = 0.1;         // chance of an exact-zero command
  double action_scale = 0.3;       // rad of joint target per action unit
  double adhesion_stiffness = 3e5;  // tether spring when attached
  double adhesion_damping = 500.0;
  double adhesion_preload = 20.0;  // engaged-magnet attraction at zero gap
  double adhesion_shear_stiffness = 3e4;  // anchor spring along the wall
  double adhesion_tangential_damping = 100.0;  // see tangential_damping note
  AblationVariant ablation = AblationVariant::Full;
  bool perfect_alignment = false;   // eval protocol switch
  bool use_true_contact_conf = false;
  bool randomize = true;
  double friction_min = 0.3, friction_max = 0.5;
  double init_joint_noise = 0.05;

  static EnvConfig from_config(const Config& c) {
    EnvConfig e;
    e.model = RobotModel::from_config(c);
    e.adhesion.max_force = c.get_double("adhesion.max_force", e.adhesion.max_force);
    e.adhesion.gap_decay = c.get_double("adhesion.gap_decay", e.adhesion.gap_decay);
    e.adhesion.mu_mag = c.get_double("adhesion.mu_mag", e.adhesion.mu_mag);
    e.adhesion.gap_tol = c.get_double("adhesion.gap_tol", e.adhesion.gap_tol);
    e.adhesion.switch_latency =
        c.get_double("adhesion.switch_latency", e.adhesion.switch_latency);
    e.sim_dt = c.get_double("env.sim_dt", e.sim_dt);
    e.decimation = c.get_int("env.decimation", e.decimation);
    e.episode_length = c.get_double("env.episode_length", e.episode_length);
    e.action_scale = c.get_double("env.action_scale", e.action_scale);
    e.stand_prob = c.get_double("env.stand_prob", e.stand_prob);
    return e;
  }
};

struct StepResult {
  double reward = 0;
  RewardBreakdown breakdown;
  bool done = false;
  TerminationCause cause = TerminationCause::None;
};

/// One simulated robot-on-wall instance: reduced-order dynamics, EPM
/// adhesion stack, observation assembly, reward evaluation, per-episode
/// domain randomization, and episode logging. Instances are independent;
/// each owns its RNG stream.
class ClimbEnv {
 public:
  explicit ClimbEnv(EnvConfig cfg = EnvConfig{}) : cfg_(cfg), obs_asm_(cfg.noise) {
    wall_.surface_map.push_back({-10, 10, -10, 10, true});
    wall_.bottom_edge_x = -6.0;
    set_schedule(CurriculumState{});
  }

  /// Freeze the curriculum snapshot for the coming episodes (called once
  /// per training iteration, or once per evaluation protocol).
  void set_schedule(const CurriculumState& s) {
    sched_ = s;
    if (cfg_.ablation == AblationVariant::NoCurriculum) {
      sched_.theta = 0.5 * kPi;
      sched_.gravity = rot_y(sched_.theta) * Vec3(0, 0, -9.81);
      sched_.adhesion_enabled = true;
    }
    if (cfg_.ablation == AblationVariant::NoProbabilistic ||
        cfg_.ablation == AblationVariant::NoModeling) {
      sched_.prob_attach = 1.0;
    }
    wall_.gravity = sched_.gravity;
  }

  const CurriculumState& schedule() const { return sched_; }
  const EnvConfig& config() const { return cfg_; }
  const RobotState& state() const { return state_; }
  const WallEnvironment& wall() const { return wall_; }
  const Vec3& command() const { return command_; }
  double time() const { return state_.sim_time; }
  const EpisodeLog& episode_log() const { return log_; }

  void set_command(const Vec3& cmd) { command_ = cmd; }
  void set_prob_attach(double p) { sched_.prob_attach = p; }
  void set_perfect_alignment(bool v) { cfg_.perfect_alignment = v; }
  void set_use_true_contact_conf(bool v) { cfg_.use_true_contact_conf = v; }

  void reset(uint64_t seed) {
    rng_.reseed(seed);
    if (cfg_.randomize) {
      act_ = ActuationConfig::sample(rng_);
      wall_.friction = rng_.uniform(cfg_.friction_min, cfg_.friction_max);
    } else {
      act_ = ActuationConfig{};
      act_.action_delay = 0.0;
      wall_.friction = 0.4;
    }
    state_ = nominal_state(cfg_.model, wall_);
    if (cfg_.randomize && cfg_.init_joint_noise > 0) {
      for (int j = 0; j < kNumJoints; ++j)
        state_.q[j] = cfg_.model.clamp_joint(
            j, state_.q[j] + rng_.uniform(-cfg_.init_joint_noise, cfg_.init_joint_noise));
      const FkResult fk = forward_kinematics(cfg_.model, state_.base_position,
                                             state_.base_orientation, state_.q,
                                             state_.ankle_rpy);
      state_.foot_pos_base = fk.foot_pos_base;
      state_.foot_pos_world = fk.foot_pos_world;
      state_.foot_normal_world = fk.face_normal_world;
    }
    // command held for the whole episode
    if (rng_.uniform() < cfg_.stand_prob) {
      command_ = Vec3::Zero();
    } else {
      for (int k = 0; k < 3; ++k)
        command_[k] = rng_.uniform(cfg_.cmd_min[k], cfg_.cmd_max[k]);
    }
    for (auto& f : feet_) {
      f = EpmFoot{};
      f.max_force = cfg_.adhesion.max_force;
    }
    for (auto& g : gates_) g = FootGateState{};
    for (int i = 0; i < kNumLegs; ++i) {
      anchored_[i] = 0;
      anchors_[i].setZero();
    }
    obs_asm_.reset(rng_);
    targets_prev_ = targets_prev2_ = cfg_.model.nominal_joint_config();
    delay_.reset(targets_prev_, 0.0);
    action_prev_ = action_prev2_ = VecX::Zero(kActionDimEnv);
    all_attached_since_ = -1.0;
    steps_ = 0;
    log_ = EpisodeLog{};
    log_.seed = seed;
    log_.prob_attach = sched_.prob_attach;
    log_.horizon = cfg_.episode_length;
  }

  /// Filtered proprioception + clock for the estimator (advances the
  /// observation filter; call exactly once per control step).
  VecX estimator_input() {
    Vec3 gdir = wall_.gravity;
    if (gdir.norm() < 1e-9) gdir = Vec3(0, 0, -1);
    gdir.normalize();
    return obs_asm_.advance(state_, targets_prev_, targets_prev2_,
                            state_.sim_time, rng_, gdir);
  }

  VecX observation(const EstimatorOutput& est) const { return obs_asm_.compose(est); }

  /// Ground-truth regression targets for the concurrent estimator.
  VecX privileged_labels() const {
    VecX y(kEstimatorOutputDim);
    const Eigen::Matrix3d R = state_.base_orientation.toRotationMatrix();
    y.segment<3>(0) = R.transpose() * state_.base_lin_vel;
    for (int i = 0; i < kNumLegs; ++i) {
      y[3 + i] = -wall_.penetration(state_.foot_pos_world[i]);
      y[7 + i] = state_.contact_flags[i];
    }
    return y;
  }

  /// One control step (decimation x sim_dt). contact_conf comes from the
  /// estimator; with use_true_contact_conf the true contact flags are used
  /// instead (scripted baseline and diagnostics).
  StepResult step(const VecX& action, const Eigen::Vector4d& contact_conf) {
    StepResult out;
    const double t0 = state_.sim_time;

    VecX targets = cfg_.model.nominal_joint_config() +
                   cfg_.action_scale * action.head(kNumJoints);
    for (int j = 0; j < kNumJoints; ++j)
      targets[j] = cfg_.model.clamp_joint(j, targets[j]);
    delay_.push(t0, targets);

    // adhesion gate, once per control step
    std::array<AttachDecision, kNumLegs> decisions{};
    std::array<double, kNumLegs> gaps{};
    for (int i = 0; i < kNumLegs; ++i) {
      const bool contact = state_.contact_flags[i] != 0;
      const double conf =
          cfg_.use_true_contact_conf ? (contact ? 1.0 : 0.0) : contact_conf[i];
      double gap = alignment_gap(cfg_.model, state_.foot_pos_world[i],
                                 state_.foot_normal_world[i], wall_);
      if (cfg_.perfect_alignment &&
          wall_.penetration(state_.foot_pos_world[i]) > -0.005)
        gap = 0.0;
      gaps[i] = gap;
      const double a_mag = action[kNumJoints + i];

      if (cfg_.ablation == AblationVariant::NoModeling) {
        // partial contact treated as full adhesion: the magnet command
        // alone decides, gap and alignment ignored
        const bool near_wall = wall_.penetration(state_.foot_pos_world[i]) > -0.005;
        decisions[i] = a_mag >= 0.5 && near_wall
                           ? AttachDecision{true, GateReason::OK}
                           : AttachDecision{false, GateReason::MagnetOff};
        feet_[i].command(a_mag >= 0.5, t0, cfg_.adhesion.switch_latency);
      } else if (!sched_.adhesion_enabled) {
        decisions[i] = {false, GateReason::MagnetOff};
      } else if (anchored_[i] && a_mag >= 0.5 &&
                 -wall_.penetration(state_.foot_pos_world[i]) < 0.003) {
        // a latched magnet stays latched until commanded off or pulled
        // clear; the confidence gate only decides new engagements
        decisions[i] = {true, GateReason::OK};
        feet_[i].command(true, t0, cfg_.adhesion.switch_latency);
      } else {
        GateInputs gi;
        gi.contact_confidence = conf;
        gi.magnet_action = a_mag;
        gi.alignment_gap = gap;
        gi.on_ferromagnetic = wall_.ferromagnetic_at(state_.foot_pos_world[i]);
        gi.prob_attach = sched_.prob_attach;
        gi.rng_draw = gates_[i].update(contact, rng_);
        decisions[i] = gate_adhesion(gi, cfg_.adhesion.gap_tol);
        // EPM pulses follow the contact-confidence and magnet-action pair
        feet_[i].command(conf >= 0.5 && a_mag >= 0.5, t0,
                         cfg_.adhesion.switch_latency);
      }
    }

    std::array<int, kNumLegs> force_active{};
    for (int sub = 0; sub < cfg_.decimation; ++sub) {
      const double t_sub = state_.sim_time;
      const VecX eff_targets = delay_.query(t_sub, act_.action_delay);
      std::array<Vec3, kNumLegs> adhesion_forces{};
      for (int i = 0; i < kNumLegs; ++i) {
        feet_[i].settle(t_sub);
        feet_[i].attached = decisions[i].attach && feet_[i].epm_on;
        adhesion_forces[i] = Vec3::Zero();
        if (!feet_[i].attached) {
          anchored_[i] = 0;
          continue;
        }
        force_active[i] = 1;
        if (!anchored_[i]) {  // latch where the magnet engaged
          anchors_[i] = state_.foot_pos_world[i];
          anchored_[i] = 1;
        }
        const double pull_max =
            cfg_.ablation == AblationVariant::NoModeling
                ? cfg_.adhesion.max_force
                : airgap_force(gaps[i], cfg_.adhesion.max_force, cfg_.adhesion.gap_decay);
        // tether: resists separation up to the available pull
        const Vec3& p = state_.foot_pos_world[i];
        const Vec3& v = state_.foot_vel_world[i];
        const double sep = std::max(0.0, -wall_.penetration(p));
        const double v_n = v.dot(wall_.wall_normal);
        // the engaged magnet keeps attracting at zero gap (the wall reaction
        // balances it), which presses the foot in and buys friction shear
        double pull = cfg_.adhesion_preload + cfg_.adhesion_stiffness * sep +
                      cfg_.adhesion_damping * std::max(0.0, v_n);
        pull = std::min(pull, pull_max);
        Vec3 f = -pull * wall_.wall_normal;
        // magnetic shear hold: spring back to the latch point along the
        // wall, capped by mu_mag times the available pull
        const Vec3 v_t = v - v_n * wall_.wall_normal;
        const Vec3 d = p - anchors_[i];
        const Vec3 d_t = d - d.dot(wall_.wall_normal) * wall_.wall_normal;
        Vec3 f_t = -cfg_.adhesion_shear_stiffness * d_t -
                   cfg_.adhesion_tangential_damping * v_t;
        const double cap = cfg_.adhesion.mu_mag * pull_max;
        if (f_t.norm() > cap) f_t *= cap / f_t.norm();
        adhesion_forces[i] = f + f_t;
      }
      try {
        state_ = climbsim::step(state_, cfg_.model, wall_, act_, eff_targets,
                                adhesion_forces, cfg_.sim_dt);
      } catch (const NonFiniteState&) {
        out.done = true;
        out.cause = TerminationCause::NonFinite;
        finalize_step(action, decisions, force_active, t0, out);
        return out;
      }
    }

    ++steps_;
    finalize_step(action, decisions, force_active, t0, out);
    return out;
  }

  static constexpr int kActionDimEnv = 16;

 private:
  void finalize_step(const VecX& action,
                     const std::array<AttachDecision, kNumLegs>& decisions,
                     const std::array<int, kNumLegs>& force_active, double t0,
                     StepResult& out) {
    // reward
    RewardInputs in;
    const Eigen::Matrix3d R = state_.base_orientation.toRotationMatrix();
    const Vec3 v_body = R.transpose() * state_.base_lin_vel;
    in.v_desired = command_;
    in.v_xy = v_body.head<2>();
    in.omega_z = state_.base_ang_vel[2];
    in.v_z = state_.base_lin_vel.dot(wall_.wall_normal);
    in.omega_xy = state_.base_ang_vel.head<2>();
    for (int i = 0; i < kNumLegs; ++i) {
      in.phi[i] = gait_phase(t0, i);
      in.p_z[i] = -wall_.penetration(state_.foot_pos_world[i]);
      const Vec3& fv = state_.foot_vel_world[i];
      const double fvn = fv.dot(wall_.wall_normal);
      const Vec3 fvt = fv - fvn * wall_.wall_normal;
      in.foot_v_xy[i] = fvt.head<2>();
      in.foot_v_z[i] = fvn;
      in.contact[i] = state_.contact_flags[i];
      in.a_magnet[i] = action[kNumJoints + i];
    }
    in.tau = state_.tau;
    in.q = state_.q;
    in.qd = state_.qd;
    in.qdd = state_.qdd;
    in.q_nominal = cfg_.model.nominal_joint_config();
    in.action = action;
    in.action_prev = action_prev_;
    in.action_prev2 = action_prev2_;
    in.body_z_world = R.col(2);
    in.up_axis_world = wall_.wall_normal;
    out.breakdown = compute_rewards(in, sched_);
    out.reward = out.breakdown.total;

    action_prev2_ = action_prev_;
    action_prev_ = action;
    targets_prev2_ = targets_prev_;
    targets_prev_ = delay_.query(state_.sim_time, 0.0);

    // termination
    if (out.cause == TerminationCause::None) {
      const double separation = wall_.penetration(state_.base_position) * -1.0;
      const Vec3 g = wall_.gravity;
      const Vec3 g_t = g - g.dot(wall_.wall_normal) * wall_.wall_normal;
      bool fell = separation > cfg_.fall_separation;
      if (g_t.norm() > 1e-6 &&
          state_.base_position.x() < wall_.bottom_edge_x - cfg_.fall_below_edge)
        fell = true;
      const bool all_attached =
          feet_[0].attached && feet_[1].attached && feet_[2].attached && feet_[3].attached;
      if (all_attached) {
        if (all_attached_since_ < 0) all_attached_since_ = t0;
      } else {
        all_attached_since_ = -1.0;
      }
      if (fell) {
        out.done = true;
        out.cause = TerminationCause::Fell;
      } else if (all_attached_since_ >= 0 &&
                 state_.sim_time - all_attached_since_ > cfg_.freeze_timeout) {
        out.done = true;
        out.cause = TerminationCause::Frozen;
      } else if (state_.sim_time >= cfg_.episode_length - 1e-9) {
        out.done = true;
        out.cause = TerminationCause::None;
      }
    } else {
      out.done = true;
    }

    // log record
    LogStep rec;
    rec.t = t0;
    rec.command = command_;
    const Eigen::Matrix3d Rl = state_.base_orientation.toRotationMatrix();
    const Vec3 vb = Rl.transpose() * state_.base_lin_vel;
    rec.measured = Vec3(vb.x(), vb.y(), state_.base_ang_vel[2]);
    for (int i = 0; i < kNumLegs; ++i) {
      rec.stance[i] =
          (!in_swing_window(gait_phase(t0, i)) && state_.contact_flags[i]) ? 1 : 0;
      rec.attach[i] = decisions[i].attach ? 1 : 0;
      rec.force_active[i] = force_active[i];
      rec.reason[i] = static_cast<int>(decisions[i].reason);
    }
    log_.steps.push_back(rec);
    log_.duration = state_.sim_time;
    if (out.done) log_.termination = out.cause;
  }

  EnvConfig cfg_;
  WallEnvironment wall_;
  ActuationConfig act_;
  RobotState state_;
  CurriculumState sched_;
  std::array<EpmFoot, kNumLegs> feet_;
  std::array<FootGateState, kNumLegs> gates_;
  std::array<Vec3, kNumLegs> anchors_;
  std::array<int, kNumLegs> anchored_{};
  ObservationAssembler obs_asm_;
  ActionDelayBuffer delay_;
  VecX targets_prev_, targets_prev2_;
  VecX action_prev_, action_prev2_;
  Vec3 command_{0, 0, 0};
  Rng rng_;
  double all_attached_since_ = -1.0;
  long steps_ = 0;
  EpisodeLog log_;
};

}  // namespace climbsim
