#pragma once

#include <cmath>

#include "climbsim/math.hpp"
#include "climbsim/rng.hpp"

namespace climbsim {

struct AdhesionParams {
  double max_force = 697.0;        // N, zero-gap holding force
  double gap_decay = std::log(1.0 / 0.07) / 0.001;  // 1/m, 7% at 1 mm
  double mu_mag = 0.5;             // tangential hold per unit normal pull
  double gap_tol = 0.0005;         // m, full-alignment threshold
  double switch_latency = 0.005;   // s, EPM on/off latency (symmetric)
};

/// Normal holding force as a function of air gap: exponential decay through
/// the zero-gap and 1 mm anchors, monotone non-increasing.
inline double airgap_force(double gap, double max_force,
                           double decay = std::log(1.0 / 0.07) / 0.001) {
  return max_force * std::exp(-decay * gap);
}

enum class GateReason {
  OK = 0,
  NoContactConf,
  MagnetOff,
  StochasticFail,
  Misaligned,
  NonFerromagnetic,
};

inline const char* gate_reason_name(GateReason r) {
  switch (r) {
    case GateReason::OK: return "OK";
    case GateReason::NoContactConf: return "NoContactConf";
    case GateReason::MagnetOff: return "MagnetOff";
    case GateReason::StochasticFail: return "StochasticFail";
    case GateReason::Misaligned: return "Misaligned";
    case GateReason::NonFerromagnetic: return "NonFerromagnetic";
  }
  return "?";
}

struct GateInputs {
  double contact_confidence = 0;  // c~_foot in [0,1]
  double magnet_action = 0;       // policy output, thresholded at 0.5
  double alignment_gap = 0;       // m, 0 means fully aligned
  bool on_ferromagnetic = true;
  double prob_attach = 1.0;
  double rng_draw = 0.0;          // X in [0,1], persisted across a stance
};

struct AttachDecision {
  bool attach = false;
  GateReason reason = GateReason::OK;
};

/// Sequential attachment gate: contact recognition, magnet activation,
/// stochastic success, geometric alignment. Reports the first failing
/// condition. The stochastic draw is supplied by the caller (see
/// FootGateState for the per-stance sampling rule).
inline AttachDecision gate_adhesion(const GateInputs& g, double gap_tol = 0.0005) {
  if (g.contact_confidence < 0.5) return {false, GateReason::NoContactConf};
  if (g.magnet_action < 0.5) return {false, GateReason::MagnetOff};
  if (g.rng_draw > g.prob_attach) return {false, GateReason::StochasticFail};
  if (g.alignment_gap > gap_tol) return {false, GateReason::Misaligned};
  if (!g.on_ferromagnetic) return {false, GateReason::NonFerromagnetic};
  return {true, GateReason::OK};
}

/// Per-foot stochastic draw: X is sampled only on swing->contact
/// transitions and the outcome persists for the whole stance.
struct FootGateState {
  bool in_swing = true;
  double draw = 0.0;

  double update(bool in_contact, Rng& rng) {
    if (in_contact && in_swing) draw = rng.uniform();
    in_swing = !in_contact;
    return draw;
  }
};

/// EPM switching with latency: a command takes effect switch_latency
/// seconds later; a new command during a pending switch supersedes it.
struct EpmFoot {
  bool epm_on = false;
  bool pending_target = false;
  double switch_pending_until = -1.0;  // < 0 means no pending switch
  double max_force = 697.0;
  bool attached = false;
  double attach_gap = 0.0;

  void command(bool on, double now, double latency) {
    settle(now);
    if (switch_pending_until >= 0.0) {
      if (on == pending_target) return;
      // supersede: restart the latency window
      pending_target = on;
      switch_pending_until = now + latency;
      return;
    }
    if (on == epm_on) return;
    pending_target = on;
    switch_pending_until = now + latency;
  }

  void settle(double now) {
    if (switch_pending_until >= 0.0 && now >= switch_pending_until) {
      epm_on = pending_target;
      switch_pending_until = -1.0;
      if (!epm_on) {
        attached = false;  // turning off releases adhesion
        attach_gap = 0.0;
      }
    }
  }
};

inline EpmFoot switch_epm(EpmFoot foot, bool command_on, double now,
                          double latency = 0.005) {
  foot.command(command_on, now, latency);
  return foot;
}

/// Normal pull toward the wall plus tangential static hold capped at
/// mu_mag times the normal pull. wall_normal points away from the wall
/// (toward the robot); demanded_tangential is the force needed to keep
/// the foot from sliding (slip when it exceeds the cap).
inline Vec3 holding_force(const EpmFoot& foot, const AttachDecision& decision,
                          double gap, const Vec3& wall_normal,
                          const Vec3& demanded_tangential = Vec3::Zero(),
                          const AdhesionParams& p = AdhesionParams{}) {
  if (!decision.attach || !foot.epm_on) return Vec3::Zero();
  const double normal_pull = airgap_force(gap, foot.max_force, p.gap_decay);
  Vec3 f = -normal_pull * wall_normal;
  const double cap = p.mu_mag * normal_pull;
  const double demand = demanded_tangential.norm();
  if (demand > 1e-12) {
    f += demanded_tangential * (std::min(demand, cap) / demand);
  }
  return f;
}

}  // namespace climbsim
