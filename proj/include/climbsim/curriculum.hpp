#pragma once

#include <algorithm>
#include <cmath>

#include "climbsim/math.hpp"

namespace climbsim {
namespace curriculum {

// Default schedule breakpoints, in training iterations. A scale factor in
// (0, 1] compresses all of them uniformly so the full curriculum can run at
// desk scale; scale = 1 reproduces the nominal schedule.
constexpr double kFlatGroundEnd = 1200.0;     // end of phase 1
constexpr double kGravityRampLen = 20000.0;   // phase 2 ramp length
constexpr double kProbRampStart = 21200.0;    // phase 3 start
constexpr double kProbRampLen = 13800.0;      // phase 3 ramp length
constexpr double kSmoothnessStart = 1000.0;   // action-smoothness activation
constexpr double kKappaBase = 0.99975;

/// Gravity tilt angle from ground (0) to wall (pi/2).
inline double theta_of(double t, double scale = 1.0) {
  const double ramp = 0.5 * kPi * (t - kFlatGroundEnd * scale) / (kGravityRampLen * scale);
  return std::min(0.5 * kPi, std::max(0.0, ramp));
}

/// Gravity rotated about +y by theta(t).
inline Vec3 gravity_of(double t, const Vec3& g0 = Vec3(0, 0, -9.81), double scale = 1.0) {
  return rot_y(theta_of(t, scale)) * g0;
}

/// Attachment success probability: 1.0 until the ramp start, then linear
/// down to 0.85.
inline double prob_attach_of(double t, double scale = 1.0) {
  const double x = std::min(std::max(t - kProbRampStart * scale, 0.0), kProbRampLen * scale);
  return 1.0 - 0.15 * x / (kProbRampLen * scale);
}

/// Reward scheduling factor. Under compression the exponent is divided by
/// the scale so the decay shape is preserved.
inline double kappa_of(double t, double scale = 1.0) {
  return std::pow(kKappaBase, std::max(t - kFlatGroundEnd * scale, 0.0) / scale);
}

inline double velocity_scale_of(double kappa) { return 1.5 - 0.5 * kappa; }
inline double penalty_scale_of(double kappa) { return 0.5 + 0.5 * kappa; }

inline int phase_of(double t, double scale = 1.0) {
  if (t <= kFlatGroundEnd * scale) return 1;
  if (t <= kProbRampStart * scale) return 2;
  return 3;
}

inline bool smoothness_active(double t, double scale = 1.0) {
  return t >= kSmoothnessStart * scale;
}

}  // namespace curriculum

/// Schedule snapshot frozen at the start of a training iteration.
struct CurriculumState {
  double iter = 0;
  double theta = 0;
  Vec3 gravity{0, 0, -9.81};
  double prob_attach = 1.0;
  double kappa = 1.0;
  int phase = 1;
  bool smoothness_active = false;
  bool adhesion_enabled = true;

  /// phase1_adhesion: whether magnetic forces act during the flat-ground
  /// segment (config switch; defaults on).
  static CurriculumState at(double t, double scale = 1.0, bool phase1_adhesion = true,
                            const Vec3& g0 = Vec3(0, 0, -9.81)) {
    CurriculumState s;
    s.iter = t;
    s.theta = curriculum::theta_of(t, scale);
    s.gravity = curriculum::gravity_of(t, g0, scale);
    s.prob_attach = curriculum::prob_attach_of(t, scale);
    s.kappa = curriculum::kappa_of(t, scale);
    s.phase = curriculum::phase_of(t, scale);
    s.smoothness_active = curriculum::smoothness_active(t, scale);
    s.adhesion_enabled = (s.phase > 1) || phase1_adhesion;
    return s;
  }
};

}  // namespace climbsim
