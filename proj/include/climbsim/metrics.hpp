#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "climbsim/log.hpp"

namespace climbsim {

/// RMS of the stacked (vx, vy, wz) tracking error over all logged steps.
/// The three channels are pooled into one scalar (the per-channel values
/// are available from velocity_rmse_per_channel).
inline std::optional<double> velocity_rmse(const EpisodeLog& log) {
  if (log.steps.empty()) return std::nullopt;
  double sum = 0;
  for (const auto& s : log.steps)
    sum += (s.command - s.measured).squaredNorm();
  return std::sqrt(sum / (3.0 * static_cast<double>(log.steps.size())));
}

inline std::optional<Vec3> velocity_rmse_per_channel(const EpisodeLog& log) {
  if (log.steps.empty()) return std::nullopt;
  Vec3 sum = Vec3::Zero();
  for (const auto& s : log.steps) {
    const Vec3 e = s.command - s.measured;
    sum += e.cwiseProduct(e);
  }
  return (sum / static_cast<double>(log.steps.size())).cwiseSqrt();
}

/// Percentage of stance foot-steps with adhesion force actively applied.
inline std::optional<double> retention(const EpisodeLog& log) {
  long stance = 0, held = 0;
  for (const auto& s : log.steps) {
    for (int i = 0; i < kNumLegs; ++i) {
      if (s.stance[i]) {
        ++stance;
        if (s.force_active[i]) ++held;
      }
    }
  }
  if (stance == 0) return std::nullopt;
  return 100.0 * static_cast<double>(held) / static_cast<double>(stance);
}

struct FailureEvent {
  double t;
  int foot;
};

/// Stochastic-gate failures: the first step of each stance during which the
/// gate reports StochasticFail for a foot. Misaligned / non-ferromagnetic
/// rejections are not counted.
inline std::vector<FailureEvent> stochastic_failures(const EpisodeLog& log) {
  std::vector<FailureEvent> events;
  std::array<bool, kNumLegs> failing{};
  for (const auto& s : log.steps) {
    for (int i = 0; i < kNumLegs; ++i) {
      const bool fail = s.reason[i] == static_cast<int>(GateReason::StochasticFail);
      if (fail && !failing[i]) events.push_back({s.t, i});
      failing[i] = fail;
    }
  }
  return events;
}

/// Fraction of stochastic failures where the same foot reattaches within
/// delta_t (before any termination truncates the log). Returns nullopt when
/// there are no failures.
inline std::optional<double> recovery_rate(const EpisodeLog& log, double delta_t) {
  const auto events = stochastic_failures(log);
  if (events.empty()) return std::nullopt;
  int recovered = 0;
  for (const auto& ev : events) {
    for (const auto& s : log.steps) {
      if (s.t <= ev.t || s.t > ev.t + delta_t) continue;
      if (s.attach[ev.foot]) {
        ++recovered;
        break;
      }
    }
  }
  return 100.0 * recovered / static_cast<double>(events.size());
}

inline double early_termination_rate(const std::vector<EpisodeLog>& logs) {
  if (logs.empty()) return 0;
  int early = 0;
  for (const auto& l : logs)
    if (l.termination != TerminationCause::None) ++early;
  return 100.0 * early / static_cast<double>(logs.size());
}

inline double average_walking_time(const std::vector<EpisodeLog>& logs) {
  if (logs.empty()) return 0;
  double sum = 0;
  for (const auto& l : logs) sum += std::min(l.duration, l.horizon);
  return sum / static_cast<double>(logs.size());
}

}  // namespace climbsim
