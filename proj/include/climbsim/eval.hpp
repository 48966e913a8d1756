#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "climbsim/env.hpp"
#include "climbsim/metrics.hpp"
#include "climbsim/policy.hpp"

namespace climbsim {

struct EvalProtocol {
  double horizon = 10.0;
  int episodes = 100;
  double prob_attach = 1.0;
  double theta = 0.5 * kPi;  // vertical wall by default
  bool perfect_alignment = false;
  uint64_t base_seed = 1;
  std::vector<double> recovery_windows{1.2, 2.4, 3.6};
  int workers = 1;
};

/// Open-loop crawl pattern from the gait clock: one foot at a time is in
/// its swing window, where its magnet is commanded off; magnets are on in
/// stance, with a small phase lead so the EPM latency is absorbed. Joints
/// hold the nominal stance — without feedback a lifted foot cannot be
/// guaranteed to find the wall again, so the feet stay planted and only
/// the adhesion cycles.
inline VecX scripted_crawl_action(double t, double /*action_scale*/ = 0.3) {
  VecX a = VecX::Zero(16);
  const double lead = 0.05;  // rad of phase, > latency * 2*pi/T
  for (int i = 0; i < kNumLegs; ++i) {
    const double phi = gait_phase(t, i);
    const bool near_swing =
        (phi > 0 && phi < 0.5 * kPi - lead) || phi > 2.0 * kPi - lead;
    a[kNumJoints + i] = near_swing ? 0.0 : 1.0;
  }
  return a;
}

/// Policy interface used by the episode runner: (estimator_input, env) ->
/// (action, contact confidence).
struct Controller {
  // returns the action; fills contact_conf
  std::function<VecX(ClimbEnv&, Eigen::Vector4d*)> act;
};

inline Controller scripted_controller() {
  Controller c;
  c.act = [](ClimbEnv& env, Eigen::Vector4d* conf) {
    env.estimator_input();  // keep the filter cadence identical to policy runs
    for (int i = 0; i < kNumLegs; ++i) {
      // idealized proximity sensing: a foot held near the wall counts as
      // contact for re-engagement, even when the base tilt lifts it a few mm
      const double clearance =
          std::max(0.0, -env.wall().penetration(env.state().foot_pos_world[i]));
      (*conf)[i] = clearance < 0.005 ? 1.0 : 0.0;
    }
    return scripted_crawl_action(env.time(), env.config().action_scale);
  };
  return c;
}

inline Controller policy_controller(const Networks& nets) {
  Controller c;
  c.act = [&nets](ClimbEnv& env, Eigen::Vector4d* conf) {
    const VecX est_in = env.estimator_input();
    const EstimatorOutput est = nets.estimate(est_in);
    *conf = est.contact_prob;
    const VecX obs = env.observation(est);
    return nets.actor_mean(obs);  // deterministic at evaluation time
  };
  return c;
}

/// Deterministic given (env config, protocol, seed); logs every adhesion
/// gate decision.
inline EpisodeLog run_episode(const Controller& controller, EnvConfig cfg,
                              const EvalProtocol& protocol, uint64_t seed) {
  cfg.episode_length = protocol.horizon;
  cfg.perfect_alignment = protocol.perfect_alignment;
  ClimbEnv env(cfg);
  CurriculumState sched;
  sched.theta = protocol.theta;
  sched.gravity = rot_y(protocol.theta) * Vec3(0, 0, -9.81);
  sched.prob_attach = protocol.prob_attach;
  sched.kappa = 0.0;  // end-of-training reward weights
  sched.phase = 3;
  sched.smoothness_active = true;
  sched.adhesion_enabled = true;
  env.set_schedule(sched);
  env.reset(seed);
  for (;;) {
    Eigen::Vector4d conf = Eigen::Vector4d::Zero();
    const VecX action = controller.act(env, &conf);
    const StepResult r = env.step(action, conf);
    if (r.done) break;
  }
  return env.episode_log();
}

inline EpisodeLog scripted_crawl_baseline(const EnvConfig& cfg,
                                          const EvalProtocol& protocol,
                                          uint64_t seed) {
  return run_episode(scripted_controller(), cfg, protocol, seed);
}

struct MeanStd {
  double mean = 0, stddev = 0;
  int n = 0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  m.n = static_cast<int>(xs.size());
  if (m.n == 0) return m;
  for (double x : xs) m.mean += x;
  m.mean /= m.n;
  for (double x : xs) m.stddev += (x - m.mean) * (x - m.mean);
  m.stddev = std::sqrt(m.stddev / m.n);
  return m;
}

inline double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0;
  std::sort(xs.begin(), xs.end());
  const size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

struct MetricsReport {
  double prob_attach = 1.0;
  int episodes = 0;
  MeanStd vel_rmse;
  double vel_rmse_median = 0;
  double early_termination = 0;  // %
  MeanStd walking_time;
  MeanStd retention_pct;
  std::vector<double> recovery_windows;
  std::vector<MeanStd> recovery_pct;  // per window; n = episodes with failures
};

/// Single-pass fold over collected logs; pure in the logs.
inline MetricsReport compute_metrics(const std::vector<EpisodeLog>& logs,
                                     const std::vector<double>& recovery_windows) {
  MetricsReport rep;
  rep.episodes = static_cast<int>(logs.size());
  rep.recovery_windows = recovery_windows;
  std::vector<double> rmses, times, retentions;
  std::vector<std::vector<double>> recoveries(recovery_windows.size());
  for (const auto& log : logs) {
    if (auto r = velocity_rmse(log)) rmses.push_back(*r);
    times.push_back(std::min(log.duration, log.horizon));
    if (auto r = retention(log)) retentions.push_back(*r);
    for (size_t w = 0; w < recovery_windows.size(); ++w)
      if (auto r = recovery_rate(log, recovery_windows[w]))
        recoveries[w].push_back(*r);
  }
  if (!logs.empty()) rep.prob_attach = logs.front().prob_attach;
  rep.vel_rmse = mean_std(rmses);
  rep.vel_rmse_median = median_of(rmses);
  rep.early_termination = early_termination_rate(logs);
  rep.walking_time = mean_std(times);
  rep.retention_pct = mean_std(retentions);
  for (auto& rw : recoveries) rep.recovery_pct.push_back(mean_std(rw));
  return rep;
}

inline std::string format_report(const MetricsReport& r, bool tsv = false) {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed;
  const char sep = tsv ? '\t' : ' ';
  if (tsv) {
    os << "prob" << sep << "episodes" << sep << "vel_rmse_mean" << sep
       << "vel_rmse_std" << sep << "vel_rmse_median" << sep << "early_term_pct"
       << sep << "avg_time_mean" << sep << "avg_time_std" << sep
       << "retention_mean" << sep << "retention_std";
    for (double w : r.recovery_windows)
      os << sep << "recovery_" << w << "_mean" << sep << "recovery_" << w << "_std";
    os << "\n";
    os << r.prob_attach << sep << r.episodes << sep << r.vel_rmse.mean << sep
       << r.vel_rmse.stddev << sep << r.vel_rmse_median << sep
       << r.early_termination << sep << r.walking_time.mean << sep
       << r.walking_time.stddev << sep << r.retention_pct.mean << sep
       << r.retention_pct.stddev;
    for (const auto& rec : r.recovery_pct)
      os << sep << rec.mean << sep << rec.stddev;
    os << "\n";
    return os.str();
  }
  os << "prob_attach        " << r.prob_attach << "  (" << r.episodes
     << " episodes)\n";
  os << "vel RMSE           " << r.vel_rmse.mean << " +/- " << r.vel_rmse.stddev
     << "  (median " << r.vel_rmse_median << ")\n";
  os << "early termination  " << r.early_termination << " %\n";
  os << "avg walking time   " << r.walking_time.mean << " +/- "
     << r.walking_time.stddev << " s\n";
  os << "retention          " << r.retention_pct.mean << " +/- "
     << r.retention_pct.stddev << " %";
  if (r.retention_pct.n == 0) os << "  (no stance time)";
  os << "\n";
  for (size_t w = 0; w < r.recovery_windows.size(); ++w) {
    os << "recovery dT=" << r.recovery_windows[w] << "s   "
       << r.recovery_pct[w].mean << " +/- " << r.recovery_pct[w].stddev << " %";
    if (r.recovery_pct[w].n == 0) os << "  (no failures)";
    os << "\n";
  }
  return os.str();
}

/// Runs the protocol with disjoint per-episode seeds; episodes can run on
/// several workers, results are folded in episode order.
inline std::vector<EpisodeLog> run_protocol(
    const std::function<EpisodeLog(uint64_t seed, int episode)>& run,
    const EvalProtocol& protocol) {
  std::vector<EpisodeLog> logs(protocol.episodes);
  const int workers = std::max(1, protocol.workers);
  if (workers == 1) {
    for (int e = 0; e < protocol.episodes; ++e)
      logs[e] = run(protocol.base_seed + 1000003ULL * e, e);
    return logs;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int e = next.fetch_add(1);
        if (e >= protocol.episodes) return;
        logs[e] = run(protocol.base_seed + 1000003ULL * e, e);
      }
    });
  }
  for (auto& th : pool) th.join();
  return logs;
}

}  // namespace climbsim
