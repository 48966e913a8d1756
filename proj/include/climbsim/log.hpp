#pragma once

#include <array>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "climbsim/adhesion.hpp"
#include "climbsim/model.hpp"

namespace climbsim {

enum class TerminationCause { None = 0, Fell, Frozen, NonFinite };

inline const char* termination_name(TerminationCause c) {
  switch (c) {
    case TerminationCause::None: return "none";
    case TerminationCause::Fell: return "fell";
    case TerminationCause::Frozen: return "frozen";
    case TerminationCause::NonFinite: return "non_finite";
  }
  return "?";
}

inline TerminationCause termination_from_name(const std::string& s) {
  if (s == "none") return TerminationCause::None;
  if (s == "fell") return TerminationCause::Fell;
  if (s == "frozen") return TerminationCause::Frozen;
  if (s == "non_finite") return TerminationCause::NonFinite;
  throw std::runtime_error("unknown termination cause: " + s);
}

struct LogStep {
  double t = 0;
  Vec3 command{0, 0, 0};   // (vx, vy, wz) desired
  Vec3 measured{0, 0, 0};  // (vx, vy, wz) measured
  std::array<int, kNumLegs> stance{};        // in contact during clock stance
  std::array<int, kNumLegs> attach{};        // gate passed this step
  std::array<int, kNumLegs> force_active{};  // holding force applied
  std::array<int, kNumLegs> reason{};        // GateReason as int
};

struct EpisodeLog {
  uint64_t seed = 0;
  double prob_attach = 1.0;
  double horizon = 10.0;
  TerminationCause termination = TerminationCause::None;
  double duration = 0;
  std::vector<LogStep> steps;
};

// One record per control step, space-delimited:
//   t cmd_vx cmd_vy cmd_wz vx vy wz stance[4] attach[4] force[4] reason[4]
// Floating-point fields use %.17g so replay is bit-exact.
inline void write_episode_log(const EpisodeLog& log, std::ostream& os,
                              uint64_t config_hash) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "# climbsim-episode v1 config=%016" PRIx64 "\n",
                config_hash);
  os << buf;
  std::snprintf(buf, sizeof(buf),
                "meta seed=%" PRIu64 " prob=%.17g horizon=%.17g cause=%s duration=%.17g\n",
                log.seed, log.prob_attach, log.horizon,
                termination_name(log.termination), log.duration);
  os << buf;
  for (const auto& s : log.steps) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %.17g %.17g", s.t,
                  s.command[0], s.command[1], s.command[2], s.measured[0],
                  s.measured[1], s.measured[2]);
    os << buf;
    for (int i = 0; i < kNumLegs; ++i) os << ' ' << s.stance[i];
    for (int i = 0; i < kNumLegs; ++i) os << ' ' << s.attach[i];
    for (int i = 0; i < kNumLegs; ++i) os << ' ' << s.force_active[i];
    for (int i = 0; i < kNumLegs; ++i) os << ' ' << s.reason[i];
    os << '\n';
  }
}

inline void save_episode_log(const EpisodeLog& log, const std::string& path,
                             uint64_t config_hash) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write episode log " + path);
  write_episode_log(log, os, config_hash);
}

inline EpisodeLog read_episode_log(std::istream& is) {
  EpisodeLog log;
  std::string line;
  size_t record = 0;
  while (std::getline(is, line)) {
    ++record;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    if (line.rfind("meta ", 0) == 0) {
      std::string tag, kv;
      ls >> tag;
      while (ls >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw std::runtime_error("bad meta field at record " + std::to_string(record));
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "seed") log.seed = std::stoull(val);
        else if (key == "prob") log.prob_attach = std::stod(val);
        else if (key == "horizon") log.horizon = std::stod(val);
        else if (key == "cause") log.termination = termination_from_name(val);
        else if (key == "duration") log.duration = std::stod(val);
      }
      continue;
    }
    LogStep s;
    ls >> s.t >> s.command[0] >> s.command[1] >> s.command[2] >> s.measured[0] >>
        s.measured[1] >> s.measured[2];
    for (int i = 0; i < kNumLegs; ++i) ls >> s.stance[i];
    for (int i = 0; i < kNumLegs; ++i) ls >> s.attach[i];
    for (int i = 0; i < kNumLegs; ++i) ls >> s.force_active[i];
    for (int i = 0; i < kNumLegs; ++i) ls >> s.reason[i];
    if (!ls)
      throw std::runtime_error("corrupt episode log at record " + std::to_string(record));
    log.steps.push_back(s);
  }
  return log;
}

inline EpisodeLog load_episode_log(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open episode log " + path);
  return read_episode_log(is);
}

}  // namespace climbsim
