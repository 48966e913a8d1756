#include <doctest.h>

#include <cstdio>
#include <sstream>

#include "climbsim/eval.hpp"
#include "climbsim/log.hpp"
#include "climbsim/metrics.hpp"

using namespace climbsim;

namespace {

LogStep make_step(double t, const Vec3& cmd, const Vec3& meas) {
  LogStep s;
  s.t = t;
  s.command = cmd;
  s.measured = meas;
  return s;
}

}  // namespace

TEST_CASE("velocity RMSE pools the three channels") {
  EpisodeLog log;
  log.steps.push_back(make_step(0.0, Vec3(1, 0, 0), Vec3(0, 0, 0)));
  log.steps.push_back(make_step(0.01, Vec3(0, 2, 0), Vec3(0, 0, 0)));
  // sum of squared errors = 1 + 4 = 5 over N = 2 steps, 3 channels
  const auto r = velocity_rmse(log);
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(std::sqrt(5.0 / 6.0)).epsilon(1e-12));
  const auto pc = velocity_rmse_per_channel(log);
  CHECK((*pc)[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK((*pc)[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK((*pc)[2] == 0.0);
  CHECK_FALSE(velocity_rmse(EpisodeLog{}).has_value());
}

TEST_CASE("retention counts stance steps with force applied") {
  EpisodeLog log;
  LogStep s;
  s.stance = {1, 1, 0, 0};
  s.force_active = {1, 0, 1, 0};  // foot 2 force in swing does not count
  log.steps.push_back(s);
  log.steps.push_back(s);
  const auto r = retention(log);
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(50.0));
  EpisodeLog empty;
  LogStep none;
  empty.steps.push_back(none);
  CHECK_FALSE(retention(empty).has_value());
}

TEST_CASE("stochastic failures deduplicate within a stance") {
  EpisodeLog log;
  const int fail = static_cast<int>(GateReason::StochasticFail);
  const int ok = static_cast<int>(GateReason::OK);
  for (int k = 0; k < 6; ++k) {
    LogStep s;
    s.t = 0.01 * k;
    // foot 0 fails for steps 1..3 (one event), recovers at 4
    s.reason[0] = (k >= 1 && k <= 3) ? fail : ok;
    s.attach[0] = (k >= 4) ? 1 : 0;
    // foot 1 has two separate failure bouts
    s.reason[1] = (k == 1 || k == 4) ? fail : ok;
    log.steps.push_back(s);
  }
  const auto events = stochastic_failures(log);
  REQUIRE(events.size() == 3);
  CHECK(events[0].foot == 0);
  CHECK(events[0].t == doctest::Approx(0.01));
  CHECK(events[1].foot == 1);
  CHECK(events[2].foot == 1);
}

TEST_CASE("recovery rate and its monotonicity in the window") {
  EpisodeLog log;
  const int fail = static_cast<int>(GateReason::StochasticFail);
  // one failure at t = 0, reattach at t = 0.5
  for (int k = 0; k < 100; ++k) {
    LogStep s;
    s.t = 0.01 * k;
    s.reason[0] = (k == 0) ? fail : 0;
    s.attach[0] = (k == 50) ? 1 : 0;
    log.steps.push_back(s);
  }
  CHECK(*recovery_rate(log, 0.3) == doctest::Approx(0.0));
  CHECK(*recovery_rate(log, 0.5) == doctest::Approx(100.0));
  CHECK(*recovery_rate(log, 2.0) == doctest::Approx(100.0));
  double prev = -1;
  for (double w : {0.1, 0.3, 0.5, 0.8, 1.2}) {
    const double r = *recovery_rate(log, w);
    CHECK(r >= prev);
    prev = r;
  }
  EpisodeLog clean;
  clean.steps.push_back(LogStep{});
  CHECK_FALSE(recovery_rate(clean, 1.0).has_value());
}

TEST_CASE("early termination and walking time aggregation") {
  EpisodeLog ok, fell;
  ok.duration = 10.0;
  ok.horizon = 10.0;
  fell.termination = TerminationCause::Fell;
  fell.duration = 3.0;
  fell.horizon = 10.0;
  EpisodeLog overrun;  // duration capped at the horizon
  overrun.duration = 10.004;
  overrun.horizon = 10.0;
  const std::vector<EpisodeLog> logs{ok, fell, overrun};
  CHECK(early_termination_rate(logs) == doctest::Approx(100.0 / 3.0));
  CHECK(average_walking_time(logs) == doctest::Approx((10.0 + 3.0 + 10.0) / 3.0));
}

TEST_CASE("episode log round trip is bit exact") {
  EpisodeLog log;
  log.seed = 77;
  log.prob_attach = 0.85;
  log.horizon = 10.0;
  log.termination = TerminationCause::Fell;
  log.duration = 1.0 / 3.0;
  Rng rng(4);
  for (int k = 0; k < 25; ++k) {
    LogStep s;
    s.t = k * 0.01 + rng.uniform() * 1e-12;
    s.command = Vec3(rng.normal(), rng.normal(), rng.normal());
    s.measured = Vec3(rng.normal(), rng.normal(), rng.normal());
    for (int i = 0; i < 4; ++i) {
      s.stance[i] = rng.uniform() < 0.5;
      s.attach[i] = rng.uniform() < 0.5;
      s.force_active[i] = rng.uniform() < 0.5;
      s.reason[i] = static_cast<int>(rng.uniform(0, 5.99));
    }
    log.steps.push_back(s);
  }
  std::stringstream ss;
  write_episode_log(log, ss, 0xabcdef0123456789ULL);
  const EpisodeLog back = read_episode_log(ss);
  CHECK(back.seed == log.seed);
  CHECK(back.prob_attach == log.prob_attach);
  CHECK(back.termination == log.termination);
  CHECK(back.duration == log.duration);
  REQUIRE(back.steps.size() == log.steps.size());
  for (size_t k = 0; k < log.steps.size(); ++k) {
    CHECK(back.steps[k].t == log.steps[k].t);
    CHECK(back.steps[k].command == log.steps[k].command);
    CHECK(back.steps[k].measured == log.steps[k].measured);
    for (int i = 0; i < 4; ++i) {
      CHECK(back.steps[k].stance[i] == log.steps[k].stance[i]);
      CHECK(back.steps[k].reason[i] == log.steps[k].reason[i]);
    }
  }
  // metrics recomputed from the round-tripped log agree bitwise
  CHECK(*velocity_rmse(back) == *velocity_rmse(log));
  const auto r1 = retention(log), r2 = retention(back);
  CHECK(r1.has_value() == r2.has_value());
  if (r1) CHECK(*r1 == *r2);
}

TEST_CASE("corrupt log reports the record index") {
  std::stringstream ss("# header\nmeta seed=1 prob=1 horizon=10 cause=none duration=1\n0.0 0 0 0 0 0 bad\n");
  try {
    read_episode_log(ss);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("record") != std::string::npos);
  }
}

TEST_CASE("metrics report aggregation and formatting") {
  EnvConfig cfg;
  EvalProtocol protocol;
  protocol.horizon = 1.5;
  protocol.episodes = 3;
  auto runner = [&](uint64_t seed, int) {
    return scripted_crawl_baseline(cfg, protocol, seed);
  };
  const auto logs = run_protocol(runner, protocol);
  REQUIRE(logs.size() == 3);
  const MetricsReport rep = compute_metrics(logs, {1.2, 2.4, 3.6});
  CHECK(rep.episodes == 3);
  CHECK(rep.recovery_pct.size() == 3);
  const std::string txt = format_report(rep);
  CHECK(txt.find("retention") != std::string::npos);
  const std::string tsv = format_report(rep, true);
  CHECK(tsv.find("vel_rmse_mean") != std::string::npos);

  // multi-worker execution produces the same logs in the same order
  EvalProtocol par = protocol;
  par.workers = 3;
  const auto plogs = run_protocol(runner, par);
  REQUIRE(plogs.size() == 3);
  for (int e = 0; e < 3; ++e) {
    CHECK(plogs[e].steps.size() == logs[e].steps.size());
    CHECK(plogs[e].duration == logs[e].duration);
  }
}
