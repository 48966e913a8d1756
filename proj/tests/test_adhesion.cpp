#include <doctest.h>

#include <vector>

#include "climbsim/adhesion.hpp"

using namespace climbsim;

TEST_CASE("air-gap force anchors") {
  CHECK(airgap_force(0.0, 697.0) == 697.0);
  const double ratio = airgap_force(0.001, 697.0) / airgap_force(0.0, 697.0);
  CHECK(ratio == doctest::Approx(0.07).epsilon(1e-12));
  // monotone non-increasing over a fine grid
  double prev = airgap_force(0.0, 697.0);
  for (int k = 1; k <= 1000; ++k) {
    const double f = airgap_force(0.005 * k / 1000.0, 697.0);
    CHECK(f <= prev);
    prev = f;
  }
  CHECK(airgap_force(0.1, 697.0) > 0.0);  // strictly positive tail
}

// Independent oracle: evaluate the four conditions in the documented order
// with explicit short-circuiting, written without reference to the library.
static AttachDecision gate_oracle(const GateInputs& g, double tol) {
  bool recognized = g.contact_confidence >= 0.5;
  if (!recognized) return {false, GateReason::NoContactConf};
  bool commanded = g.magnet_action >= 0.5;
  if (!commanded) return {false, GateReason::MagnetOff};
  bool lucky = g.rng_draw <= g.prob_attach;
  if (!lucky) return {false, GateReason::StochasticFail};
  bool aligned = g.alignment_gap <= tol;
  if (!aligned) return {false, GateReason::Misaligned};
  if (!g.on_ferromagnetic) return {false, GateReason::NonFerromagnetic};
  return {true, GateReason::OK};
}

TEST_CASE("gate truth table matches the sequential oracle") {
  const double tol = 0.0005;
  for (double conf : {0.4, 0.5, 0.7})
    for (double act : {0.4, 0.5, 0.9})
      for (double draw : {0.1, 0.9})
        for (double gap : {0.0, 0.002})
          for (int ferro : {0, 1})
            for (double prob : {0.85, 1.0}) {
              GateInputs g;
              g.contact_confidence = conf;
              g.magnet_action = act;
              g.rng_draw = draw;
              g.alignment_gap = gap;
              g.on_ferromagnetic = ferro != 0;
              g.prob_attach = prob;
              const AttachDecision got = gate_adhesion(g, tol);
              const AttachDecision want = gate_oracle(g, tol);
              CAPTURE(conf);
              CAPTURE(act);
              CAPTURE(draw);
              CAPTURE(gap);
              CAPTURE(ferro);
              CAPTURE(prob);
              CHECK(got.attach == want.attach);
              CHECK(got.reason == want.reason);
            }
}

TEST_CASE("gate boundary semantics") {
  GateInputs g;
  g.contact_confidence = 0.5;  // thresholds are inclusive
  g.magnet_action = 0.5;
  g.alignment_gap = 0.0005;
  g.rng_draw = 0.85;
  g.prob_attach = 0.85;
  CHECK(gate_adhesion(g).attach);
}

TEST_CASE("stochastic draw persists across a stance") {
  Rng rng(3);
  FootGateState foot;
  const double d1 = foot.update(true, rng);  // swing -> contact: fresh draw
  for (int k = 0; k < 10; ++k) CHECK(foot.update(true, rng) == d1);
  foot.update(false, rng);                   // swing
  const double d2 = foot.update(true, rng);  // next stance: new draw
  CHECK(d2 != d1);
  CHECK(foot.update(true, rng) == d2);
}

TEST_CASE("EPM switching latency") {
  EpmFoot f;
  f.command(true, 0.0, 0.005);
  f.settle(0.004);
  CHECK_FALSE(f.epm_on);
  f.settle(0.005);
  CHECK(f.epm_on);

  // switching off also takes the latency; attachment releases on completion
  f.attached = true;
  f.command(false, 0.010, 0.005);
  f.settle(0.012);
  CHECK(f.epm_on);
  CHECK(f.attached);
  f.settle(0.015);
  CHECK_FALSE(f.epm_on);
  CHECK_FALSE(f.attached);
}

TEST_CASE("superseding command restarts the latency window") {
  EpmFoot f;
  f.epm_on = true;
  f.command(false, 0.0, 0.005);   // pending off at 0.005
  f.command(true, 0.003, 0.005);  // superseded: pending on at 0.008
  f.settle(0.006);
  CHECK(f.epm_on);  // the off never landed
  f.settle(0.008);
  CHECK(f.epm_on);
  CHECK(f.switch_pending_until < 0.0);

  // repeating the pending command does not restart the window
  EpmFoot g;
  g.command(true, 0.0, 0.005);
  g.command(true, 0.004, 0.005);
  g.settle(0.005);
  CHECK(g.epm_on);
}

TEST_CASE("holding force magnitude and shear cap") {
  AdhesionParams p;
  EpmFoot f;
  f.epm_on = true;
  const AttachDecision ok{true, GateReason::OK};
  const AttachDecision no{false, GateReason::Misaligned};
  const Vec3 n(0, 0, 1);

  CHECK(holding_force(f, no, 0.0, n).norm() == 0.0);
  EpmFoot off = f;
  off.epm_on = false;
  CHECK(holding_force(off, ok, 0.0, n).norm() == 0.0);

  const Vec3 pull = holding_force(f, ok, 0.0, n);
  CHECK(pull.z() == doctest::Approx(-697.0));

  // demanded shear below the cap passes through; above it saturates
  const double cap = p.mu_mag * airgap_force(0.001, p.max_force, p.gap_decay);
  const Vec3 small = holding_force(f, ok, 0.001, n, Vec3(0.5 * cap, 0, 0), p);
  CHECK(small.x() == doctest::Approx(0.5 * cap));
  const Vec3 big = holding_force(f, ok, 0.001, n, Vec3(10 * cap, 0, 0), p);
  CHECK(big.x() == doctest::Approx(cap));
}
