#include <doctest.h>

#include <sstream>

#include "climbsim/mlp.hpp"

using namespace climbsim;

namespace {

// scalar loss 0.5 * ||y - target||^2 for finite differences
double loss_of(Mlp& net, const VecX& x, const VecX& target) {
  const VecX y = net.predict(x);
  return 0.5 * (y - target).squaredNorm();
}

}  // namespace

TEST_CASE("backprop matches central finite differences") {
  Rng rng(1);
  Mlp net(3, {5, 4}, 2);
  net.init(rng, 1.0, 0.5);
  const VecX x = rng.normal_vec(3);
  const VecX target = rng.normal_vec(2);

  net.zero_grad();
  const VecX y = net.forward(x);
  const VecX din = net.backward(y - target);
  const VecX analytic = net.get_grads();

  const VecX p0 = net.get_params();
  const double h = 1e-6;
  for (int k = 0; k < p0.size(); ++k) {
    VecX p = p0;
    p[k] = p0[k] + h;
    net.set_params(p);
    const double lp = loss_of(net, x, target);
    p[k] = p0[k] - h;
    net.set_params(p);
    const double lm = loss_of(net, x, target);
    const double fd = (lp - lm) / (2 * h);
    CHECK(std::abs(analytic[k] - fd) <
          1e-6 * std::max(1.0, std::abs(fd)));
  }
  net.set_params(p0);

  // input gradient too
  for (int k = 0; k < 3; ++k) {
    VecX xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const double fd = (loss_of(net, xp, target) - loss_of(net, xm, target)) / (2 * h);
    CHECK(std::abs(din[k] - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("gradients accumulate across samples") {
  Rng rng(2);
  Mlp net(2, {3}, 1);
  net.init(rng, 1.0, 1.0);
  const VecX x1 = rng.normal_vec(2), x2 = rng.normal_vec(2);

  net.zero_grad();
  net.forward(x1);
  net.backward(VecX::Ones(1));
  const VecX g1 = net.get_grads();
  net.zero_grad();
  net.forward(x2);
  net.backward(VecX::Ones(1));
  const VecX g2 = net.get_grads();
  net.zero_grad();
  net.forward(x1);
  net.backward(VecX::Ones(1));
  net.forward(x2);
  net.backward(VecX::Ones(1));
  CHECK((net.get_grads() - (g1 + g2)).norm() < 1e-12);
}

TEST_CASE("orthogonal init has orthonormal columns and zero biases") {
  Rng rng(3);
  Mlp net(4, {8}, 2);
  net.init(rng, 1.0, 0.01);
  // reconstruct the first weight matrix from the flat parameter vector
  const VecX p = net.get_params();
  MatX W(8, 4);
  for (int i = 0; i < 32; ++i) W.data()[i] = p[i];
  const MatX gram = W.transpose() * W;
  CHECK((gram - MatX::Identity(4, 4)).norm() < 1e-10);
  for (int i = 0; i < 8; ++i) CHECK(p[32 + i] == 0.0);  // biases
}

TEST_CASE("predict agrees with forward and leaves the cache untouched") {
  Rng rng(4);
  Mlp net(3, {6, 5}, 2);
  net.init(rng, 1.0, 1.0);
  const VecX x = rng.normal_vec(3);
  const VecX a = net.forward(x);
  const VecX b = net.predict(rng.normal_vec(3));
  (void)b;
  // backward still refers to the forward() input
  net.zero_grad();
  net.backward(VecX::Ones(2));
  const VecX g1 = net.get_grads();
  net.zero_grad();
  net.forward(x);
  net.backward(VecX::Ones(2));
  CHECK((net.get_grads() - g1).norm() == 0.0);
  CHECK((a - net.predict(x)).norm() == 0.0);
}

TEST_CASE("save/load round trip is bit exact") {
  Rng rng(5);
  Mlp net(7, {9, 4}, 3);
  net.init(rng, 1.0, 0.3);
  std::stringstream ss;
  net.save(ss);
  Mlp other;
  other.load(ss);
  CHECK(other.param_count() == net.param_count());
  CHECK((other.get_params() - net.get_params()).norm() == 0.0);
  const VecX x = rng.normal_vec(7);
  CHECK((other.predict(x) - net.predict(x)).norm() == 0.0);
}

TEST_CASE("input size mismatch is a hard error") {
  Mlp net(3, {4}, 1);
  CHECK_THROWS_AS(net.forward(VecX::Zero(5)), std::invalid_argument);
}

TEST_CASE("Adam first step approximates a signed step") {
  Adam opt(2, 0.01);
  VecX p = VecX::Zero(2), g(2);
  g << 4.0, -0.5;
  p = opt.update(p, g);
  CHECK(p[0] == doctest::Approx(-0.01).epsilon(1e-5));
  CHECK(p[1] == doctest::Approx(0.01).epsilon(1e-5));
}

TEST_CASE("global norm clipping") {
  VecX g(2);
  g << 3.0, 4.0;
  CHECK((clip_by_global_norm(g, 10.0) - g).norm() == 0.0);
  const VecX c = clip_by_global_norm(g, 1.0);
  CHECK(c.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c[0] / c[1] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(clip_by_global_norm(VecX::Zero(2), 1.0).norm() == 0.0);
}
