#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "climbsim/math.hpp"
#include "climbsim/rng.hpp"

namespace climbsim {

/// Plain fully-connected network: tanh hidden layers, linear output.
/// Forward caches activations so backward() can produce exact gradients;
/// everything is double precision so finite-difference checks are tight.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int input_dim, const std::vector<int>& hidden, int output_dim)
      : input_dim_(input_dim) {
    int prev = input_dim;
    for (int h : hidden) {
      W_.emplace_back(MatX::Zero(h, prev));
      b_.emplace_back(VecX::Zero(h));
      prev = h;
    }
    W_.emplace_back(MatX::Zero(output_dim, prev));
    b_.emplace_back(VecX::Zero(output_dim));
    gW_.resize(W_.size());
    gb_.resize(b_.size());
    zero_grad();
  }

  /// Orthogonal init with gain on hidden layers and a small final-layer scale.
  void init(Rng& rng, double hidden_gain = 1.0, double final_scale = 0.01) {
    for (size_t l = 0; l < W_.size(); ++l) {
      MatX g(W_[l].rows(), W_[l].cols());
      for (int i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
      Eigen::HouseholderQR<MatX> qr(g);
      MatX Q = qr.householderQ() * MatX::Identity(g.rows(), g.cols());
      const double gain = (l + 1 == W_.size()) ? final_scale : hidden_gain;
      W_[l] = gain * Q.topLeftCorner(W_[l].rows(), W_[l].cols());
      b_[l].setZero();
    }
  }

  VecX forward(const VecX& x) {
    if (x.size() != input_dim_) throw std::invalid_argument("Mlp: bad input size");
    acts_.assign(1, x);
    VecX h = x;
    for (size_t l = 0; l + 1 < W_.size(); ++l) {
      h = (W_[l] * h + b_[l]).array().tanh().matrix();
      acts_.push_back(h);
    }
    return W_.back() * h + b_.back();
  }

  /// Inference without touching the cache (usable const / concurrently).
  VecX predict(const VecX& x) const {
    VecX h = x;
    for (size_t l = 0; l + 1 < W_.size(); ++l)
      h = (W_[l] * h + b_[l]).array().tanh().matrix();
    return W_.back() * h + b_.back();
  }

  /// Accumulates parameter gradients for the last forward() call and
  /// returns dL/dinput.
  VecX backward(const VecX& dL_dy) {
    VecX delta = dL_dy;
    for (int l = static_cast<int>(W_.size()) - 1; l >= 0; --l) {
      gW_[l] += delta * acts_[l].transpose();
      gb_[l] += delta;
      if (l > 0) {
        VecX da = W_[l].transpose() * delta;
        // tanh' = 1 - tanh^2, acts_[l] holds the post-activation values
        delta = da.cwiseProduct(
            (1.0 - acts_[l].array().square()).matrix());
      } else {
        delta = W_[0].transpose() * delta;
      }
    }
    return delta;
  }

  void zero_grad() {
    for (size_t l = 0; l < W_.size(); ++l) {
      gW_[l] = MatX::Zero(W_[l].rows(), W_[l].cols());
      gb_[l] = VecX::Zero(b_[l].size());
    }
  }

  int param_count() const {
    int n = 0;
    for (size_t l = 0; l < W_.size(); ++l)
      n += static_cast<int>(W_[l].size() + b_[l].size());
    return n;
  }

  VecX get_params() const {
    VecX p(param_count());
    int k = 0;
    for (size_t l = 0; l < W_.size(); ++l) {
      for (int i = 0; i < W_[l].size(); ++i) p[k++] = W_[l].data()[i];
      for (int i = 0; i < b_[l].size(); ++i) p[k++] = b_[l][i];
    }
    return p;
  }

  void set_params(const VecX& p) {
    int k = 0;
    for (size_t l = 0; l < W_.size(); ++l) {
      for (int i = 0; i < W_[l].size(); ++i) W_[l].data()[i] = p[k++];
      for (int i = 0; i < b_[l].size(); ++i) b_[l][i] = p[k++];
    }
  }

  VecX get_grads() const {
    VecX g(param_count());
    int k = 0;
    for (size_t l = 0; l < W_.size(); ++l) {
      for (int i = 0; i < gW_[l].size(); ++i) g[k++] = gW_[l].data()[i];
      for (int i = 0; i < gb_[l].size(); ++i) g[k++] = gb_[l][i];
    }
    return g;
  }

  int input_dim() const { return input_dim_; }
  int output_dim() const { return static_cast<int>(b_.back().size()); }

  void save(std::ostream& os) const {
    const uint64_t layers = W_.size();
    os.write(reinterpret_cast<const char*>(&layers), sizeof(layers));
    for (size_t l = 0; l < W_.size(); ++l) {
      const uint64_t rows = W_[l].rows(), cols = W_[l].cols();
      os.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
      os.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
      os.write(reinterpret_cast<const char*>(W_[l].data()),
               static_cast<std::streamsize>(sizeof(double) * W_[l].size()));
      os.write(reinterpret_cast<const char*>(b_[l].data()),
               static_cast<std::streamsize>(sizeof(double) * b_[l].size()));
    }
  }

  void load(std::istream& is) {
    uint64_t layers = 0;
    is.read(reinterpret_cast<char*>(&layers), sizeof(layers));
    W_.resize(layers);
    b_.resize(layers);
    for (size_t l = 0; l < layers; ++l) {
      uint64_t rows = 0, cols = 0;
      is.read(reinterpret_cast<char*>(&rows), sizeof(rows));
      is.read(reinterpret_cast<char*>(&cols), sizeof(cols));
      W_[l].resize(static_cast<int>(rows), static_cast<int>(cols));
      b_[l].resize(static_cast<int>(rows));
      is.read(reinterpret_cast<char*>(W_[l].data()),
              static_cast<std::streamsize>(sizeof(double) * W_[l].size()));
      is.read(reinterpret_cast<char*>(b_[l].data()),
              static_cast<std::streamsize>(sizeof(double) * b_[l].size()));
    }
    input_dim_ = static_cast<int>(W_.front().cols());
    gW_.resize(W_.size());
    gb_.resize(b_.size());
    zero_grad();
  }

 private:
  int input_dim_ = 0;
  std::vector<MatX> W_, gW_;
  std::vector<VecX> b_, gb_;
  std::vector<VecX> acts_;
};

/// Adam on a flat parameter vector.
class Adam {
 public:
  explicit Adam(int n = 0, double lr = 3e-4, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(VecX::Zero(n)), v_(VecX::Zero(n)) {}

  VecX update(const VecX& params, const VecX& grads) {
    ++t_;
    m_ = beta1_ * m_ + (1 - beta1_) * grads;
    v_ = beta2_ * v_ + (1 - beta2_) * grads.cwiseProduct(grads);
    const double bc1 = 1 - std::pow(beta1_, t_);
    const double bc2 = 1 - std::pow(beta2_, t_);
    const VecX mh = m_ / bc1;
    const VecX vh = v_ / bc2;
    return params -
           lr_ * mh.cwiseQuotient((vh.cwiseSqrt().array() + eps_).matrix());
  }

  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  VecX m_, v_;
};

/// Global-norm gradient clipping.
inline VecX clip_by_global_norm(const VecX& g, double max_norm) {
  const double n = g.norm();
  if (n <= max_norm || n == 0.0) return g;
  return g * (max_norm / n);
}

}  // namespace climbsim
