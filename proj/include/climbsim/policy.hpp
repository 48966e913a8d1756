#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include "climbsim/mlp.hpp"
#include "climbsim/model.hpp"
#include "climbsim/observation.hpp"

namespace climbsim {

constexpr int kActionDim = 16;  // 12 joint targets + 4 magnet activations
constexpr double kHalfLog2Pi = 0.91893853320467274178;

/// Fixed shift/scale applied to observations before the networks. Joint
/// channels are centered on the nominal configuration; velocity channels
/// are compressed to O(1).
struct ObsNormalizer {
  VecX shift = VecX::Zero(kObsDim);
  VecX scale = VecX::Ones(kObsDim);

  static ObsNormalizer standard(const RobotModel& m) {
    ObsNormalizer n;
    const VecX q0 = m.nominal_joint_config();
    n.shift.segment(0, 12) = q0;
    n.scale.segment(12, 12).setConstant(0.05);
    n.shift.segment(24, 12) = q0;
    n.shift.segment(36, 12) = q0;
    n.scale.segment(51, 3).setConstant(0.25);
    n.scale.segment(66, 3).setConstant(0.5);
    n.scale.segment(69, 4).setConstant(5.0);
    return n;
  }

  VecX apply(const VecX& obs) const {
    return (obs - shift).cwiseProduct(scale);
  }
};

/// Diagonal-Gaussian policy head over the actor MLP.
struct GaussianSample {
  VecX action;
  double log_prob;
};

inline double gaussian_log_prob(const VecX& action, const VecX& mean,
                                const VecX& log_std) {
  double lp = 0;
  for (int i = 0; i < action.size(); ++i) {
    const double s = std::exp(log_std[i]);
    const double z = (action[i] - mean[i]) / s;
    lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
  }
  return lp;
}

inline double gaussian_entropy(const VecX& log_std) {
  return log_std.sum() + log_std.size() * (0.5 + kHalfLog2Pi);
}

struct Networks {
  Mlp actor;      // obs -> 16 action means
  Mlp critic;     // obs -> value
  Mlp estimator;  // obs subset -> base vel + foot heights + contact logits
  VecX log_std = VecX::Constant(kActionDim, std::log(0.25));
  ObsNormalizer norm;

  static Networks make(const RobotModel& model, Rng& rng,
                       const std::vector<int>& policy_hidden = {256, 128, 64},
                       const std::vector<int>& estimator_hidden = {256, 128}) {
    Networks n;
    n.actor = Mlp(kObsDim, policy_hidden, kActionDim);
    n.critic = Mlp(kObsDim, policy_hidden, 1);
    n.estimator = Mlp(kEstimatorInputDim, estimator_hidden, kEstimatorOutputDim);
    n.actor.init(rng, 1.0, 0.01);
    n.critic.init(rng, 1.0, 1.0);
    n.estimator.init(rng, 1.0, 0.1);
    n.norm = ObsNormalizer::standard(model);
    return n;
  }

  VecX actor_mean(const VecX& obs) const {
    if (!obs.allFinite()) throw std::invalid_argument("actor: non-finite observation");
    return actor.predict(norm.apply(obs));
  }

  GaussianSample sample_action(const VecX& obs, Rng& rng) const {
    const VecX mean = actor_mean(obs);
    VecX a(kActionDim);
    for (int i = 0; i < kActionDim; ++i)
      a[i] = mean[i] + std::exp(log_std[i]) * rng.normal();
    return {a, gaussian_log_prob(a, mean, log_std)};
  }

  double value(const VecX& obs) const { return critic.predict(norm.apply(obs))[0]; }

  /// Estimator forward; contact head squashed to [0,1].
  EstimatorOutput estimate(const VecX& estimator_in) const {
    const VecX y = estimator.predict(estimator_in);
    EstimatorOutput out;
    out.base_lin_vel = y.segment<3>(0);
    out.foot_heights = y.segment<4>(3);
    for (int i = 0; i < 4; ++i)
      out.contact_prob[i] = 1.0 / (1.0 + std::exp(-y[7 + i]));
    return out;
  }
};

constexpr uint64_t kCheckpointMagic = 0x4353434B50543031ULL;  // "CSCKPT01"

inline void save_checkpoint(const Networks& nets, const std::string& path,
                            uint64_t config_hash) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path);
  os.write(reinterpret_cast<const char*>(&kCheckpointMagic), sizeof(kCheckpointMagic));
  os.write(reinterpret_cast<const char*>(&config_hash), sizeof(config_hash));
  const uint64_t n_std = nets.log_std.size();
  os.write(reinterpret_cast<const char*>(&n_std), sizeof(n_std));
  os.write(reinterpret_cast<const char*>(nets.log_std.data()),
           static_cast<std::streamsize>(sizeof(double) * n_std));
  nets.actor.save(os);
  nets.critic.save(os);
  nets.estimator.save(os);
  os.write(reinterpret_cast<const char*>(nets.norm.shift.data()),
           sizeof(double) * kObsDim);
  os.write(reinterpret_cast<const char*>(nets.norm.scale.data()),
           sizeof(double) * kObsDim);
}

inline Networks load_checkpoint(const std::string& path,
                                uint64_t* config_hash_out = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path);
  uint64_t magic = 0, hash = 0, n_std = 0;
  is.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  if (magic != kCheckpointMagic)
    throw std::runtime_error("not a checkpoint file: " + path);
  is.read(reinterpret_cast<char*>(&hash), sizeof(hash));
  is.read(reinterpret_cast<char*>(&n_std), sizeof(n_std));
  Networks nets;
  nets.log_std.resize(static_cast<int>(n_std));
  is.read(reinterpret_cast<char*>(nets.log_std.data()),
          static_cast<std::streamsize>(sizeof(double) * n_std));
  nets.actor.load(is);
  nets.critic.load(is);
  nets.estimator.load(is);
  is.read(reinterpret_cast<char*>(nets.norm.shift.data()), sizeof(double) * kObsDim);
  is.read(reinterpret_cast<char*>(nets.norm.scale.data()), sizeof(double) * kObsDim);
  if (config_hash_out) *config_hash_out = hash;
  return nets;
}

}  // namespace climbsim
