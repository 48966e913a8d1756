#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "climbsim/env.hpp"
#include "climbsim/eval.hpp"
#include "climbsim/policy.hpp"
#include "climbsim/ppo.hpp"

namespace climbsim {

struct TrainConfig {
  int iterations = 350;
  int num_envs = 16;
  double curriculum_scale = 1.0;
  bool flat_only = false;        // hold the flat-ground segment (smoke runs)
  bool phase1_adhesion = true;   // magnetic forces during the flat segment
  uint64_t seed = 0;
  AblationVariant ablation = AblationVariant::Full;
  int checkpoint_every = 100;
  std::string out_dir;           // empty = no files written
  bool verbose = false;
  std::vector<int> policy_hidden{256, 128, 64};
  std::vector<int> estimator_hidden{256, 128};
  PpoConfig ppo;
  EnvConfig env;
};

struct IterationRow {
  int iter = 0;
  double mean_reward = 0;    // mean per-step total reward
  double success_rate = 0;   // completed episodes / finished episodes
  double theta = 0;
  double prob_attach = 1.0;
  double kappa = 1.0;
  double policy_loss = 0, value_loss = 0, estimator_loss = 0;
};

struct TrainResult {
  Networks nets;
  std::vector<IterationRow> curves;
};

inline std::string curves_to_text(const std::vector<IterationRow>& rows,
                                  uint64_t config_hash) {
  std::ostringstream os;
  char head[128];
  std::snprintf(head, sizeof(head), "# climbsim-curves v1 config=%016llx\n",
                static_cast<unsigned long long>(config_hash));
  os << head;
  os << "iter\tmean_reward\tsuccess_rate\ttheta\tprob_attach\tkappa\t"
        "policy_loss\tvalue_loss\testimator_loss\n";
  os.precision(10);
  for (const auto& r : rows) {
    os << r.iter << '\t' << r.mean_reward << '\t' << r.success_rate << '\t'
       << r.theta << '\t' << r.prob_attach << '\t' << r.kappa << '\t'
       << r.policy_loss << '\t' << r.value_loss << '\t' << r.estimator_loss
       << '\n';
  }
  return os.str();
}

/// PPO training over a pool of environment instances with the three-phase
/// curriculum. Fully deterministic for a fixed config and seed.
inline TrainResult train(const TrainConfig& cfg, uint64_t config_hash = 0) {
  Rng master(cfg.seed);
  Rng net_rng = master.split(1);
  Rng update_rng = master.split(2);

  TrainResult result;
  result.nets =
      Networks::make(cfg.env.model, net_rng, cfg.policy_hidden, cfg.estimator_hidden);
  Networks& nets = result.nets;
  PpoOptimizers opt = PpoOptimizers::make(nets, cfg.ppo);

  struct Slot {
    ClimbEnv env;
    VecX obs, est_in;
    EstimatorOutput est;
    uint64_t episode_counter = 0;
    double ep_reward = 0;
    int ep_steps = 0;
    explicit Slot(const EnvConfig& c) : env(c) {}
  };

  EnvConfig env_cfg = cfg.env;
  env_cfg.ablation = cfg.ablation;
  std::vector<Slot> slots;
  slots.reserve(cfg.num_envs);
  for (int i = 0; i < cfg.num_envs; ++i) slots.emplace_back(env_cfg);

  auto apply_schedule = [&](int iter) {
    CurriculumState s =
        CurriculumState::at(iter, cfg.curriculum_scale, cfg.phase1_adhesion);
    if (cfg.flat_only) {
      s.theta = 0.0;
      s.gravity = Vec3(0, 0, -9.81);
      s.prob_attach = 1.0;
      s.adhesion_enabled = false;
    }
    for (auto& slot : slots) slot.env.set_schedule(s);
    return s;
  };

  auto refresh = [&](Slot& s) {
    s.est_in = s.env.estimator_input();
    s.est = nets.estimate(s.est_in);
    s.obs = s.env.observation(s.est);
  };

  auto reset_slot = [&](Slot& s, int env_idx) {
    const uint64_t seed =
        cfg.seed * 0x9E3779B97F4A7C15ULL + env_idx * 7919ULL + s.episode_counter;
    s.env.reset(seed);
    s.episode_counter++;
    s.ep_reward = 0;
    s.ep_steps = 0;
    refresh(s);
  };

  for (int i = 0; i < cfg.num_envs; ++i) reset_slot(slots[i], i);

  std::ofstream curves_stream;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
  }

  int episodes_done = 0, episodes_success = 0;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const CurriculumState sched = apply_schedule(iter);

    TrainingBatch batch;
    const int T = cfg.ppo.rollout_steps;
    std::vector<std::vector<double>> env_rewards(cfg.num_envs),
        env_values(cfg.num_envs);
    std::vector<std::vector<int>> env_dones(cfg.num_envs);
    double reward_sum = 0;
    long reward_count = 0;
    episodes_done = 0;
    episodes_success = 0;

    for (int e = 0; e < cfg.num_envs; ++e) {
      Slot& s = slots[e];
      for (int t = 0; t < T; ++t) {
        const GaussianSample a = nets.sample_action(s.obs, update_rng);
        batch.observations.push_back(s.obs);
        batch.actions.push_back(a.action);
        batch.log_probs.push_back(a.log_prob);
        batch.estimator_inputs.push_back(s.est_in);
        batch.privileged_labels.push_back(s.env.privileged_labels());
        env_values[e].push_back(nets.value(s.obs));

        const StepResult r = s.env.step(a.action, s.est.contact_prob);
        env_rewards[e].push_back(r.reward);
        env_dones[e].push_back(r.done ? 1 : 0);
        reward_sum += r.reward;
        ++reward_count;
        s.ep_reward += r.reward;
        s.ep_steps++;
        if (r.done) {
          ++episodes_done;
          if (r.cause == TerminationCause::None) ++episodes_success;
          reset_slot(s, e);
        } else {
          refresh(s);
        }
      }
      env_values[e].push_back(nets.value(s.obs));  // bootstrap
    }

    // GAE per environment segment, then concatenate in env order
    for (int e = 0; e < cfg.num_envs; ++e) {
      std::vector<double> adv, vt;
      gae(env_rewards[e], env_values[e], env_dones[e], cfg.ppo.gamma,
          cfg.ppo.gae_lambda, &adv, &vt);
      batch.rewards.insert(batch.rewards.end(), env_rewards[e].begin(),
                           env_rewards[e].end());
      batch.advantages.insert(batch.advantages.end(), adv.begin(), adv.end());
      batch.value_targets.insert(batch.value_targets.end(), vt.begin(), vt.end());
    }

    const PpoStats stats = ppo_update(batch, cfg.ppo, nets, opt, update_rng);

    IterationRow row;
    row.iter = iter;
    row.mean_reward = reward_count ? reward_sum / reward_count : 0;
    row.success_rate =
        episodes_done ? static_cast<double>(episodes_success) / episodes_done : 1.0;
    row.theta = slots.front().env.schedule().theta;
    row.prob_attach = slots.front().env.schedule().prob_attach;
    row.kappa = sched.kappa;
    row.policy_loss = stats.policy_loss;
    row.value_loss = stats.value_loss;
    row.estimator_loss = stats.estimator_loss;
    result.curves.push_back(row);

    if (cfg.verbose && iter % 10 == 0) {
      std::cerr << "iter " << iter << " reward " << row.mean_reward << " theta "
                << row.theta << " prob " << row.prob_attach << "\n";
    }
    if (!cfg.out_dir.empty() && cfg.checkpoint_every > 0 &&
        (iter + 1) % cfg.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "checkpoint_%06d.bin", iter + 1);
      save_checkpoint(nets, cfg.out_dir + "/" + name, config_hash);
    }
  }

  if (!cfg.out_dir.empty()) {
    std::ofstream curves(cfg.out_dir + "/curves.tsv");
    curves << curves_to_text(result.curves, config_hash);
    save_checkpoint(nets, cfg.out_dir + "/checkpoint_final.bin", config_hash);
  }
  return result;
}

}  // namespace climbsim
