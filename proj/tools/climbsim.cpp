// Command-line front end: training, evaluation, schedule inspection and
// log replay. Every subcommand is reproducible from (config, flags, seed).

#include <cinttypes>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "climbsim/config.hpp"
#include "climbsim/curriculum.hpp"
#include "climbsim/env.hpp"
#include "climbsim/eval.hpp"
#include "climbsim/log.hpp"
#include "climbsim/metrics.hpp"
#include "climbsim/trainer.hpp"

namespace fs = std::filesystem;
using namespace climbsim;

namespace {

constexpr const char* kVersion = "climbsim 1.0";

std::string hash_header(uint64_t hash) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "# %s config=%016" PRIx64 "\n", kVersion, hash);
  return buf;
}

int cmd_train(const Config& file_cfg, uint64_t seed, const std::string& out_dir,
              double scale, const std::string& ablation, int iterations,
              int envs, bool flat_only, bool verbose) {
  Config cfg = file_cfg;
  cfg.set("run.command", std::string("train"));
  cfg.set("run.seed", static_cast<double>(seed));
  cfg.set("run.scale", scale);
  cfg.set("run.ablation", ablation);
  cfg.set("run.iterations", static_cast<double>(iterations));
  cfg.set("run.envs", static_cast<double>(envs));
  cfg.set("run.flat_only", flat_only ? "1" : "0");
  const uint64_t hash = cfg.hash();

  TrainConfig tc;
  tc.iterations = iterations;
  tc.num_envs = envs;
  tc.curriculum_scale = scale;
  tc.flat_only = flat_only;
  tc.phase1_adhesion = cfg.get_bool("curriculum.phase1_adhesion", true);
  tc.seed = seed;
  tc.ablation = ablation_from_name(ablation);
  tc.checkpoint_every = cfg.get_int("train.checkpoint_every", 100);
  tc.out_dir = out_dir;
  tc.verbose = verbose;
  tc.ppo = PpoConfig::from_config(cfg);
  tc.env = EnvConfig::from_config(cfg);

  fs::create_directories(out_dir);
  cfg.save(out_dir + "/config.txt");
  train(tc, hash);
  std::cout << "training complete; curves and checkpoints in " << out_dir << "\n";
  return 0;
}

int cmd_eval(const Config& file_cfg, const std::string& checkpoint,
             bool scripted, uint64_t seed, const std::string& out_dir,
             int episodes, double horizon, std::vector<double> probs,
             std::vector<double> windows, bool perfect_alignment, int workers) {
  Config cfg = file_cfg;
  cfg.set("run.command", std::string("eval"));
  cfg.set("run.seed", static_cast<double>(seed));
  cfg.set("run.episodes", static_cast<double>(episodes));
  const uint64_t hash = cfg.hash();

  EnvConfig env_cfg = EnvConfig::from_config(cfg);
  Networks nets;
  if (!scripted) nets = load_checkpoint(checkpoint);

  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/episodes");
  cfg.save(out_dir + "/config.txt");

  std::ofstream report(out_dir + "/metrics.txt");
  std::ofstream report_tsv(out_dir + "/metrics.tsv");
  report << hash_header(hash);
  report_tsv << hash_header(hash);
  if (episodes != 100 || horizon != 10.0)
    report << "# sub-protocol: episodes=" << episodes << " horizon=" << horizon
           << "\n";

  for (double prob : probs) {
    EvalProtocol protocol;
    protocol.episodes = episodes;
    protocol.horizon = horizon;
    protocol.prob_attach = prob;
    protocol.perfect_alignment = perfect_alignment;
    protocol.base_seed = seed;
    protocol.recovery_windows = windows;
    protocol.workers = workers;

    auto runner = [&](uint64_t ep_seed, int) {
      if (scripted) return scripted_crawl_baseline(env_cfg, protocol, ep_seed);
      return run_episode(policy_controller(nets), env_cfg, protocol, ep_seed);
    };
    const std::vector<EpisodeLog> logs = run_protocol(runner, protocol);
    for (size_t e = 0; e < logs.size(); ++e) {
      char name[64];
      std::snprintf(name, sizeof(name), "ep_p%03d_%04zu.log",
                    static_cast<int>(prob * 100), e);
      save_episode_log(logs[e], out_dir + "/episodes/" + name, hash);
    }
    const MetricsReport rep = compute_metrics(logs, windows);
    report << "\n" << format_report(rep);
    report_tsv << format_report(rep, true);
    std::cout << format_report(rep) << "\n";
  }
  std::cout << "metrics written to " << out_dir << "\n";
  return 0;
}

int cmd_inspect(double t_max, double step, double scale, const std::string& out) {
  std::ostringstream os;
  os << "t\ttheta\tprob_attach\tkappa\tphase\n";
  os.precision(12);
  for (double t = 0; t <= t_max + 1e-9; t += step) {
    os << t << '\t' << curriculum::theta_of(t, scale) << '\t'
       << curriculum::prob_attach_of(t, scale) << '\t'
       << curriculum::kappa_of(t, scale) << '\t' << curriculum::phase_of(t, scale)
       << '\n';
  }
  if (out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(out);
    f << os.str();
    std::cout << "schedule table written to " << out << "\n";
  }
  return 0;
}

int cmd_replay(const std::vector<std::string>& paths,
               const std::vector<double>& windows) {
  std::vector<EpisodeLog> logs;
  for (const auto& p : paths) logs.push_back(load_episode_log(p));
  const MetricsReport rep = compute_metrics(logs, windows);
  std::cout << format_report(rep);
  std::cout << format_report(rep, true);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadruped magnetic wall-climbing: training and evaluation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir = "run_out", checkpoint, ablation = "full";
  uint64_t seed = 0;
  double scale = 1.0, horizon = 10.0;
  int iterations = 350, envs = 16, episodes = 100, workers = 1;
  bool flat_only = false, verbose = false, scripted = false,
       perfect_alignment = false;
  std::vector<double> probs{1.0}, windows{1.2, 2.4, 3.6};
  std::vector<std::string> replay_paths;
  double t_max = 40000, t_step = 100;
  std::string inspect_out;

  auto* tr = app.add_subcommand("train", "Train a climbing policy");
  tr->add_option("--config", config_path, "config file (key = value with [sections])");
  tr->add_option("--seed", seed, "master seed");
  tr->add_option("--out", out_dir, "output directory");
  tr->add_option("--scale", scale, "curriculum scale factor in (0, 1]")
      ->check(CLI::Range(1e-6, 1.0));
  tr->add_option("--ablation", ablation, "full | no-curriculum | no-probabilistic | no-modeling");
  tr->add_option("--iterations", iterations, "training iterations");
  tr->add_option("--envs", envs, "environment instances");
  tr->add_flag("--flat-only", flat_only, "hold the flat-ground segment");
  tr->add_flag("--verbose", verbose, "progress to stderr");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint or the scripted baseline");
  ev->add_option("--config", config_path);
  ev->add_option("--checkpoint", checkpoint, "policy checkpoint");
  ev->add_flag("--baseline-scripted", scripted, "use the open-loop crawl baseline");
  ev->add_option("--seed", seed);
  ev->add_option("--out", out_dir);
  ev->add_option("--episodes", episodes);
  ev->add_option("--horizon", horizon, "evaluation horizon (s)");
  ev->add_option("--prob", probs, "attachment probabilities to evaluate");
  ev->add_option("--dt", windows, "recovery windows (s)");
  ev->add_flag("--perfect-alignment", perfect_alignment);
  ev->add_option("--workers", workers);

  auto* in = app.add_subcommand("inspect-schedules", "Emit (t, theta, prob, kappa, phase) tables");
  in->add_option("--t-max", t_max);
  in->add_option("--step", t_step);
  in->add_option("--scale", scale)->check(CLI::Range(1e-6, 1.0));
  in->add_option("--out", inspect_out, "output file (default stdout)");

  auto* rp = app.add_subcommand("replay", "Recompute metrics from stored episode logs");
  rp->add_option("logs", replay_paths, "episode log files")->required();
  rp->add_option("--dt", windows);

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg;
    if (!config_path.empty()) cfg.load(config_path);
    if (tr->parsed())
      return cmd_train(cfg, seed, out_dir, scale, ablation, iterations, envs,
                       flat_only, verbose);
    if (ev->parsed()) {
      if (!scripted && checkpoint.empty()) {
        std::cerr << "eval: either --checkpoint or --baseline-scripted is required\n";
        return 1;
      }
      return cmd_eval(cfg, checkpoint, scripted, seed, out_dir, episodes,
                      horizon, probs, windows, perfect_alignment, workers);
    }
    if (in->parsed()) return cmd_inspect(t_max, t_step, scale, inspect_out);
    if (rp->parsed()) return cmd_replay(replay_paths, windows);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
