#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(CLIMBSIM_BIN) + " " + args;
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("climbsim_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("version and usage errors") {
  CHECK(run("--version > /dev/null") == 0);
  CHECK(run("definitely-not-a-command > /dev/null 2>&1") != 0);
  // eval needs a policy source
  CHECK(run("eval --episodes 1 > /dev/null 2>&1") == 1);
}

TEST_CASE("inspect-schedules emits the anchor rows") {
  const fs::path dir = temp_dir("inspect");
  const fs::path out = dir / "sched.tsv";
  CHECK(run("inspect-schedules --t-max 35000 --step 1750 --out " +
            out.string() + " > /dev/null") == 0);
  const std::string text = slurp(out);
  CHECK(text.find("theta") != std::string::npos);
  CHECK(text.find("35000") != std::string::npos);
  // final row is fully ramped: theta = pi/2, prob = 0.85
  CHECK(text.find("0.85") != std::string::npos);
  CHECK(text.find("1.570796326") != std::string::npos);
}

TEST_CASE("train, eval, and replay round trip") {
  const fs::path dir = temp_dir("roundtrip");
  const fs::path train_dir = dir / "train";
  CHECK(run("train --iterations 3 --envs 2 --scale 0.01 --flat-only --seed 1 --out " +
            train_dir.string() + " > /dev/null") == 0);
  CHECK(fs::exists(train_dir / "curves.tsv"));
  CHECK(fs::exists(train_dir / "checkpoint_final.bin"));
  CHECK(fs::exists(train_dir / "config.txt"));
  {
    const std::string curves = slurp(train_dir / "curves.tsv");
    CHECK(curves.find("config=") != std::string::npos);
    CHECK(curves.find("mean_reward") != std::string::npos);
  }

  const fs::path eval_dir = dir / "eval";
  CHECK(run("eval --baseline-scripted --episodes 2 --horizon 1.5 --seed 3 --out " +
            eval_dir.string() + " > /dev/null") == 0);
  CHECK(fs::exists(eval_dir / "metrics.txt"));
  CHECK(fs::exists(eval_dir / "metrics.tsv"));
  CHECK(fs::exists(eval_dir / "episodes" / "ep_p100_0000.log"));
  CHECK(slurp(eval_dir / "metrics.txt").find("config=") != std::string::npos);

  // replay recomputes metrics from the stored logs
  const fs::path replay_out = dir / "replay.txt";
  CHECK(run("replay " + (eval_dir / "episodes" / "ep_p100_0000.log").string() +
            " " + (eval_dir / "episodes" / "ep_p100_0001.log").string() + " > " +
            replay_out.string()) == 0);
  CHECK(slurp(replay_out).find("retention") != std::string::npos);

  // evaluating the fresh checkpoint exercises the policy path
  const fs::path eval2 = dir / "eval_policy";
  CHECK(run("eval --checkpoint " + (train_dir / "checkpoint_final.bin").string() +
            " --episodes 1 --horizon 1.0 --seed 4 --out " + eval2.string() +
            " > /dev/null") == 0);
  CHECK(fs::exists(eval2 / "metrics.txt"));

  // missing checkpoint file is an operational error (exit 2)
  CHECK(run("eval --checkpoint /nonexistent.bin --episodes 1 --out " +
            (dir / "x").string() + " > /dev/null 2>&1") == 2);
}
