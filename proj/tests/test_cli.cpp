#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "fallcascade/cli/app.hpp"
#include "fallcascade/error.hpp"

using namespace fallcascade;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "fallcascade");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fallcascade_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::vector<std::string> small_run_flags() {
  return {"--fast",          "--set", "synth.total=660",  "--set", "synth.fall_fraction=0.25", "--set",
          "batch_bfc=64",    "--set", "epochs_bfc=8",     "--set", "epochs_mfec=10",           "--set",
          "cleaning.epochs=3"};
}

}  // namespace

TEST_CASE("config resolution") {
  const auto dir = scratch("config");
  write(dir / "empty.json", "{}");
  SUBCASE("empty file gives the full defaults") {
    const auto cfg = cli::resolve_config(dir / "empty.json", {});
    CHECK(cfg.train.learning_rate == 1e-4);
    CHECK(cfg.train.batch_bfc == 1024);
    CHECK(cfg.train.batch_mfec == 32);
    CHECK(cfg.train.epochs_bfc == 300);
    CHECK(cfg.train.epochs_mfec == 600);
    CHECK(cfg.train.m == 0.03);
    CHECK(cfg.train.n == 0.02);
    CHECK(cfg.train.head_weights == net::HeadWeights{0.25, 0.25, 0.5});
  }
  SUBCASE("overrides win over the file") {
    write(dir / "c.json", R"({"m": 0.1, "seed": 3, "synth": {"separation": 4}})");
    cli::Overrides o;
    o.sets = {"m=0", "n=0", "synth.noise_sigma=0.25"};
    o.seed = 12;
    const auto cfg = cli::resolve_config(dir / "c.json", o);
    CHECK(cfg.train.m == 0.0);
    CHECK(cfg.train.n == 0.0);
    CHECK(cfg.train.seed == 12);
    CHECK(cfg.synth.seed == 12);
    CHECK(cfg.synth.separation == 4.0);
    CHECK(cfg.synth.noise_sigma == 0.25);
  }
  SUBCASE("fast profile") {
    cli::Overrides o;
    o.fast = true;
    const auto cfg = cli::resolve_config(std::nullopt, o);
    CHECK(cfg.train.epochs_bfc == 30);
    CHECK(cfg.train.epochs_mfec == 60);
  }
  SUBCASE("invalid values") {
    cli::Overrides o;
    o.sets = {"m=0.6"};
    CHECK_THROWS_AS(cli::resolve_config(dir / "empty.json", o), ConfigError);
    write(dir / "broken.json", "{\"m\": ");
    CHECK_THROWS_AS(cli::resolve_config(dir / "broken.json", {}), ConfigError);
    o.sets = {"novalue"};
    CHECK_THROWS_AS(cli::resolve_config(std::nullopt, o), ConfigError);
  }
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit with 1") {
  const auto none = run({});
  CHECK(none.code == 1);
  CHECK(none.err.find("Usage") != std::string::npos);
  const auto missing = run({"pipeline", "--out", "somewhere"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("--config") != std::string::npos);
  CHECK(missing.err.find("Usage") != std::string::npos);
  CHECK(run({"predict", "--model", "x", "--input", "y", "--bogus"}).code == 1);
  CHECK(run({"train", "--out", "x"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("invalid config exits with 1 before touching data") {
  const auto dir = scratch("badcfg");
  write(dir / "cfg.json", R"({"m": 0.6})");
  const auto r = run({"pipeline", "--config", (dir / "cfg.json").string(), "--out", (dir / "run").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("[config]") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "run"));
  fs::remove_all(dir);
}

TEST_CASE("data errors exit with 2 and name the stage") {
  const auto dir = scratch("data");
  write(dir / "bad.csv", "camera_id,subject_id\n1,2\n");
  auto r = run({"prep", "--input", (dir / "bad.csv").string(), "--out", (dir / "o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("[prep]") != std::string::npos);
  r = run({"predict", "--model", (dir / "missing").string(), "--input", (dir / "bad.csv").string()});
  CHECK(r.code == 2);
  write(dir / "cfg.json", R"({"inputs": ["/nonexistent/file.csv"]})");
  r = run({"pipeline", "--config", (dir / "cfg.json").string(), "--out", (dir / "run").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("[load]") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("training errors exit with 3") {
  const auto dir = scratch("train");
  REQUIRE(run({"synth", "--set", "synth.total=300", "--out", (dir / "s").string()}).code == 0);
  // keep only no-fall rows
  std::istringstream in(slurp(dir / "s" / "dataset.csv"));
  std::ostringstream kept;
  std::string line;
  std::getline(in, line);
  kept << line << '\n';
  while (std::getline(in, line)) {
    if (line.substr(line.size() - 3) == ",-1") kept << line << '\n';
  }
  write(dir / "nofall.csv", kept.str());
  const auto r = run({"train-bfc", "--fast", "--input", (dir / "nofall.csv").string(), "--out", (dir / "m").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("[train_bfc]") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("pipeline, eval and predict") {
  const auto dir = scratch("e2e");
  write(dir / "cfg.json", "{}");
  auto args = std::vector<std::string>{"pipeline", "--config", (dir / "cfg.json").string(), "--out", (dir / "a").string()};
  const auto flags = small_run_flags();
  args.insert(args.end(), flags.begin(), flags.end());
  const auto r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"bfc.json", "mfec.json", "cascade.json", "config.json", "report_falls.csv", "report_binary.csv",
                        "qbin.csv", "bfc_log.csv", "mfec_log.csv"}) {
    CHECK_MESSAGE(fs::exists(dir / "a" / f), f);
  }
  const auto echoed = nlohmann::json::parse(slurp(dir / "a" / "config.json"));
  CHECK(echoed["seed"] == 7);
  CHECK(echoed["epochs_bfc"] == 8);
  CHECK(r.out.find("macro-F1") != std::string::npos);

  args[4] = (dir / "b").string();
  REQUIRE(run(args).code == 0);
  for (const char* f : {"bfc.json", "mfec.json", "report_falls.csv", "report_binary.csv", "qbin.csv"}) {
    CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
  }

  REQUIRE(run({"synth", "--set", "synth.total=220", "--set", "synth.fall_fraction=0.5", "--seed", "4", "--out",
               (dir / "s").string()})
              .code == 0);
  const auto pred = run({"predict", "--model", (dir / "a").string(), "--input", (dir / "s" / "dataset.csv").string()});
  REQUIRE(pred.code == 0);
  std::istringstream lines(pred.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    CHECK((line == "no_fall" || line == "HF" || line == "KF" || line == "BF" || line == "SF" || line == "SDF"));
    ++count;
  }
  CHECK(count == 220);

  const auto ev = run({"eval", "--model", (dir / "a").string(), "--input", (dir / "s" / "dataset.csv").string(),
                       "--out", (dir / "ev").string()});
  CHECK(ev.code == 0);
  CHECK(fs::exists(dir / "ev" / "report_falls.json"));
  CHECK(fs::exists(dir / "ev" / "config.json"));
  fs::remove_all(dir);
}
