#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aoii/cli.hpp"
#include "aoii/errors.hpp"

using namespace aoii;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "aoii_cli_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string write_config(const std::string& name, const std::string& body) {
  const auto path = scratch(name);
  std::ofstream(path) << body;
  return path.string();
}

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "aoii");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* const kBase = R"({
  "source": {"alpha": 0.5, "n_states": 16},
  "channel": {"p_e": 0.5, "c": 0.5, "r_max": 2},
  "budget": {"R": 0.2},
  "sim": {"horizon": 20000, "seed": 3}
})";

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(12345678.9) == "12345678.9");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(1e-20) == "1e-20");
}

TEST_CASE("config parsing") {
  const auto cfg = parse_config(kBase);
  CHECK(cfg.source.mu() == doctest::Approx(0.5 / 15));
  CHECK(cfg.channel.r_max() == 2);
  CHECK(cfg.budgets == std::vector<double>{0.2});
  CHECK(cfg.sim.horizon == 20000);
  CHECK(cfg.solver.lambda_tol == 1e-6);
  CHECK(cfg.resolved.find("\"lambda_tol\"") != std::string::npos);

  const auto expect_error = [](const std::string& text, const std::string& field) {
    try {
      parse_config(text);
      FAIL("accepted: " << text);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  };
  expect_error(R"({"source": {"alpha": "x", "n_states": 16}, "channel": {"p_e": 0.5, "c": 0.5}})",
               "source.alpha");
  expect_error(R"({"source": {"alpha": 0.5, "n_states": 16}, "channel": {"p_e": 0.5}})",
               "channel.c");
  expect_error(R"({"source": {"alpha": 0.5, "n_states": 16}, "channel": {"p_e": 0.5, "c": 0.5, "bogus": 1}})",
               "channel.bogus");
  expect_error(R"({"source": {"alpha": 0.5, "n_states": 16}, "channel": {"p_e": 0.5, "c": 0.5}, "extra": {}})",
               "config.extra");
  expect_error(R"({"source": {"alpha": 0.5, "n_states": 16}, "channel": {"p_e": 1.5, "c": 0.5}})",
               "channel");
  expect_error(R"({"source": {"alpha": 0.5, "n_states": 16}, "channel": {"p_e": 0.5, "c": 0.5},
                   "budget": {"R_grid": [0.3, 0.2]}})",
               "budget.R_grid");
  expect_error(R"({"source": {"alpha": 0.5, "n_states": 16}, "channel": {"p_e": 0.5, "c": 0.5},
                   "sim": {"horizon": -4}})",
               "sim.horizon");
  expect_error("{not json", "malformed JSON");
}

TEST_CASE("solve subcommand") {
  SUBCASE("mixed record") {
    const auto r = run({"solve", "--config", write_config("solve.json", kBase)});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("# aoii solve\n# config: {", 0) == 0);
    CHECK(r.out.find("regime = mixed\n") != std::string::npos);
    CHECK(r.out.find("predicted_rate = 0.2\n") != std::string::npos);
  }
  SUBCASE("waiting source") {
    const auto r = run({"solve", "--config", write_config("wait.json", R"({
      "source": {"alpha": 0.2, "n_states": 2}, "channel": {"p_e": 0.5, "c": 0.5},
      "budget": {"R": 0.5}})")});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("regime = never-transmit\n") != std::string::npos);
    CHECK(r.out.find("predicted_aoii = " + format_number(g_wait(SourceModel(0.2, 0.8), Penalty::linear()))) !=
          std::string::npos);
  }
  SUBCASE("full budget") {
    const auto r = run({"solve", "--config", write_config("full.json", R"({
      "source": {"alpha": 0.5, "n_states": 16}, "channel": {"p_e": 0.5, "c": 0.5},
      "budget": {"R": 1.0}})")});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("regime = pure-threshold\n") != std::string::npos);
  }
  SUBCASE("config errors") {
    const auto bad = run({"solve", "--config", write_config("bad.json", R"({
      "source": {"alpha": "half", "n_states": 16}, "channel": {"p_e": 0.5, "c": 0.5}})")});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("source.alpha") != std::string::npos);
    CHECK(run({"solve", "--config", scratch("missing.json").string()}).code == 2);
    CHECK(run({"solve"}).code == 2);
    CHECK(run({"--config", write_config("c.json", kBase)}).code == 2);
  }
  SUBCASE("truncation failure") {
    const auto r = run({"solve", "--config", write_config("trunc.json", R"({
      "source": {"alpha": 0.5, "n_states": 16}, "channel": {"p_e": 0.5, "c": 0.5},
      "budget": {"R": 0.2}, "solver": {"l_cap": 2}})")});
    CHECK(r.code == 3);
  }
}

TEST_CASE("sweep subcommand") {
  const auto cfg = write_config("sweep.json", R"({
    "source": {"alpha": 0.5, "n_states": 16}, "channel": {"p_e": 0.5, "c": 0.5, "r_max": 2},
    "budget": {"R_grid": [0.1, 0.3]}, "sim": {"horizon": 20000, "seed": 9}})");
  const auto out = scratch("sweep.csv").string();
  const auto a = run({"sweep", "--config", cfg, "--out", out});
  REQUIRE(a.code == 0);
  std::ifstream f(out);
  std::stringstream first;
  first << f.rdbuf();
  const std::string text = first.str();
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "# aoii sweep");
  std::getline(lines, line);
  std::getline(lines, line);
  CHECK(line == kSweepHeader);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) != "");
  }
  CHECK(rows == 2);

  const auto b = run({"sweep", "--config", cfg});
  CHECK(b.out == text);
  const auto c = run({"sweep", "--config", cfg, "--seed", "10"});
  CHECK(c.out != text);
  CHECK(c.out.find("\"seed\":10") != std::string::npos);
}

TEST_CASE("simulate and wait-aoii subcommands") {
  const auto r = run({"simulate", "--config", write_config("sim.json", R"({
    "source": {"alpha": 0.5, "n_states": 16}, "channel": {"p_e": 0.5, "c": 0.5},
    "policy": {"kind": "periodic", "R": 0.25}, "sim": {"horizon": 1000}})"), "--reps", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("policy = periodic(0.25)\n") != std::string::npos);
  CHECK(r.out.find("avg_rate = 0.25\n") != std::string::npos);
  CHECK(r.out.find("replications = 3\n") != std::string::npos);

  const auto w = run({"wait-aoii", "--config", write_config("w.json", R"({
    "source": {"alpha": 0.5, "mu": 0.5}, "channel": {"p_e": 0.5, "c": 0.5}})")});
  REQUIRE(w.code == 0);
  CHECK(w.out.find("g_wait = 1\n") != std::string::npos);
  CHECK(w.out.find("waiting_optimal = true\n") != std::string::npos);
}

TEST_CASE("validate subcommand") {
  const std::string body = R"({
    "source": {"alpha": 0.5, "n_states": 16}, "channel": {"p_e": 0.5, "c": 0.5, "r_max": 2},
    "rvi": {"delta_max": 150}, "validate": {"lambdas": [0, 5]%s}})";
  auto with = [&](const std::string& extra) {
    std::string s = body;
    s.replace(s.find("%s"), 2, extra);
    return s;
  };
  const auto ok = run({"validate", "--config", write_config("v.json", with(""))});
  CHECK(ok.code == 0);
  CHECK(ok.out.find(",fail,") == std::string::npos);
  CHECK(ok.out.find("threshold[lambda=5],pass") != std::string::npos);

  const auto bad = run({"validate", "--config", write_config("vp.json", with(", \"perturb_gamma\": 0.3"))});
  CHECK(bad.code == 1);
  CHECK(bad.out.find(",fail,") != std::string::npos);

  const auto wait = run({"validate", "--config", write_config("vw.json", R"({
    "source": {"alpha": 0.2, "n_states": 2}, "channel": {"p_e": 0.5, "c": 0.5},
    "rvi": {"delta_max": 150}})")});
  CHECK(wait.code == 0);
  CHECK(wait.out.find("waiting-cost[lambda=1],pass") != std::string::npos);
}
