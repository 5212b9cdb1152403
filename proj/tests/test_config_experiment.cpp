#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "secperc/config.hpp"
#include "secperc/experiment.hpp"

using namespace secperc;
using config::ExperimentConfig;
using config::json;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"model": "pathloss", "lambda": 1.0, "lambda_e": 0.5, "seed": 7})";

std::string field_of(const std::string& text) {
  try {
    config::parse_config(text);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "<accepted>";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("secperc_test_" + name);
  fs::remove_all(p);
  return p;
}

struct Proc {
  int code = -1;
  std::string out;
};

Proc run_cli(const std::string& args) {
  const std::string cmd = std::string(SECPERC_CLI_PATH) + " " + args + " 2>&1";
  Proc p;
  FILE* f = popen(cmd.c_str(), "r");
  if (f == nullptr) return p;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), f) != nullptr) p.out += buf.data();
  const int status = pclose(f);
  p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return p;
}

}  // namespace

TEST(Config, MinimalGetsDefaults) {
  const auto c = config::parse_config(kMinimal);
  EXPECT_EQ(c.params.model(), Model::path_loss);
  EXPECT_EQ(c.params.alpha, 4.0);
  EXPECT_EQ(c.params.power, 1.0);
  EXPECT_EQ(c.params.gamma, 0.0);
  EXPECT_EQ(c.lambda, 1.0);
  EXPECT_EQ(c.lambda_e, 0.5);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.trials, 10000u);
  EXPECT_EQ(c.geometry.r, 1.0);
  EXPECT_EQ(c.geometry.m, 10);
  EXPECT_EQ(c.geometry.L, 20.0);
  EXPECT_EQ(c.geometry.margin, 2.0);
  EXPECT_EQ(c.truncation_tol, 1e-4);
}

TEST(Config, FadingDefaultsAndMismatch) {
  const auto c = config::parse_config(R"({"model": "fading", "lambda": 1, "lambda_e": 1, "seed": 1})");
  EXPECT_EQ(c.params.fading.kind, FadingKind::exponential);
  const auto b = config::parse_config(
      R"({"model": "fading", "fading": {"type": "bounded", "kappa": 8}, "lambda": 1, "lambda_e": 1, "seed": 1})");
  EXPECT_EQ(b.params.fading.kind, FadingKind::bounded_exponential);
  EXPECT_EQ(b.params.fading.kappa, 8.0);
  EXPECT_EQ(field_of(R"({"model": "pathloss", "fading": {"type": "exponential"}, "lambda": 1, "lambda_e": 1, "seed": 1})"),
            "fading.type");
  EXPECT_EQ(field_of(R"({"model": "fading", "fading": {"type": "none"}, "lambda": 1, "lambda_e": 1, "seed": 1})"),
            "fading.type");
}

TEST(Config, RejectionsNameTheField) {
  EXPECT_EQ(field_of(R"({"model": "pathloss", "alpha": 2, "lambda": 1, "lambda_e": 1, "seed": 1})"), "alpha");
  EXPECT_EQ(field_of(R"({"model": "pathloss", "lambda": 1, "lambda_e": 1})"), "seed");
  EXPECT_EQ(field_of(R"({"lambda": 1, "lambda_e": 1, "seed": 1})"), "model");
  EXPECT_EQ(field_of(R"({"model": "pathloss", "lambda": -1, "lambda_e": 1, "seed": 1})"), "lambda");
  EXPECT_EQ(field_of(R"({"model": "pathloss", "lambda": 1, "lambda_e": 1, "seed": 1, "trials": 0})"), "trials");
  EXPECT_EQ(field_of(R"({"model": "pathloss", "lambda": 1, "lambda_e": 1, "seed": 1, "geometry": {"m": 0}})"),
            "geometry.m");
  EXPECT_EQ(field_of(R"({"model": "pathloss", "lambda": 1, "lambda_e": 1, "seed": 1, "tolerances": {"truncation_tol": 2}})"),
            "tolerances.truncation_tol");
  EXPECT_EQ(field_of(R"({"model": "pathloss", "lambda": "one", "lambda_e": 1, "seed": 1})"), "lambda");
  EXPECT_EQ(field_of("{not json"), "<root>");
  EXPECT_EQ(field_of("[1, 2]"), "<root>");
}

TEST(Config, UnknownKeysRejectedEverywhere) {
  const json base = json::parse(kMinimal);
  const std::vector<std::string> paths{"", "geometry", "fading", "tolerances", "lambda_c"};
  for (const auto& where : paths) {
    for (const std::string key : {"extra", "Lambda", "seed_", "r ", ""}) {
      json j = base;
      if (where.empty()) j[key] = 1;
      else j[where][key] = 1;
      EXPECT_THROW(config::from_json(j), ValidationError) << where << "." << key;
    }
  }
}

TEST(Config, TypoCorpusNeverAccepted) {
  // Single-character mutations of every top-level key.
  const json base = json::parse(
      R"({"model": "pathloss", "alpha": 4, "power": 1, "gamma": 0, "lambda": 1, "lambda_e": 1, "seed": 1, "trials": 10})");
  for (auto it = base.begin(); it != base.end(); ++it) {
    const std::string k = it.key();
    for (std::size_t i = 0; i < k.size(); ++i) {
      json j = base;
      std::string typo = k;
      typo[i] = typo[i] == 'x' ? 'y' : 'x';
      j.erase(k);
      j[typo] = it.value();
      EXPECT_THROW(config::from_json(j), ValidationError) << typo;
    }
  }
}

TEST(Config, ParseTwiceIsIdentical) {
  const std::string text =
      R"({"model": "fading", "fading": {"type": "bounded", "kappa": 12}, "alpha": 3.5, "lambda": 0.3,
          "lambda_e": 0.7, "seed": 99, "geometry": {"L": 8, "n1": 2}, "lambda_c": {"L_list": [4, 8], "mode": "either"}})";
  const auto a = config::parse_config(text);
  const auto b = config::parse_config(text);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.geometry.margin, 0.8);
  const auto c = config::from_json(ExperimentConfig::to_json(a, true));
  EXPECT_TRUE(a == c);
}

TEST(Config, FileSourceAndMissingFile) {
  const fs::path p = scratch("cfg.json");
  { std::ofstream(p) << kMinimal; }
  EXPECT_TRUE(config::parse_config(p.string()) == config::parse_config(kMinimal));
  fs::remove(p);
  EXPECT_THROW(config::parse_config(p.string()), IoError);
}

TEST(Format, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 2.784164, 1e-300, 6.02214076e23, -0.0, 12800.0}) {
    const std::string s = experiment::format_number(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
  EXPECT_EQ(experiment::format_number(0.5), "0.5");
  EXPECT_EQ(experiment::format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(std::stod(experiment::format_17(0.1)), 0.1);
}

TEST(Csv, EventHeaderContract) {
  const std::vector<std::string> want{"event", "model", "lambda", "lambda_e", "alpha", "param",
                                      "trials", "successes", "p_hat", "ci_lo", "ci_hi", "seed"};
  EXPECT_EQ(experiment::event_header(), want);
  experiment::CsvTable t;
  t.comments = {"hello"};
  t.header = {"a", "b"};
  t.rows = {{"1", "2"}};
  EXPECT_EQ(t.render(), "# hello\na,b\n1,2\n");
}

TEST(Experiment, EstimateRowMatchesEstimate) {
  auto c = config::parse_config(kMinimal);
  c.trials = 40;
  experiment::Request req;
  req.subcommand = experiment::Subcommand::estimate;
  req.event = "B";
  const auto run = experiment::compute(c, req);
  ASSERT_EQ(run.data.rows.size(), 1u);
  const auto& row = run.data.rows[0];
  EXPECT_EQ(row[0], "B");
  EXPECT_EQ(row[6], "40");
  const auto e = est::estimate_event_B(1.0, 0.5, 1.0, {}, c.budget());
  EXPECT_EQ(row[7], std::to_string(e.successes));
}

TEST(Experiment, SweepIsSortedAscending) {
  auto c = config::parse_config(kMinimal);
  c.trials = 20;
  experiment::Request req;
  req.subcommand = experiment::Subcommand::sweep;
  req.event = "Ac";
  req.sweep_param = "lambda_e";
  req.sweep_values = {2.0, 0.5, 1.0};
  const auto run = experiment::compute(c, req);
  ASSERT_EQ(run.data.rows.size(), 3u);
  EXPECT_EQ(run.data.rows[0][3], "0.5");
  EXPECT_EQ(run.data.rows[1][3], "1");
  EXPECT_EQ(run.data.rows[2][3], "2");
  req.sweep_param = "nope";
  EXPECT_THROW(experiment::compute(c, req), ParameterError);
}

TEST(Experiment, ManifestDigestsVerify) {
  auto c = config::parse_config(kMinimal);
  c.trials = 30;
  c.output_dir = scratch("out").string();
  experiment::Request req;
  req.subcommand = experiment::Subcommand::graph;
  const auto m = experiment::run_experiment(c, req);
  ASSERT_GE(m.outputs.size(), 3u);
  for (const auto& [name, digest] : m.outputs)
    EXPECT_EQ(experiment::sha256_hex(slurp(m.directory / name)), digest) << name;
  const json summary = json::parse(slurp(m.directory / "summary.json"));
  std::vector<std::string> keys;
  for (auto it = summary.begin(); it != summary.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"config", "results", "tool_version"}));
  EXPECT_FALSE(summary["config"].contains("workers"));
  const json manifest = json::parse(slurp(m.directory / "manifest.json"));
  EXPECT_EQ(manifest["tool_version"], experiment::kToolVersion);
  fs::remove_all(c.output_dir);
}

TEST(Experiment, Sha256KnownVector) {
  EXPECT_EQ(experiment::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Experiment, UnwritableOutputIsIoError) {
  auto c = config::parse_config(kMinimal);
  c.output_dir = "/proc/secperc_cannot_write";
  experiment::Request req;
  req.subcommand = experiment::Subcommand::bounds;
  EXPECT_THROW(experiment::run_experiment(c, req), IoError);
}

TEST(Experiment, BoundsDeterministic) {
  const auto c = config::parse_config(kMinimal);
  experiment::Request req;
  req.subcommand = experiment::Subcommand::bounds;
  EXPECT_EQ(experiment::compute(c, req).results.dump(), experiment::compute(c, req).results.dump());
}

TEST(Cli, ExitCodesAndErrorJson) {
  const std::string out = scratch("cli").string();
  const std::string cfg = std::string("'") + kMinimal + "'";

  const auto ok = run_cli("bounds --config " + cfg + " --out " + out);
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_TRUE(fs::exists(fs::path(out) / "bounds-7" / "manifest.json"));

  const auto bad = run_cli(R"(bounds --config '{"model": "pathloss", "alpha": 2, "lambda": 1, "lambda_e": 1, "seed": 1}')");
  EXPECT_EQ(bad.code, 2);
  const json err = json::parse(bad.out);
  EXPECT_EQ(err["error"]["field"], "alpha");
  EXPECT_EQ(err["exit_code"], 2);

  EXPECT_EQ(run_cli("bounds --config " + cfg + " --bogus").code, 2);
  EXPECT_EQ(run_cli("estimate --config " + cfg + " --event Z").code, 2);
  EXPECT_EQ(run_cli("bounds --config /nonexistent/cfg.json").code, 4);
  EXPECT_EQ(run_cli("bounds --config " + cfg + " --out /proc/secperc_nope").code, 4);
  const std::string no_bracket =
      R"('{"model": "pathloss", "lambda": 1, "lambda_e": 1, "seed": 1, "trials": 5, "geometry": {"L": 4},
           "lambda_c": {"ratio_bracket": [0.01, 0.02]}}')";
  EXPECT_EQ(run_cli("lambda-c --config " + no_bracket + " --out " + out).code, 3);
  fs::remove_all(out);
}
