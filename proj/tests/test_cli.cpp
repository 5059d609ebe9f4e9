#include <doctest.h>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qcrypt/replay.hpp"
#include "qcrypt/report.hpp"

using namespace qcrypt;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("qcrypt_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

int run_cli(const std::string& args, const fs::path& stdout_path) {
  std::string cmd = std::string("\"") + QCRYPT_CLI_PATH + "\" " + args + " > " +
                    stdout_path.string() + " 2> " + stdout_path.string() + ".err";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config validation names the offending flag") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.loss = 1.5;
  CHECK_THROWS_WITH_AS(cfg.validate(), "--loss must be in [0, 1]", std::invalid_argument);
  cfg.loss = 0.0;
  cfg.protocol = "carrier-pigeon";
  CHECK_THROWS_WITH_AS(cfg.validate(), "--protocol must be bb84 or cointoss",
                       std::invalid_argument);
  cfg.protocol = "bb84";
  cfg.output = "xml";
  CHECK_THROWS_WITH_AS(cfg.validate(), "--output must be text, json or csv",
                       std::invalid_argument);
  cfg.output = "text";
  cfg.tag_width = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), "--tag-width must be in [1, 64]", std::invalid_argument);
  cfg.tag_width = 32;
  cfg.eve = "sideways";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.eve = "none";
  cfg.cheat = "wishful";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("identical configs render byte-identical reports") {
  ExperimentConfig cfg;
  cfg.protocol = "bb84";
  cfg.n = 300;
  cfg.trials = 4;
  cfg.seed = 42;
  cfg.eve = "rect";
  for (const char* mode : {"text", "json", "csv"}) {
    cfg.output = mode;
    CAPTURE(mode);
    CHECK(run_experiment(cfg).render() == run_experiment(cfg).render());
  }
  cfg.seed = 43;
  cfg.output = "json";
  CHECK(run_experiment(cfg).render() != [&] {
    ExperimentConfig other = cfg;
    other.seed = 42;
    return run_experiment(other).render();
  }());
}

TEST_CASE("the json report carries config, per-trial rows, and aggregates") {
  ExperimentConfig cfg;
  cfg.protocol = "bb84";
  cfg.n = 200;
  cfg.trials = 3;
  cfg.seed = 9;
  cfg.eve = "rect";
  StatsReport report = run_experiment(cfg);
  json j = json::parse(report.to_json());
  CHECK(j["config"]["protocol"] == "bb84");
  CHECK(j["config"]["n"] == 200);
  CHECK(j["config"]["seed"] == 9);
  REQUIRE(j["trials"].size() == 3);
  for (const json& row : j["trials"]) {
    CHECK(row["seed"] == 9);
    CHECK(row["eve"] == "rect");
    CHECK(row["verdict"].is_string());
    const json& m = row["metrics"];
    for (const char* key : {"n_sent", "n_detected", "n_sifted", "n_compared", "n_disagree",
                            "key_length", "detection_rate", "sift_rate", "qber", "accepted",
                            "eve_info", "eve_disturbance"})
      CHECK(m.contains(key));
  }
  for (const char* key :
       {"detection_rate", "sift_rate", "qber", "key_length", "accept_rate", "eve_info",
        "eve_disturbance"}) {
    CHECK(j["aggregates"].contains(key));
    CHECK(j["aggregates"][key]["samples"] == 3);
  }
}

TEST_CASE("coin-toss rows carry the claim evidence") {
  ExperimentConfig cfg;
  cfg.protocol = "cointoss";
  cfg.n = 60;
  cfg.trials = 6;
  cfg.seed = 11;
  cfg.cheat = "late-fabrication";
  StatsReport report = run_experiment(cfg);
  json j = json::parse(report.to_json());
  REQUIRE(j["trials"].size() == 6);
  int cheated = 0;
  for (const json& row : j["trials"]) {
    CHECK(row["alice_mode"] == "late-fabrication");
    CHECK(row["winner"] == "alice");
    CHECK(row["mismatch_positions"].is_array());
    CHECK(row["mismatch_positions"].size() ==
          static_cast<std::size_t>(row["metrics"]["mismatches"].get<double>()));
    if (row["metrics"]["alice_cheated"].get<double>() == 1.0) ++cheated;
  }
  CHECK(j["aggregates"]["cheat_detection_rate"]["samples"] == cheated);
  CHECK(j["aggregates"].contains("bob_win_rate"));
  CHECK(j["aggregates"].contains("clean_rate"));
}

TEST_CASE("csv and json reports agree on every number") {
  for (const char* protocol : {"bb84", "cointoss"}) {
    CAPTURE(protocol);
    ExperimentConfig cfg;
    cfg.protocol = protocol;
    cfg.n = 150;
    cfg.trials = 5;
    cfg.seed = 77;
    if (cfg.protocol == "bb84") cfg.eve = "random";
    else cfg.cheat = "epr";
    StatsReport report = run_experiment(cfg);
    json j = json::parse(report.to_json());
    std::vector<std::string> lines = split_lines(report.to_csv());

    std::size_t header_at = 0;
    while (header_at < lines.size() && lines[header_at].rfind("trial,verdict", 0) != 0)
      ++header_at;
    REQUIRE(header_at < lines.size());
    std::vector<std::string> columns = split_csv(lines[header_at]);
    for (int t = 0; t < cfg.trials; ++t) {
      std::vector<std::string> cells = split_csv(lines[header_at + 1 + t]);
      REQUIRE(cells.size() == columns.size());
      CHECK(cells[0] == std::to_string(t));
      CHECK(cells[1] == j["trials"][t]["verdict"].get<std::string>());
      for (std::size_t c = 2; c < columns.size(); ++c) {
        double from_csv = std::stod(cells[c]);
        double from_json = j["trials"][t]["metrics"][columns[c]].get<double>();
        CHECK(from_csv == from_json);
      }
    }

    std::size_t agg_at = header_at + 1 + cfg.trials;
    while (agg_at < lines.size() && lines[agg_at].rfind("metric,mean", 0) != 0) ++agg_at;
    REQUIRE(agg_at < lines.size());
    for (std::size_t i = agg_at + 1; i < lines.size() && !lines[i].empty(); ++i) {
      std::vector<std::string> cells = split_csv(lines[i]);
      REQUIRE(cells.size() == 4);
      const json& agg = j["aggregates"][cells[0]];
      CHECK(std::stod(cells[1]) == agg["mean"].get<double>());
      CHECK(std::stod(cells[2]) == agg["radius4"].get<double>());
      CHECK(std::stoi(cells[3]) == agg["samples"].get<int>());
    }
  }
}

TEST_CASE("aggregates are the rounded mean and four standard errors of the rows") {
  ExperimentConfig cfg;
  cfg.protocol = "bb84";
  cfg.n = 120;
  cfg.trials = 8;
  cfg.seed = 5;
  StatsReport report = run_experiment(cfg);
  std::vector<double> rates;
  for (const TrialRow& row : report.rows)
    for (const auto& [name, value] : row.metrics)
      if (name == "detection_rate") rates.push_back(value);
  REQUIRE(rates.size() == 8);
  double mean = 0.0;
  for (double v : rates) mean += v;
  mean /= rates.size();
  double var = 0.0;
  for (double v : rates) var += (v - mean) * (v - mean);
  var /= rates.size() - 1;
  double radius = 4.0 * std::sqrt(var / rates.size());
  for (const auto& [name, agg] : report.aggregates)
    if (name == "detection_rate") {
      CHECK(agg.mean == std::round(mean * 1e6) / 1e6);
      CHECK(agg.radius4 == std::round(radius * 1e6) / 1e6);
      CHECK(agg.samples == 8);
    }
}

TEST_CASE("transcripts are one json line per pulse and per message") {
  fs::path path = temp_dir() / "transcript.jsonl";
  ExperimentConfig cfg;
  cfg.protocol = "bb84";
  cfg.n = 40;
  cfg.trials = 2;
  cfg.seed = 13;
  cfg.eve = "rect";
  cfg.transcript_path = path.string();
  run_experiment(cfg);
  std::vector<std::string> lines = split_lines(slurp(path));
  REQUIRE(lines.size() == 2 * (40 + 4));
  json first = json::parse(lines[0]);
  CHECK(first["trial"] == 0);
  CHECK(first["type"] == "pulse");
  CHECK(first["index"] == 0);
  CHECK(first["fate"] == "intercepted");
  CHECK(first["eve_basis"] == "rectilinear");
  CHECK(first["eve_outcome"].is_number_integer());
  json msg = json::parse(lines[40]);
  CHECK(msg["trial"] == 0);
  CHECK(msg["type"] == "message");
  CHECK(msg["seq"] == 0);
  CHECK(msg["sender"] == "bob");
  json body = json::parse(msg["body"].get<std::string>());
  CHECK(body["type"] == "bob_report");
  json last = json::parse(lines.back());
  CHECK(last["trial"] == 1);
  CHECK(last["type"] == "message");
  for (const std::string& line : lines) CHECK_FALSE(json::parse(line, nullptr, false).is_discarded());
}

TEST_CASE("an unwritable transcript path raises an io error") {
  ExperimentConfig cfg;
  cfg.protocol = "cointoss";
  cfg.n = 10;
  cfg.transcript_path = "/nonexistent_dir_qq/t.jsonl";
  CHECK_THROWS_AS(run_experiment(cfg), IoError);
}

TEST_CASE("the bundled walkthrough tables replay cleanly through the library") {
  std::vector<ReplayResult> results = replay_recorded_tables(QCRYPT_FIXTURE_DIR);
  REQUIRE(results.size() == 2);
  for (const ReplayResult& r : results) {
    CAPTURE(r.table);
    for (const CellDiff& d : r.diffs) {
      CAPTURE(d.row);
      CAPTURE(d.expected);
      CAPTURE(d.actual);
      CHECK(false);
    }
    CHECK(r.pass);
  }
  std::string rendered = format_replay(results);
  CHECK(rendered.find("PASS") != std::string::npos);
  CHECK(rendered.find("FAIL") == std::string::npos);
}

TEST_CASE("a corrupted fixture is caught by the replay") {
  fs::path dir = temp_dir() / "bad_fixtures";
  fs::create_directories(dir);
  json bb84 = load_fixture(std::string(QCRYPT_FIXTURE_DIR) + "/bb84_table.json");
  bb84["expected"]["verdict"] = "rejected";
  std::ofstream(dir / "bb84_table.json") << bb84.dump(2);
  fs::copy_file(std::string(QCRYPT_FIXTURE_DIR) + "/cointoss_table.json",
                dir / "cointoss_table.json", fs::copy_options::overwrite_existing);
  std::vector<ReplayResult> results = replay_recorded_tables(dir.string());
  REQUIRE(results.size() == 2);
  CHECK_FALSE(results[0].pass);
  CHECK(results[0].diffs.size() > 0);
  CHECK(results[1].pass);
  CHECK(format_replay(results).find("FAIL") != std::string::npos);
  CHECK_THROWS_AS(load_fixture((dir / "missing.json").string()), IoError);
}

TEST_CASE("the binary runs an experiment end to end") {
  fs::path report_path = temp_dir() / "report.json";
  int rc = run_cli("--protocol bb84 --n 50 --trials 2 --seed 3 --output json --out " +
                       report_path.string(),
                   temp_dir() / "stdout.txt");
  CHECK(rc == 0);
  json j = json::parse(slurp(report_path));
  CHECK(j["config"]["n"] == 50);
  CHECK(j["trials"].size() == 2);
}

TEST_CASE("the binary distinguishes usage, io, and replay failures") {
  CHECK(run_cli("--protocol carrier-pigeon", temp_dir() / "usage.txt") == 2);
  CHECK(run_cli("--no-such-flag", temp_dir() / "parse.txt") == 2);
  CHECK(run_cli("--protocol bb84 --n 10 --out /nonexistent_dir_qq/r.txt",
                temp_dir() / "io.txt") == 3);
}

TEST_CASE("the binary replays the recorded walkthroughs") {
  fs::path out = temp_dir() / "replay.txt";
  CHECK(run_cli("--replay-paper", out) == 0);
  std::string text = slurp(out);
  CHECK(text.find("PASS") != std::string::npos);
  CHECK(text.find("FAIL") == std::string::npos);

  fs::path dir = temp_dir() / "bad_fixtures_cli";
  fs::create_directories(dir);
  json bb84 = load_fixture(std::string(QCRYPT_FIXTURE_DIR) + "/bb84_table.json");
  bb84["expected"]["key_bits"] = json::array({0, 0, 0, 0});
  std::ofstream(dir / "bb84_table.json") << bb84.dump(2);
  fs::copy_file(std::string(QCRYPT_FIXTURE_DIR) + "/cointoss_table.json",
                dir / "cointoss_table.json", fs::copy_options::overwrite_existing);
  fs::path out2 = temp_dir() / "replay_bad.txt";
  CHECK(run_cli("--replay-paper --fixtures " + dir.string(), out2) == 1);
  CHECK(slurp(out2).find("FAIL") != std::string::npos);
}

TEST_CASE("config files fill in defaults but flags win") {
  fs::path ini = temp_dir() / "run.ini";
  std::ofstream(ini) << "protocol=cointoss\nn=30\ntrials=3\noutput=json\n";
  fs::path report_path = temp_dir() / "from_ini.json";
  int rc = run_cli("--config " + ini.string() + " --n 44 --out " + report_path.string(),
                   temp_dir() / "ini_stdout.txt");
  CHECK(rc == 0);
  json j = json::parse(slurp(report_path));
  CHECK(j["config"]["protocol"] == "cointoss");
  CHECK(j["config"]["n"] == 44);
  CHECK(j["config"]["trials"] == 3);
}

}  // TEST_SUITE
