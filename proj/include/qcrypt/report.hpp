#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qcrypt {

// Everything a run needs, mirroring the command-line surface one to one.
struct ExperimentConfig {
  std::string protocol = "bb84";  // bb84 | cointoss
  int n = 1000;
  int trials = 1;
  std::uint64_t seed = 1;
  double loss = 0.0;
  double efficiency = 1.0;
  std::string eve = "none";  // none | rect | diag | random | angle:<radians>
  double eve_fraction = 1.0;
  double compare_fraction = 1.0 / 3.0;
  std::optional<int> compare_count;
  int allowed_disagreements = 0;
  std::string cheat = "honest";  // honest | late-fabrication | mixed-bases | mixed-angle | epr
  double storage_loss = 0.0;
  double cheat_angle = 0.39269908169872414;  // pi/8
  bool bob_delays = false;
  bool auth = false;
  int auth_pool_bits = 4096;
  int tag_width = 32;
  std::string output = "text";  // text | json | csv
  std::string transcript_path;  // empty = no transcript

  void validate() const;  // throws std::invalid_argument naming the offending flag
  nlohmann::json to_json() const;
};

struct Aggregate {
  double mean = 0.0;
  double radius4 = 0.0;  // 4 standard errors
  int samples = 0;
};

struct TrialRow {
  int trial = 0;
  std::string verdict;
  // Fixed column order; every value already rounded to 6 decimals so all
  // output formats agree exactly.
  std::vector<std::pair<std::string, double>> metrics;
  // Coin-toss rows carry the winner and the verification evidence; the JSON
  // report prints them alongside the numeric columns.
  std::string winner;
  std::vector<int> mismatch_positions;
};

struct StatsReport {
  ExperimentConfig config;
  std::vector<TrialRow> rows;
  std::vector<std::pair<std::string, Aggregate>> aggregates;

  std::string to_text() const;
  std::string to_csv() const;
  std::string to_json() const;
  std::string render() const;  // per config.output
};

// Run the configured Monte Carlo experiment. Per-trial randomness comes from
// streams derived as derive_seed(seed, trial * 8 + role); identical configs
// produce byte-identical reports. When transcript_path is set, every trial's
// transcript is appended there as JSON lines (IoError on failure).
StatsReport run_experiment(const ExperimentConfig& cfg);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qcrypt
