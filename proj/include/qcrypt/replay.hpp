#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace qcrypt {

struct CellDiff {
  std::string row;      // which fixture row disagreed
  int column = -1;      // 0-based pulse index, -1 for scalar rows
  std::string expected;
  std::string actual;
};

struct ReplayResult {
  std::string table;
  bool pass = true;
  std::vector<CellDiff> diffs;
};

// Drive one key-distribution session from the fixture's recorded random
// choices (scripted sources, no free randomness) and compare every derived
// row against the fixture's expectations.
ReplayResult replay_bb84_table(const nlohmann::json& fixture);

// Same for the recorded coin-toss round.
ReplayResult replay_cointoss_table(const nlohmann::json& fixture);

nlohmann::json load_fixture(const std::string& path);  // IoError on failure

// Replay both bundled tables from a fixtures directory containing
// bb84_table.json and cointoss_table.json.
std::vector<ReplayResult> replay_recorded_tables(const std::string& fixtures_dir);

std::string format_replay(const std::vector<ReplayResult>& results);

}  // namespace qcrypt
