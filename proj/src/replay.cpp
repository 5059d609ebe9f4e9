#include "qcrypt/replay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qcrypt/bb84.hpp"
#include "qcrypt/cointoss.hpp"
#include "qcrypt/report.hpp"

namespace qcrypt {

using nlohmann::json;

namespace {

int basis_code(const std::string& s) {
  if (s == "R") return 0;
  if (s == "D") return 1;
  throw std::invalid_argument("fixture: basis must be R or D, got '" + s + "'");
}

std::vector<int> basis_row(const json& arr) {
  std::vector<int> out;
  for (const auto& v : arr) out.push_back(basis_code(v.get<std::string>()));
  return out;
}

template <typename T>
std::string show(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string show_opt(const std::optional<int>& v) { return v ? show(*v) : "hole"; }

void check(ReplayResult& r, const std::string& row, int column, const std::string& expected,
           const std::string& actual) {
  if (expected != actual) {
    r.diffs.push_back({row, column, expected, actual});
    r.pass = false;
  }
}

void check_list(ReplayResult& r, const std::string& row, const std::vector<int>& expected,
                const std::vector<int>& actual) {
  if (expected != actual)
    check(r, row, -1, show(json(expected)), show(json(actual)));
}

// Scripted channel stream: one loss draw (loss is zero in the recorded runs)
// and one detection draw per pulse; detector efficiency 1/2 turns the
// recorded hit pattern into draws on either side of it.
ScriptedSource scripted_channel(const std::vector<bool>& detected) {
  ScriptedSource src;
  for (bool hit : detected) {
    src.push(0.5);
    src.push(hit ? 0.25 : 0.75);
  }
  return src;
}

// Draws reproducing sample_without_replacement picks of `targets` (pulse
// positions) out of the `kept` list, in the given order.
void push_selection_draws(ScriptedSource& src, const std::vector<int>& kept,
                          const std::vector<int>& targets) {
  std::vector<int> pool(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) pool[i] = static_cast<int>(i);
  for (int target : targets) {
    auto it = std::find_if(pool.begin(), pool.end(),
                           [&](int local) { return kept[local] == target; });
    if (it == pool.end()) throw std::invalid_argument("fixture: revealed position not in kept set");
    src.push((static_cast<double>(it - pool.begin()) + 0.5) / pool.size());
    pool.erase(it);
  }
}

}  // namespace

json load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open fixture " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw IoError("fixture " + path + " is not valid JSON");
  return j;
}

ReplayResult replay_bb84_table(const json& fixture) {
  ReplayResult result;
  result.table = fixture.value("name", "bb84_table");

  const int n = fixture.at("n").get<int>();
  std::vector<int> alice_bits = fixture.at("alice_bits").get<std::vector<int>>();
  std::vector<int> alice_bases = basis_row(fixture.at("alice_bases"));
  std::vector<int> bob_bases = basis_row(fixture.at("bob_bases"));
  std::vector<bool> detected = fixture.at("detected").get<std::vector<bool>>();

  ScriptedSource alice_src;
  for (int b : alice_bits) alice_src.push_bit(b);
  for (int b : alice_bases) alice_src.push_bit(b);

  ScriptedSource bob_src;
  const json& outcomes = fixture.at("bob_outcomes");
  for (int i = 0; i < n; ++i) {
    bob_src.push_bit(bob_bases[i]);
    if (detected[i]) bob_src.push_bit(outcomes[i].get<int>());
  }
  // Comparison subset draws: recompute the kept set the way the parties do.
  std::vector<int> kept;
  for (int i = 0; i < n; ++i)
    if (detected[i] && alice_bases[i] == bob_bases[i]) kept.push_back(i);
  const json& expected = fixture.at("expected");
  std::vector<int> revealed = expected.at("revealed_positions").get<std::vector<int>>();
  push_selection_draws(bob_src, kept, revealed);

  ScriptedSource channel_src = scripted_channel(detected);
  ScriptedSource eve_src;  // untouched: no eavesdropper in the recorded run

  SessionConfig cfg;
  cfg.n = n;
  cfg.compare_fraction = fixture.at("compare_fraction").get<double>();
  cfg.channel.detector_efficiency = fixture.at("detector_efficiency").get<double>();
  SessionResult res = run_bb84_session(cfg, {alice_src, bob_src, channel_src, eve_src});

  for (int i = 0; i < n; ++i) {
    std::string exp = outcomes[i].is_null() ? "hole" : show(outcomes[i].get<int>());
    check(result, "bits_received", i, exp, show_opt(res.bob.outcomes[i]));
  }
  check_list(result, "kept_positions", expected.at("kept_positions").get<std::vector<int>>(),
             res.sifted.kept_positions);
  check_list(result, "shared_bits", expected.at("shared_bits").get<std::vector<int>>(),
             res.sifted.alice_bits);
  check_list(result, "shared_bits_bob", expected.at("shared_bits").get<std::vector<int>>(),
             res.sifted.bob_bits);
  check_list(result, "revealed_positions", revealed, res.comparison.compared_positions);
  std::vector<int> revealed_bits;
  for (int local : res.comparison.compared_local)
    revealed_bits.push_back(res.sifted.bob_bits[local]);
  check_list(result, "revealed_bits", expected.at("revealed_bits").get<std::vector<int>>(),
             revealed_bits);
  check(result, "disagreements", -1, "0", show(res.comparison.disagreements));
  check(result, "verdict", -1, expected.at("verdict").get<std::string>(),
        to_string(res.verdict));

  std::vector<int> remaining_positions;
  std::size_t next = 0;
  for (std::size_t j = 0; j < res.sifted.size(); ++j) {
    if (next < res.comparison.compared_local.size() &&
        res.comparison.compared_local[next] == static_cast<int>(j)) {
      ++next;
      continue;
    }
    remaining_positions.push_back(res.sifted.kept_positions[j]);
  }
  check_list(result, "remaining_positions",
             expected.at("remaining_positions").get<std::vector<int>>(), remaining_positions);
  check_list(result, "key_bits", expected.at("key_bits").get<std::vector<int>>(),
             res.comparison.alice_key.bits());
  check_list(result, "key_bits_bob", expected.at("key_bits").get<std::vector<int>>(),
             res.comparison.bob_key.bits());
  return result;
}

ReplayResult replay_cointoss_table(const json& fixture) {
  ReplayResult result;
  result.table = fixture.value("name", "cointoss_table");

  const int n = fixture.at("n").get<int>();
  int alice_basis = basis_code(fixture.at("alice_basis").get<std::string>());
  std::vector<int> alice_bits = fixture.at("alice_bits").get<std::vector<int>>();
  std::vector<int> bob_bases = basis_row(fixture.at("bob_bases"));
  std::vector<bool> detected = fixture.at("detected").get<std::vector<bool>>();
  int guess = basis_code(fixture.at("bob_guess").get<std::string>());

  // The polarizations the fixture prints, as states; checks the encoding.
  const json& expected = fixture.at("expected");
  if (expected.contains("photons")) {
    const json& symbols = expected.at("photons");
    for (int i = 0; i < n; ++i) {
      std::string sym = symbols[i].get<std::string>();
      StateVector want = sym == "↑"   ? encode_pulse(1, 0)
                         : sym == "↔" ? encode_pulse(0, 0)
                         : sym == "↗" ? encode_pulse(0, 1)
                                      : encode_pulse(1, 1);  // ↘
      StateVector got = encode_pulse(alice_bits[i], alice_basis);
      if ((want.coords() - got.coords()).norm() > 1e-12)
        check(result, "photons", i, sym, "bit " + show(alice_bits[i]));
    }
  }

  ScriptedSource alice_src;
  alice_src.push_bit(alice_basis);
  for (int b : alice_bits) alice_src.push_bit(b);

  ScriptedSource bob_src;
  const json& outcomes = fixture.at("bob_outcomes");
  for (int i = 0; i < n; ++i) {
    bob_src.push_bit(bob_bases[i]);
    if (detected[i]) bob_src.push_bit(outcomes[i].get<int>());
  }
  bob_src.push_bit(guess);

  ScriptedSource channel_src = scripted_channel(detected);
  ScriptedSource eve_src;

  TossConfig cfg;
  cfg.n = n;
  cfg.channel.detector_efficiency = fixture.at("detector_efficiency").get<double>();
  RoundResult res = toss_round(cfg, {alice_src, bob_src, channel_src, eve_src});

  auto check_table = [&](const char* row, const json& table_obj,
                         const std::vector<std::optional<int>>& actual) {
    std::vector<std::optional<int>> want(n);
    for (auto& [key, value] : table_obj.items()) want[std::stoi(key)] = value.get<int>();
    for (int i = 0; i < n; ++i)
      check(result, row, i, show_opt(want[i]), show_opt(actual[i]));
  };
  check_table("rect_table", expected.at("rect_table"), res.tables.rect);
  check_table("diag_table", expected.at("diag_table"), res.tables.diag);

  check(result, "bob_guess", -1, fixture.at("bob_guess").get<std::string>(),
        res.bob_guess == 0 ? "R" : "D");
  check(result, "claimed_basis", -1, fixture.at("alice_basis").get<std::string>(),
        res.claimed_basis == 0 ? "R" : "D");
  check_list(result, "certified_bits", alice_bits, res.claimed_bits);
  check(result, "winner", -1, expected.at("winner").get<std::string>(), to_string(res.winner));
  check(result, "clean", -1, show(expected.at("clean").get<bool>()), show(res.verify.clean));
  check(result, "mismatches", -1, "0", show(res.verify.mismatch_positions.size()));
  check(result, "correlation_conclusive", -1,
        show(expected.at("correlation_conclusive").get<bool>()),
        show(res.verify.correlation_conclusive));
  if (expected.contains("other_agreements")) {
    int agreements = static_cast<int>(std::lround(res.verify.other_agreement *
                                                  res.verify.other_samples));
    check(result, "other_agreements", -1,
          show(expected.at("other_agreements").get<int>()) + "/" +
              show(expected.at("other_samples").get<int>()),
          show(agreements) + "/" + show(res.verify.other_samples));
  }
  return result;
}

std::vector<ReplayResult> replay_recorded_tables(const std::string& fixtures_dir) {
  std::vector<ReplayResult> out;
  out.push_back(replay_bb84_table(load_fixture(fixtures_dir + "/bb84_table.json")));
  out.push_back(replay_cointoss_table(load_fixture(fixtures_dir + "/cointoss_table.json")));
  return out;
}

std::string format_replay(const std::vector<ReplayResult>& results) {
  std::ostringstream out;
  for (const ReplayResult& r : results) {
    out << (r.pass ? "PASS" : "FAIL") << "  " << r.table << "\n";
    for (const CellDiff& d : r.diffs) {
      out << "  row " << d.row;
      if (d.column >= 0) out << " column " << d.column;
      out << ": expected " << d.expected << ", got " << d.actual << "\n";
    }
  }
  return out.str();
}

}  // namespace qcrypt
