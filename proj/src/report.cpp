#include "qcrypt/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qcrypt/bb84.hpp"
#include "qcrypt/cointoss.hpp"
#include "qcrypt/eve.hpp"

namespace qcrypt {

using nlohmann::json;

namespace {

double round6(double x) { return std::round(x * 1e6) / 1e6; }

std::string fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

Aggregate aggregate_of(const std::vector<double>& values) {
  Aggregate a;
  a.samples = static_cast<int>(values.size());
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  double mean = sum / a.samples;
  double varsum = 0.0;
  for (double v : values) varsum += (v - mean) * (v - mean);
  a.mean = round6(mean);
  if (a.samples > 1)
    a.radius4 = round6(4.0 * std::sqrt(varsum / (a.samples - 1) / a.samples));
  return a;
}

double metric(const TrialRow& row, const std::string& name) {
  for (const auto& [k, v] : row.metrics)
    if (k == name) return v;
  throw std::logic_error("report: missing metric " + name);
}

struct EveScore {
  double info = 0.0;
  double dist = 0.0;
};

// Per-session information/disturbance over the sifted positions, same
// scoring as estimate_eve_stats.
EveScore score_eve(const EveStrategy& strategy, const SessionResult& res, int n) {
  std::vector<const EveObservation*> by_pulse(n, nullptr);
  for (const EveObservation& obs : strategy.observations()) by_pulse[obs.pulse_index] = &obs;
  EveScore score;
  if (res.sifted.empty()) return score;
  double info_sum = 0.0;
  int disagree = 0;
  for (std::size_t j = 0; j < res.sifted.size(); ++j) {
    int pulse = res.sifted.kept_positions[j];
    if (res.sifted.alice_bits[j] != res.sifted.bob_bits[j]) ++disagree;
    if (const EveObservation* obs = by_pulse[pulse]) {
      const Basis& eb = obs->basis_code == 0   ? Basis::rectilinear()
                        : obs->basis_code == 1 ? Basis::diagonal()
                                               : Basis::from_angle(obs->basis_angle);
      double p = eve_posterior_correct(eb, obs->outcome, res.alice.bases[pulse]);
      if (p > 0.0 && p < 1.0) info_sum += 1.0 + p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p);
      else info_sum += 1.0;
    }
  }
  score.info = info_sum / res.sifted.size();
  score.dist = static_cast<double>(disagree) / res.sifted.size();
  return score;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (protocol != "bb84" && protocol != "cointoss")
    throw std::invalid_argument("--protocol must be bb84 or cointoss");
  if (n <= 0) throw std::invalid_argument("--n must be positive");
  if (trials <= 0) throw std::invalid_argument("--trials must be positive");
  if (loss < 0.0 || loss > 1.0) throw std::invalid_argument("--loss must be in [0, 1]");
  if (efficiency < 0.0 || efficiency > 1.0)
    throw std::invalid_argument("--efficiency must be in [0, 1]");
  if (eve_fraction < 0.0 || eve_fraction > 1.0)
    throw std::invalid_argument("--eve-fraction must be in [0, 1]");
  if (compare_fraction < 0.0 || compare_fraction > 1.0)
    throw std::invalid_argument("--compare-fraction must be in [0, 1]");
  if (compare_count && *compare_count < 0)
    throw std::invalid_argument("--compare-count must be non-negative");
  if (allowed_disagreements < 0)
    throw std::invalid_argument("--allowed-disagreements must be non-negative");
  if (storage_loss < 0.0 || storage_loss > 1.0)
    throw std::invalid_argument("--storage-loss must be in [0, 1]");
  if (!std::isfinite(cheat_angle)) throw std::invalid_argument("--cheat-angle must be finite");
  if (auth_pool_bits < 0) throw std::invalid_argument("--auth-pool-bits must be non-negative");
  if (tag_width < 1 || tag_width > 64) throw std::invalid_argument("--tag-width must be in [1, 64]");
  if (output != "text" && output != "json" && output != "csv")
    throw std::invalid_argument("--output must be text, json or csv");
  parse_eve_strategy(eve);                            // throws on bad spec
  CheatMode::parse(cheat, storage_loss, cheat_angle); // throws on bad spec
}

json ExperimentConfig::to_json() const {
  json j;
  j["protocol"] = protocol;
  j["n"] = n;
  j["trials"] = trials;
  j["seed"] = seed;
  j["loss"] = loss;
  j["efficiency"] = efficiency;
  j["eve"] = eve;
  j["eve_fraction"] = eve_fraction;
  j["compare_fraction"] = compare_fraction;
  if (compare_count) j["compare_count"] = *compare_count;
  j["allowed_disagreements"] = allowed_disagreements;
  j["cheat"] = cheat;
  j["storage_loss"] = storage_loss;
  j["cheat_angle"] = cheat_angle;
  j["bob_delays"] = bob_delays;
  j["auth"] = auth;
  j["auth_pool_bits"] = auth_pool_bits;
  j["tag_width"] = tag_width;
  return j;
}

StatsReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  StatsReport report;
  report.config = cfg;

  std::ofstream transcript_file;
  if (!cfg.transcript_path.empty()) {
    transcript_file.open(cfg.transcript_path);
    if (!transcript_file) throw IoError("cannot open transcript file " + cfg.transcript_path);
  }

  std::unique_ptr<EveStrategy> eve = parse_eve_strategy(cfg.eve);

  if (cfg.protocol == "bb84") {
    SessionConfig scfg;
    scfg.n = cfg.n;
    scfg.compare_fraction = cfg.compare_fraction;
    scfg.compare_count = cfg.compare_count;
    scfg.allowed_disagreements = cfg.allowed_disagreements;
    scfg.channel.loss_probability = cfg.loss;
    scfg.channel.detector_efficiency = cfg.efficiency;
    scfg.channel.eavesdropper = eve.get();
    scfg.channel.intercept_fraction = cfg.eve_fraction;
    scfg.authenticate = cfg.auth;
    scfg.auth_pool_bits = cfg.auth_pool_bits;
    scfg.tag_width = cfg.tag_width;

    for (int t = 0; t < cfg.trials; ++t) {
      SeededRng alice(derive_seed(cfg.seed, std::uint64_t(t) * 8 + 1));
      SeededRng bob(derive_seed(cfg.seed, std::uint64_t(t) * 8 + 2));
      SeededRng channel(derive_seed(cfg.seed, std::uint64_t(t) * 8 + 3));
      SeededRng eve_rng(derive_seed(cfg.seed, std::uint64_t(t) * 8 + 4));
      scfg.auth_secret_seed = derive_seed(cfg.seed, std::uint64_t(t) * 8 + 5);
      SessionResult res = run_bb84_session(scfg, {alice, bob, channel, eve_rng});

      TrialRow row;
      row.trial = t;
      row.verdict = to_string(res.verdict);
      row.metrics = {
          {"n_sent", double(cfg.n)},
          {"n_detected", double(res.n_detected)},
          {"n_sifted", double(res.sifted.size())},
          {"n_compared", double(res.comparison.compared_local.size())},
          {"n_disagree", double(res.comparison.disagreements)},
          {"key_length", double(res.comparison.alice_key.size())},
          {"detection_rate", round6(double(res.n_detected) / cfg.n)},
          {"sift_rate",
           round6(res.n_detected ? double(res.sifted.size()) / res.n_detected : 0.0)},
          {"qber", round6(res.qber)},
          {"accepted", res.verdict == SessionVerdict::Accepted ? 1.0 : 0.0},
      };
      if (eve) {
        EveScore score = score_eve(*eve, res, cfg.n);
        row.metrics.emplace_back("eve_info", round6(score.info));
        row.metrics.emplace_back("eve_disturbance", round6(score.dist));
      }
      report.rows.push_back(std::move(row));
      if (transcript_file.is_open()) res.transcript.write_jsonl(transcript_file, t);
    }

    auto column = [&](const std::string& name) {
      std::vector<double> v;
      v.reserve(report.rows.size());
      for (const auto& row : report.rows) v.push_back(metric(row, name));
      return v;
    };
    report.aggregates.emplace_back("detection_rate", aggregate_of(column("detection_rate")));
    report.aggregates.emplace_back("sift_rate", aggregate_of(column("sift_rate")));
    report.aggregates.emplace_back("qber", aggregate_of(column("qber")));
    report.aggregates.emplace_back("key_length", aggregate_of(column("key_length")));
    report.aggregates.emplace_back("accept_rate", aggregate_of(column("accepted")));
    if (eve) {
      report.aggregates.emplace_back("eve_info", aggregate_of(column("eve_info")));
      report.aggregates.emplace_back("eve_disturbance",
                                     aggregate_of(column("eve_disturbance")));
    }
  } else {
    TossConfig tcfg;
    tcfg.n = cfg.n;
    tcfg.mode = CheatMode::parse(cfg.cheat, cfg.storage_loss, cfg.cheat_angle);
    tcfg.channel.loss_probability = cfg.loss;
    tcfg.channel.detector_efficiency = cfg.efficiency;
    tcfg.channel.eavesdropper = eve.get();
    tcfg.channel.intercept_fraction = cfg.eve_fraction;
    tcfg.bob_delays_measurement = cfg.bob_delays;

    for (int t = 0; t < cfg.trials; ++t) {
      SeededRng alice(derive_seed(cfg.seed, std::uint64_t(t) * 8 + 1));
      SeededRng bob(derive_seed(cfg.seed, std::uint64_t(t) * 8 + 2));
      SeededRng channel(derive_seed(cfg.seed, std::uint64_t(t) * 8 + 3));
      SeededRng eve_rng(derive_seed(cfg.seed, std::uint64_t(t) * 8 + 4));
      RoundResult res = toss_round(tcfg, {alice, bob, channel, eve_rng});

      TrialRow row;
      row.trial = t;
      row.verdict = res.verify.clean ? "clean" : "cheating_detected";
      row.winner = to_string(res.winner);
      row.mismatch_positions = res.verify.mismatch_positions;
      row.metrics = {
          {"n_sent", double(cfg.n)},
          {"n_detected", double(res.n_detected)},
          {"bob_guess", double(res.bob_guess)},
          {"claimed_basis", double(res.claimed_basis)},
          {"alice_cheated", res.alice_cheated ? 1.0 : 0.0},
          {"bob_won", res.winner == TossWinner::Bob ? 1.0 : 0.0},
          {"clean", res.verify.clean ? 1.0 : 0.0},
          {"cheat_detected", res.alice_cheated && !res.verify.clean ? 1.0 : 0.0},
          {"mismatches", double(res.verify.mismatch_positions.size())},
          {"rect_fill", round6(res.tables.fill_rate(0))},
          {"diag_fill", round6(res.tables.fill_rate(1))},
      };
      report.rows.push_back(std::move(row));
      if (transcript_file.is_open()) res.transcript.write_jsonl(transcript_file, t);
    }

    auto column = [&](const std::string& name) {
      std::vector<double> v;
      v.reserve(report.rows.size());
      for (const auto& row : report.rows) v.push_back(metric(row, name));
      return v;
    };
    report.aggregates.emplace_back("bob_win_rate", aggregate_of(column("bob_won")));
    report.aggregates.emplace_back("clean_rate", aggregate_of(column("clean")));
    report.aggregates.emplace_back("rect_fill", aggregate_of(column("rect_fill")));
    report.aggregates.emplace_back("diag_fill", aggregate_of(column("diag_fill")));
    std::vector<double> detected_given_cheat;
    for (const auto& row : report.rows)
      if (metric(row, "alice_cheated") == 1.0)
        detected_given_cheat.push_back(metric(row, "cheat_detected"));
    report.aggregates.emplace_back("cheat_detection_rate", aggregate_of(detected_given_cheat));
  }

  if (transcript_file.is_open() && !transcript_file.good())
    throw IoError("failed writing transcript file " + cfg.transcript_path);
  return report;
}

std::string StatsReport::to_csv() const {
  std::ostringstream out;
  out << "section,key,value\n";
  const json cfg_json = config.to_json();
  for (auto& [k, v] : cfg_json.items()) {
    out << "config," << k << ",";
    if (v.is_number_float()) out << fmt6(v.get<double>());
    else if (v.is_boolean()) out << (v.get<bool>() ? "true" : "false");
    else if (v.is_string()) out << v.get<std::string>();
    else out << v.dump();
    out << "\n";
  }
  out << "\ntrial,verdict";
  if (!rows.empty())
    for (const auto& [name, _] : rows.front().metrics) out << "," << name;
  out << "\n";
  for (const TrialRow& row : rows) {
    out << row.trial << "," << row.verdict;
    for (const auto& [_, value] : row.metrics) out << "," << fmt6(value);
    out << "\n";
  }
  out << "\nmetric,mean,radius4,samples\n";
  for (const auto& [name, agg] : aggregates)
    out << name << "," << fmt6(agg.mean) << "," << fmt6(agg.radius4) << "," << agg.samples
        << "\n";
  return out.str();
}

std::string StatsReport::to_json() const {
  json j;
  j["config"] = config.to_json();
  j["trials"] = json::array();
  for (const TrialRow& row : rows) {
    json r;
    r["trial"] = row.trial;
    r["verdict"] = row.verdict;
    if (config.protocol == "bb84") {
      r["seed"] = config.seed;
      r["eve"] = config.eve;
    } else {
      r["alice_mode"] = config.cheat;
      r["winner"] = row.winner;
      r["mismatch_positions"] = row.mismatch_positions;
    }
    json m;
    for (const auto& [name, value] : row.metrics) m[name] = value;
    r["metrics"] = m;
    j["trials"].push_back(r);
  }
  json aggs;
  for (const auto& [name, agg] : aggregates)
    aggs[name] = {{"mean", agg.mean}, {"radius4", agg.radius4}, {"samples", agg.samples}};
  j["aggregates"] = aggs;
  return j.dump(2) + "\n";
}

std::string StatsReport::to_text() const {
  std::ostringstream out;
  out << "protocol " << config.protocol << ", n=" << config.n << ", trials=" << config.trials
      << ", seed=" << config.seed << "\n";
  out << "channel: loss=" << fmt6(config.loss) << " efficiency=" << fmt6(config.efficiency)
      << "\n";
  if (config.protocol == "bb84") {
    out << "eve: " << config.eve;
    if (config.eve != "none") out << " (fraction " << fmt6(config.eve_fraction) << ")";
    out << ", auth: " << (config.auth ? "on" : "off") << "\n";
    int accepted = 0, rejected = 0, suppressed = 0;
    for (const TrialRow& row : rows) {
      if (row.verdict == "accepted") ++accepted;
      else if (row.verdict == "rejected") ++rejected;
      else ++suppressed;
    }
    out << "verdicts: accepted=" << accepted << " rejected=" << rejected
        << " suppressed=" << suppressed << "\n";
  } else {
    out << "cheat: " << config.cheat << "\n";
    int alice = 0, bob = 0;
    for (const TrialRow& row : rows)
      (metric(row, "bob_won") == 1.0 ? bob : alice)++;
    out << "wins: alice=" << alice << " bob=" << bob << "\n";
  }
  out << "aggregates (mean +- 4 standard errors):\n";
  for (const auto& [name, agg] : aggregates)
    out << "  " << name << " = " << fmt6(agg.mean) << " +- " << fmt6(agg.radius4) << "  (n="
        << agg.samples << ")\n";
  return out.str();
}

std::string StatsReport::render() const {
  if (config.output == "json") return to_json();
  if (config.output == "csv") return to_csv();
  return to_text();
}

}  // namespace qcrypt
