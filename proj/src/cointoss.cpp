#include "qcrypt/cointoss.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include "qcrypt/bb84.hpp"

namespace qcrypt {

using nlohmann::json;

double TossTables::fill_rate(int basis) const {
  const auto& t = table(basis);
  if (t.empty()) return 0.0;
  std::size_t filled = 0;
  for (const auto& e : t)
    if (e) ++filled;
  return static_cast<double>(filled) / t.size();
}

VerifyReport verify_certificate(int claimed_basis, const std::vector<int>& claimed_bits,
                                const TossTables& tables) {
  if (claimed_basis != 0 && claimed_basis != 1)
    throw std::invalid_argument("verify_certificate: basis must be 0 or 1");
  std::size_t n = claimed_bits.size();
  if (tables.rect.size() != n || tables.diag.size() != n)
    throw std::invalid_argument("verify_certificate: table sizes disagree with claim");

  VerifyReport rep;
  const auto& same = tables.table(claimed_basis);
  const auto& other = tables.table(1 - claimed_basis);
  int other_agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (same[i] && *same[i] != claimed_bits[i]) rep.mismatch_positions.push_back(i);
    if (other[i]) {
      ++rep.other_samples;
      if (*other[i] == claimed_bits[i]) ++other_agree;
    }
  }
  if (rep.other_samples > 0)
    rep.other_agreement = static_cast<double>(other_agree) / rep.other_samples;
  rep.correlation_conclusive = rep.other_samples >= 20;
  if (rep.correlation_conclusive) {
    double band = 4.0 * std::sqrt(0.25 / rep.other_samples);
    rep.correlation_violation = std::abs(rep.other_agreement - 0.5) > band;
  }
  rep.clean = rep.mismatch_positions.empty() && !rep.correlation_violation;
  return rep;
}

CheatMode CheatMode::parse(const std::string& spec, double storage_loss, double angle) {
  CheatMode m;
  m.storage_loss = storage_loss;
  m.angle = angle;
  if (spec == "honest") m.kind = Kind::Honest;
  else if (spec == "late-fabrication") m.kind = Kind::LateFabrication;
  else if (spec == "mixed-bases") m.kind = Kind::MixedBases;
  else if (spec == "mixed-angle") m.kind = Kind::MixedAngle;
  else if (spec == "epr") m.kind = Kind::EprAttack;
  else throw std::invalid_argument("cheat: unknown mode '" + spec + "'");
  return m;
}

std::string CheatMode::label() const {
  switch (kind) {
    case Kind::Honest: return "honest";
    case Kind::LateFabrication: return "late-fabrication";
    case Kind::MixedBases: return "mixed-bases";
    case Kind::MixedAngle: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "mixed-angle(%.6f)", angle);
      return buf;
    }
    case Kind::EprAttack: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "epr(loss=%.6f)", storage_loss);
      return buf;
    }
  }
  return "unknown";
}

void TossConfig::validate() const {
  if (n <= 0) throw std::invalid_argument("toss: n must be positive");
  if (mode.storage_loss < 0.0 || mode.storage_loss > 1.0)
    throw std::invalid_argument("toss: storage_loss must be in [0, 1]");
  if (!std::isfinite(mode.angle)) throw std::invalid_argument("toss: angle must be finite");
  channel.validate();
}

const char* to_string(TossWinner w) { return w == TossWinner::Alice ? "alice" : "bob"; }

RoundResult toss_round(const TossConfig& cfg, TossRngs rngs) {
  cfg.validate();
  using Kind = CheatMode::Kind;
  const Kind kind = cfg.mode.kind;
  const int n = cfg.n;

  RoundResult res;
  res.n = n;
  res.tables.rect.resize(n);
  res.tables.diag.resize(n);

  // Alice's preparation draws.
  int honest_basis = -1;
  std::vector<int> bits;
  std::vector<int> pulse_bases;  // MixedBases only
  if (kind == Kind::Honest || kind == Kind::LateFabrication) {
    honest_basis = rngs.alice.bit();
    res.honest_basis = honest_basis;
  }
  if (kind != Kind::EprAttack) {
    bits.reserve(n);
    for (int i = 0; i < n; ++i) bits.push_back(rngs.alice.bit());
    res.honest_bits = bits;
  }
  if (kind == Kind::MixedBases) {
    pulse_bases.reserve(n);
    for (int i = 0; i < n; ++i) pulse_bases.push_back(rngs.alice.bit());
  }

  std::optional<Basis> tilted;
  if (kind == Kind::MixedAngle) tilted.emplace(Basis::from_angle(cfg.mode.angle));

  std::vector<std::optional<Photon>> kept_by_alice(n);  // EprAttack partners
  std::vector<std::optional<Photon>> stored_by_bob(n);  // delayed measurement
  std::vector<int> bob_bases(n);

  for (int i = 0; i < n; ++i) {
    bob_bases[i] = rngs.bob.bit();
    Photon outgoing = [&]() -> Photon {
      switch (kind) {
        case Kind::Honest:
        case Kind::LateFabrication:
          return Photon::prepared(encode_pulse(bits[i], honest_basis));
        case Kind::MixedBases:
          return Photon::prepared(encode_pulse(bits[i], pulse_bases[i]));
        case Kind::MixedAngle:
          return Photon::prepared(StateVector(tilted->vector(bits[i])));
        case Kind::EprAttack: {
          EntangledPair pair = epr_photon_pair();
          kept_by_alice[i].emplace(std::move(pair.first));
          return std::move(pair.second);
        }
      }
      throw std::logic_error("toss_round: unknown mode");
    }();

    DeliveryResult del = send_photon(cfg.channel, i, std::move(outgoing), rngs.channel, rngs.eve);
    res.transcript.pulses.push_back({i, del.fate, del.intercept});
    if (!del.detected || !del.photon) continue;
    ++res.n_detected;
    if (cfg.bob_delays_measurement) {
      stored_by_bob[i] = std::move(*del.photon);
    } else {
      auto [outcome, post] =
          measure_photon(std::move(*del.photon), protocol_basis(bob_bases[i]), rngs.bob);
      (void)post;
      (bob_bases[i] == 0 ? res.tables.rect : res.tables.diag)[i] = outcome;
    }
  }

  res.bob_guess = rngs.bob.bit();

  ClassicalChannelLog log;
  log.publish("bob", json{{"type", "guess"}, {"basis", res.bob_guess}}.dump());

  // Alice's claim.
  switch (kind) {
    case Kind::Honest:
      res.claimed_basis = honest_basis;
      res.claimed_bits = bits;
      break;
    case Kind::LateFabrication:
      if (res.bob_guess != honest_basis) {  // she already won; no need to cheat
        res.claimed_basis = honest_basis;
        res.claimed_bits = bits;
      } else {
        res.alice_cheated = true;
        res.claimed_basis = 1 - res.bob_guess;
        res.claimed_bits.reserve(n);
        for (int i = 0; i < n; ++i) res.claimed_bits.push_back(rngs.alice.bit());
      }
      break;
    case Kind::MixedBases:
    case Kind::MixedAngle:
      res.alice_cheated = true;
      res.claimed_basis = 1 - res.bob_guess;
      res.claimed_bits = bits;
      break;
    case Kind::EprAttack: {
      res.alice_cheated = true;
      res.claimed_basis = 1 - res.bob_guess;
      const Basis& claim_basis = protocol_basis(res.claimed_basis);
      res.claimed_bits.resize(n);
      for (int i = 0; i < n; ++i) {
        bool lost = rngs.alice.uniform01() < cfg.mode.storage_loss;
        if (lost || !kept_by_alice[i]) {
          res.claimed_bits[i] = rngs.alice.bit();
          continue;
        }
        auto [outcome, post] =
            measure_photon(std::move(*kept_by_alice[i]), claim_basis, rngs.alice);
        (void)post;
        res.claimed_bits[i] = 1 - outcome;  // partners anticorrelate in any shared basis
      }
      break;
    }
  }

  json claim;
  claim["type"] = "claim";
  claim["basis"] = res.claimed_basis;
  claim["bits"] = res.claimed_bits;
  log.publish("alice", claim.dump());

  // Bob's stored photons, measured only now.
  if (cfg.bob_delays_measurement) {
    for (int i = 0; i < n; ++i) {
      if (!stored_by_bob[i]) continue;
      auto [outcome, post] =
          measure_photon(std::move(*stored_by_bob[i]), protocol_basis(bob_bases[i]), rngs.bob);
      (void)post;
      (bob_bases[i] == 0 ? res.tables.rect : res.tables.diag)[i] = outcome;
    }
  }

  res.winner = res.claimed_basis == res.bob_guess ? TossWinner::Bob : TossWinner::Alice;
  res.verify = verify_certificate(res.claimed_basis, res.claimed_bits, res.tables);

  json verdict;
  verdict["type"] = "verification";
  verdict["clean"] = res.verify.clean;
  verdict["mismatches"] = res.verify.mismatch_positions;
  verdict["winner"] = to_string(res.winner);
  log.publish("bob", verdict.dump());

  res.transcript.messages = log.entries();
  return res;
}

}  // namespace qcrypt
