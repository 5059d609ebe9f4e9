#include "qcrypt/bb84.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "qcrypt/eve.hpp"

namespace qcrypt {

using nlohmann::json;

const Basis& protocol_basis(int code) {
  if (code == 0) return Basis::rectilinear();
  if (code == 1) return Basis::diagonal();
  throw std::invalid_argument("protocol_basis: code must be 0 or 1");
}

StateVector encode_pulse(int bit, int basis) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("encode_pulse: bit must be 0 or 1");
  return StateVector(protocol_basis(basis).vector(bit));
}

AliceRecord alice_prepare(int n, RandomSource& rng) {
  if (n <= 0) throw std::invalid_argument("alice_prepare: n must be positive");
  AliceRecord rec;
  rec.bits.reserve(n);
  rec.bases.reserve(n);
  for (int i = 0; i < n; ++i) rec.bits.push_back(rng.bit());
  for (int i = 0; i < n; ++i) rec.bases.push_back(rng.bit());
  return rec;
}

SecretKey::SecretKey(std::vector<int> bits) : bits_(std::move(bits)) {
  for (int b : bits_)
    if (b != 0 && b != 1) throw std::invalid_argument("SecretKey: bits must be 0/1");
}

std::vector<int> SecretKey::take(std::size_t nbits) {
  if (nbits > available()) {
    if (nbits <= bits_.size())
      throw DoubleSpendError("secret key: " + std::to_string(nbits) + " bits requested, but " +
                             std::to_string(consumed()) + " of " + std::to_string(bits_.size()) +
                             " are already spent");
    throw KeyExhaustedError("secret key: " + std::to_string(nbits) + " bits requested, " +
                            std::to_string(available()) + " available");
  }
  std::vector<int> out(bits_.begin() + cursor_, bits_.begin() + cursor_ + nbits);
  cursor_ += nbits;
  return out;
}

std::vector<int> one_time_pad(SecretKey& key, const std::vector<int>& message_bits) {
  std::vector<int> pad = key.take(message_bits.size());
  std::vector<int> out(message_bits.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (message_bits[i] != 0 && message_bits[i] != 1)
      throw std::invalid_argument("one_time_pad: message bits must be 0/1");
    out[i] = message_bits[i] ^ pad[i];
  }
  return out;
}

json PublicChannel::exchange(const std::string& sender, const json& body) {
  if (sender != "alice" && sender != "bob")
    throw std::invalid_argument("PublicChannel: sender must be alice or bob");
  if (!authenticated()) {
    const ClassicalMessage& msg = log_->publish(sender, body.dump());
    return json::parse(msg.effective());
  }
  AuthKeyPool& out_pool = sender == "alice" ? *alice_pool_ : *bob_pool_;
  AuthKeyPool& in_pool = sender == "alice" ? *bob_pool_ : *alice_pool_;
  std::string body_text = body.dump();
  TagResult tr = tag_message(out_pool, body_text);
  json envelope = {{"body", body},
                   {"auth", {{"tag", tr.tag.hex()}, {"offset", tr.key_offset}}}};
  const ClassicalMessage& msg = log_->publish(sender, envelope.dump());
  json delivered = json::parse(msg.effective(), nullptr, false);
  if (delivered.is_discarded() || !delivered.contains("body") || !delivered.contains("auth"))
    throw SuppressedError("malformed authenticated message");
  std::string delivered_body = delivered["body"].dump();
  Tag tag = Tag::from_hex(delivered["auth"]["tag"].get<std::string>(), out_pool.tag_width());
  std::size_t offset = delivered["auth"]["offset"].get<std::size_t>();
  if (verify_tag(in_pool, delivered_body, tag, offset) != VerifyStatus::Accept)
    throw SuppressedError("message failed authentication");
  return delivered["body"];
}

SiftResult sift(const AliceRecord& alice, const BobRecord& bob, PublicChannel& channel) {
  std::size_t n = alice.bits.size();
  if (alice.bases.size() != n || bob.bases.size() != n || bob.detected.size() != n ||
      bob.outcomes.size() != n)
    throw std::invalid_argument("sift: record lengths disagree");

  json report;
  report["type"] = "bob_report";
  auto& detected = report["detected"] = json::array();
  auto& bases = report["bases"] = json::array();
  for (std::size_t i = 0; i < n; ++i)
    if (bob.detected[i]) {
      detected.push_back(i);
      bases.push_back(bob.bases[i]);
    }
  json seen_by_alice = channel.exchange("bob", report);

  json ok;
  ok["type"] = "basis_ok";
  auto& kept = ok["kept"] = json::array();
  for (std::size_t j = 0; j < seen_by_alice["detected"].size(); ++j) {
    int pos = seen_by_alice["detected"][j].get<int>();
    int basis = seen_by_alice["bases"][j].get<int>();
    if (pos < 0 || pos >= static_cast<int>(n)) continue;  // nonsense positions dropped
    if (basis == alice.bases[pos]) kept.push_back(pos);
  }
  json seen_by_bob = channel.exchange("alice", ok);

  // Each party keeps the bits at the positions it believes were confirmed;
  // with an honest channel the two views coincide.
  SiftResult out;
  for (const auto& p : seen_by_bob["kept"]) {
    int pos = p.get<int>();
    if (pos < 0 || pos >= static_cast<int>(n) || !bob.detected[pos] || !bob.outcomes[pos])
      continue;
    out.kept_positions.push_back(pos);
    out.alice_bits.push_back(alice.bits[pos]);
    out.bob_bits.push_back(*bob.outcomes[pos]);
  }
  return out;
}

const char* to_string(SessionVerdict v) {
  switch (v) {
    case SessionVerdict::Accepted: return "accepted";
    case SessionVerdict::Rejected: return "rejected";
    case SessionVerdict::Suppressed: return "suppressed";
  }
  return "unknown";
}

ComparisonOutcome detect_eavesdropping(const SiftResult& sifted, double fraction,
                                       std::optional<int> exact_count, RandomSource& chooser,
                                       PublicChannel& channel, int allowed_disagreements) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("detect_eavesdropping: fraction must be in [0, 1]");
  ComparisonOutcome out;
  int kept = static_cast<int>(sifted.size());
  if (kept == 0) {
    out.verdict = SessionVerdict::Rejected;
    return out;
  }
  int k = exact_count ? std::min(*exact_count, kept)
                      : static_cast<int>(std::ceil(fraction * kept));
  if (k < 0) throw std::invalid_argument("detect_eavesdropping: negative subset size");

  out.compared_local = chooser.sample_without_replacement(kept, k);
  std::sort(out.compared_local.begin(), out.compared_local.end());
  json reveal;
  reveal["type"] = "reveal";
  auto& positions = reveal["positions"] = json::array();
  auto& bits = reveal["bits"] = json::array();
  for (int j : out.compared_local) {
    positions.push_back(sifted.kept_positions[j]);
    bits.push_back(sifted.bob_bits[j]);
    out.compared_positions.push_back(sifted.kept_positions[j]);
  }
  json seen_by_alice = channel.exchange("bob", reveal);

  json verdict_msg;
  verdict_msg["type"] = "compare_result";
  auto& disagree = verdict_msg["disagree"] = json::array();
  int mismatches = 0;
  for (std::size_t j = 0; j < seen_by_alice["positions"].size(); ++j) {
    int pos = seen_by_alice["positions"][j].get<int>();
    int bit = seen_by_alice["bits"][j].get<int>();
    auto it = std::find(sifted.kept_positions.begin(), sifted.kept_positions.end(), pos);
    if (it == sifted.kept_positions.end()) {
      ++mismatches;  // revealed a position Alice never confirmed
      disagree.push_back(pos);
      continue;
    }
    int local = static_cast<int>(it - sifted.kept_positions.begin());
    if (sifted.alice_bits[local] != bit) {
      ++mismatches;
      disagree.push_back(pos);
    }
  }
  bool accept = mismatches <= allowed_disagreements;
  verdict_msg["verdict"] = accept ? "accept" : "reject";
  json seen_by_bob = channel.exchange("alice", verdict_msg);

  out.disagreements = mismatches;
  for (const auto& p : disagree) out.disagree_positions.push_back(p.get<int>());
  out.verdict = seen_by_bob["verdict"].get<std::string>() == "accept" ? SessionVerdict::Accepted
                                                                      : SessionVerdict::Rejected;
  if (out.verdict == SessionVerdict::Accepted) {
    std::vector<int> a_bits, b_bits;
    std::size_t next = 0;
    for (int j = 0; j < kept; ++j) {
      if (next < out.compared_local.size() && out.compared_local[next] == j) {
        ++next;
        continue;
      }
      a_bits.push_back(sifted.alice_bits[j]);
      b_bits.push_back(sifted.bob_bits[j]);
    }
    out.alice_key = SecretKey(std::move(a_bits));
    out.bob_key = SecretKey(std::move(b_bits));
  }
  return out;
}

void SessionConfig::validate() const {
  if (n <= 0) throw std::invalid_argument("session: n must be positive");
  if (compare_fraction < 0.0 || compare_fraction > 1.0)
    throw std::invalid_argument("session: compare_fraction must be in [0, 1]");
  if (compare_count && *compare_count < 0)
    throw std::invalid_argument("session: compare_count must be non-negative");
  if (allowed_disagreements < 0)
    throw std::invalid_argument("session: allowed_disagreements must be non-negative");
  if (auth_pool_bits < 0) throw std::invalid_argument("session: auth_pool_bits must be non-negative");
  if (tag_width < 1 || tag_width > 64)
    throw std::invalid_argument("session: tag_width must be in [1, 64]");
  channel.validate();
}

SessionResult run_bb84_session(const SessionConfig& cfg, SessionRngs rngs) {
  cfg.validate();
  SessionResult res;
  if (cfg.channel.eavesdropper) cfg.channel.eavesdropper->begin_session();

  res.alice = alice_prepare(cfg.n, rngs.alice);
  res.bob.bases.resize(cfg.n);
  res.bob.detected.assign(cfg.n, false);
  res.bob.outcomes.resize(cfg.n);

  for (int i = 0; i < cfg.n; ++i) {
    res.bob.bases[i] = rngs.bob.bit();
    Photon ph = Photon::prepared(encode_pulse(res.alice.bits[i], res.alice.bases[i]));
    DeliveryResult del = send_photon(cfg.channel, i, std::move(ph), rngs.channel, rngs.eve);
    res.transcript.pulses.push_back({i, del.fate, del.intercept});
    if (del.detected && del.photon) {
      auto [outcome, post] =
          measure_photon(std::move(*del.photon), protocol_basis(res.bob.bases[i]), rngs.bob);
      (void)post;
      res.bob.detected[i] = true;
      res.bob.outcomes[i] = outcome;
      ++res.n_detected;
    }
  }

  ClassicalChannelLog log;
  if (cfg.classical_adversary) log.set_active_adversary(cfg.classical_adversary);

  std::optional<AuthKeyPool> alice_pool, bob_pool;
  std::optional<PublicChannel> chan;
  if (cfg.authenticate) {
    SeededRng secret(derive_seed(cfg.auth_secret_seed, 0xA0707));
    std::vector<int> shared = random_bits(cfg.auth_pool_bits, secret);
    alice_pool.emplace(shared, cfg.tag_width);
    bob_pool.emplace(shared, cfg.tag_width);
    chan.emplace(log, *alice_pool, *bob_pool);
  } else {
    chan.emplace(log);
  }

  try {
    res.sifted = sift(res.alice, res.bob, *chan);
    int disagree = 0;
    for (std::size_t j = 0; j < res.sifted.size(); ++j)
      if (res.sifted.alice_bits[j] != res.sifted.bob_bits[j]) ++disagree;
    res.qber = res.sifted.empty() ? 0.0 : static_cast<double>(disagree) / res.sifted.size();
    res.comparison = detect_eavesdropping(res.sifted, cfg.compare_fraction, cfg.compare_count,
                                          rngs.bob, *chan, cfg.allowed_disagreements);
    res.verdict = res.comparison.verdict;
  } catch (const SuppressedError&) {
    res.verdict = SessionVerdict::Suppressed;
    res.comparison = ComparisonOutcome{};
    res.comparison.verdict = SessionVerdict::Suppressed;
  }
  res.transcript.messages = log.entries();
  return res;
}

bool leaks_unrevealed_bits(const Transcript& t, const SiftResult& sifted,
                           const std::vector<int>& compared_positions) {
  // Positions whose bit values must never be published.
  std::vector<int> secret = sifted.kept_positions;
  for (int p : compared_positions)
    secret.erase(std::remove(secret.begin(), secret.end(), p), secret.end());

  auto scan = [&](const json& j) -> bool {
    if (!j.is_object()) return false;
    if (j.contains("positions") && j.contains("bits") && j["positions"].is_array()) {
      for (const auto& p : j["positions"])
        for (int s : secret)
          if (p.is_number_integer() && p.get<int>() == s) return true;
    }
    if (j.contains("body")) {
      json inner = j["body"];
      if (inner.is_object() && inner.contains("positions") && inner.contains("bits"))
        for (const auto& p : inner["positions"])
          for (int s : secret)
            if (p.is_number_integer() && p.get<int>() == s) return true;
    }
    return false;
  };

  for (const ClassicalMessage& m : t.messages) {
    json published = json::parse(m.body, nullptr, false);
    if (!published.is_discarded() && scan(published)) return true;
    if (m.delivered) {
      json del = json::parse(*m.delivered, nullptr, false);
      if (!del.is_discarded() && scan(del)) return true;
    }
  }
  return false;
}

}  // namespace qcrypt
