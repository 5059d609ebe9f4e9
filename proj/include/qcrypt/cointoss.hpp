#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcrypt/channel.hpp"
#include "qcrypt/random.hpp"
#include "qcrypt/transcript.hpp"

namespace qcrypt {

// Bob's two record tables: one per measuring basis, holes (nullopt) where
// the pulse went undetected or he measured in the other basis. At most one
// table holds an entry per position.
struct TossTables {
  std::vector<std::optional<int>> rect;
  std::vector<std::optional<int>> diag;

  const std::vector<std::optional<int>>& table(int basis) const { return basis == 0 ? rect : diag; }
  double fill_rate(int basis) const;
};

struct VerifyReport {
  bool clean = true;
  std::vector<int> mismatch_positions;  // claimed-basis table entries that differ
  // Agreement between the claimed bits and the other-basis table, which for
  // an honest claim is coin-flip noise.
  int other_samples = 0;
  double other_agreement = 0.0;
  bool correlation_conclusive = false;  // other_samples >= 20
  bool correlation_violation = false;   // |agreement - 1/2| > 4 sigma
};

// Certificate check after the claim is opened: every non-hole entry of the
// claimed-basis table must equal the claimed bit there, and the other-basis
// table must show no correlation with the claimed bits (binomial 4-sigma
// band, binding only with at least 20 samples).
VerifyReport verify_certificate(int claimed_basis, const std::vector<int>& claimed_bits,
                                const TossTables& tables);

// Alice's play style. Honest follows the protocol. LateFabrication claims
// the opposite basis with freshly invented bits when she lost the guess.
// MixedBases encodes each bit in a per-pulse random basis, MixedAngle in a
// fixed tilted linear basis, both always claiming the basis Bob did not
// guess. EprAttack sends halves of entangled pairs, keeps the partners, and
// after the guess measures them in the claimed basis (losing each stored
// photon to decoherence with probability storage_loss).
struct CheatMode {
  enum class Kind { Honest, LateFabrication, MixedBases, MixedAngle, EprAttack };
  Kind kind = Kind::Honest;
  double storage_loss = 0.0;        // EprAttack
  double angle = 0.39269908169872414;  // MixedAngle tilt, pi/8

  static CheatMode parse(const std::string& spec, double storage_loss, double angle);
  std::string label() const;
};

struct TossConfig {
  int n = 1000;
  CheatMode mode;
  QuantumChannelConfig channel;
  // When set, Bob stores arrived photons and measures them only after
  // announcing his guess; outcomes must not depend on this.
  bool bob_delays_measurement = false;

  void validate() const;
};

struct TossRngs {
  RandomSource& alice;
  RandomSource& bob;
  RandomSource& channel;
  RandomSource& eve;
};

enum class TossWinner { Alice, Bob };
const char* to_string(TossWinner w);

struct RoundResult {
  int n = 0;
  int n_detected = 0;
  int bob_guess = 0;
  int claimed_basis = 0;
  bool alice_cheated = false;
  TossWinner winner = TossWinner::Alice;  // by the opened claim
  VerifyReport verify;
  TossTables tables;
  std::vector<int> claimed_bits;
  std::vector<int> honest_bits;          // as actually encoded; empty for EprAttack
  std::optional<int> honest_basis;       // exists only when one basis was used throughout
  Transcript transcript;
};

// One full coin-toss round. Draw orders, fixed for replay:
//  - Alice (Honest, LateFabrication): basis bit, then n data bits.
//    MixedBases: n data bits, then n per-pulse basis bits. MixedAngle: n
//    data bits. EprAttack: nothing before the claim phase.
//  - Bob: one basis bit per pulse inside the loop; his measurement draw
//    follows immediately when the pulse is detected (or, delaying, after the
//    guess in pulse order); the guess bit comes after the quantum phase.
//  - Claim phase (Alice's rng): LateFabrication draws n fresh bits when she
//    fabricates. EprAttack, per pulse: a storage-survival draw, then either
//    the measurement draw or one fabricated bit.
RoundResult toss_round(const TossConfig& cfg, TossRngs rngs);

}  // namespace qcrypt
