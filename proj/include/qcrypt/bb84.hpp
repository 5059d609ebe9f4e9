#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcrypt/channel.hpp"
#include "qcrypt/transcript.hpp"
#include "qcrypt/wc_auth.hpp"

namespace qcrypt {

// Protocol basis code: 0 rectilinear, 1 diagonal.
const Basis& protocol_basis(int code);

// Photon state carrying one key bit: rectilinear 0 -> horizontal, 1 ->
// vertical; diagonal 0 -> 45 degrees, 1 -> 135 degrees.
StateVector encode_pulse(int bit, int basis);

struct AliceRecord {
  std::vector<int> bits;
  std::vector<int> bases;
};

struct BobRecord {
  std::vector<int> bases;
  std::vector<bool> detected;
  std::vector<std::optional<int>> outcomes;
};

// Random bit string and basis string for n pulses. Draw order: n bit draws,
// then n basis draws. n must be positive.
AliceRecord alice_prepare(int n, RandomSource& rng);

// Shared secret bits with a consumption ledger. Bits leave through take()
// exactly once; asking beyond the unconsumed remainder, or re-offering
// already-spent material, is an error rather than silent reuse.
class SecretKey {
 public:
  explicit SecretKey(std::vector<int> bits);

  std::size_t size() const { return bits_.size(); }
  std::size_t available() const { return bits_.size() - cursor_; }
  std::vector<int> take(std::size_t nbits);

  const std::vector<int>& bits() const { return bits_; }  // inspection/tests
  std::size_t consumed() const { return cursor_; }

 private:
  std::vector<int> bits_;
  std::size_t cursor_ = 0;
};

// One-time pad: XOR the message with fresh key bits, consuming them.
std::vector<int> one_time_pad(SecretKey& key, const std::vector<int>& message_bits);

// The public discussion channel as the two protocol parties use it: every
// exchange is published to the log, optionally tagged and verified with
// one-time authentication. The receiver acts on the delivered copy, so an
// active adversary's substitution reaches the protocol unless a tag catches
// it; any verification failure aborts the session via SuppressedError.
class PublicChannel {
 public:
  explicit PublicChannel(ClassicalChannelLog& log) : log_(&log) {}
  PublicChannel(ClassicalChannelLog& log, AuthKeyPool& alice_pool, AuthKeyPool& bob_pool)
      : log_(&log), alice_pool_(&alice_pool), bob_pool_(&bob_pool) {}

  bool authenticated() const { return alice_pool_ != nullptr; }

  // Publish a message from `sender` ("alice" or "bob") and return the body
  // as accepted by the other party.
  nlohmann::json exchange(const std::string& sender, const nlohmann::json& body);

 private:
  ClassicalChannelLog* log_;
  AuthKeyPool* alice_pool_ = nullptr;
  AuthKeyPool* bob_pool_ = nullptr;
};

struct SiftResult {
  std::vector<int> kept_positions;  // pulse indices detected and basis-matched
  std::vector<int> alice_bits;      // aligned with kept_positions
  std::vector<int> bob_bits;

  bool empty() const { return kept_positions.empty(); }
  std::size_t size() const { return kept_positions.size(); }
};

// Public sifting: Bob reports which pulses he detected and the bases he
// used; Alice answers with the positions where his basis matched hers. Both
// sides keep the bits at those positions. No bit values are published.
SiftResult sift(const AliceRecord& alice, const BobRecord& bob, PublicChannel& channel);

enum class SessionVerdict { Accepted, Rejected, Suppressed };
const char* to_string(SessionVerdict v);

struct ComparisonOutcome {
  SessionVerdict verdict = SessionVerdict::Rejected;
  std::vector<int> compared_local;      // indices into the sift lists, ascending
  std::vector<int> compared_positions;  // same picks as pulse indices
  int disagreements = 0;
  std::vector<int> disagree_positions;  // pulse indices
  SecretKey alice_key{std::vector<int>{}};  // surviving bits, each party's own
  SecretKey bob_key{std::vector<int>{}};
};

// Random-subset disclosure: Bob sacrifices ceil(fraction * sift size) of his
// sifted bits, chosen without replacement (or exactly exact_count when set,
// capped at the sift size), publishing positions and values; Alice publishes
// the disagreeing positions and the verdict. More than allowed_disagreements
// mismatches (default 0) rejects. An empty sift rejects with zero-length
// evidence. The undisclosed remainder becomes the session key.
ComparisonOutcome detect_eavesdropping(const SiftResult& sifted, double fraction,
                                       std::optional<int> exact_count, RandomSource& chooser,
                                       PublicChannel& channel, int allowed_disagreements = 0);

struct SessionConfig {
  int n = 1000;
  double compare_fraction = 1.0 / 3.0;
  std::optional<int> compare_count;  // exact subset size override
  int allowed_disagreements = 0;     // nonzero is outside the base protocol
  QuantumChannelConfig channel;
  bool authenticate = false;
  int auth_pool_bits = 4096;
  int tag_width = 32;
  std::uint64_t auth_secret_seed = 7;  // both pools derive from this shared secret
  ClassicalChannelLog::SubstitutionRule classical_adversary;  // optional tampering

  void validate() const;
};

struct SessionRngs {
  RandomSource& alice;
  RandomSource& bob;
  RandomSource& channel;
  RandomSource& eve;
};

struct SessionResult {
  SessionVerdict verdict = SessionVerdict::Rejected;
  AliceRecord alice;
  BobRecord bob;
  int n_detected = 0;
  SiftResult sifted;
  ComparisonOutcome comparison;
  double qber = 0.0;  // disagreement fraction over all sifted positions
  Transcript transcript;
};

// One full key-distribution session: quantum transmission pulse by pulse,
// then sifting and eavesdropping detection over the public channel.
// Per-pulse draw order: Bob's basis bit; the channel rolls (see
// send_photon); Bob's measurement draw when the pulse is detected. The
// comparison subset is drawn from Bob's stream after the quantum phase.
SessionResult run_bb84_session(const SessionConfig& cfg, SessionRngs rngs);

// Audit: true when any kept, never-compared bit value appears in the
// classical log tied to its pulse position. Honest runs must keep this
// false; tests scan every session they touch.
bool leaks_unrevealed_bits(const Transcript& t, const SiftResult& sifted,
                           const std::vector<int>& compared_positions);

}  // namespace qcrypt
