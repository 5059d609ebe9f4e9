#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qcrypt/quantum.hpp"
#include "qcrypt/random.hpp"

namespace qcrypt {

struct EveObservation {
  int pulse_index;
  int basis_code;      // 0 rectilinear, 1 diagonal, 2 neither (tilted linear)
  double basis_angle;  // meaningful when basis_code == 2
  std::string basis_label;
  int outcome;
};

// Per-photon eavesdropping procedure. A strategy sees only the measurement
// interface: it receives the opaque in-flight photon, may measure it in a
// basis of its choice, and must forward some photon downstream. It keeps its
// own notebook of observations for later analysis.
class EveStrategy {
 public:
  virtual ~EveStrategy() = default;

  virtual std::string name() const = 0;

  // Called once per intercepted pulse. Must return the photon to forward.
  virtual Photon intercept(int pulse_index, Photon&& photon, RandomSource& rng) = 0;

  void begin_session() { observations_.clear(); }
  const std::vector<EveObservation>& observations() const { return observations_; }
  const EveObservation& last_observation() const { return observations_.back(); }

 protected:
  void record(EveObservation obs) { observations_.push_back(std::move(obs)); }

 private:
  std::vector<EveObservation> observations_;
};

// How an intercept-resend eavesdropper picks its measurement basis.
struct EveBasisRule {
  enum class Kind { FixedRectilinear, FixedDiagonal, UniformRandom, FixedAngle };
  Kind kind = Kind::FixedRectilinear;
  double angle = 0.0;  // FixedAngle only

  std::string label() const;
};

// Intercept-resend: measure each touched photon per the rule and forward the
// collapsed photon. UniformRandom draws one bit from the eavesdropper rng per
// pulse (before the measurement draw) to pick rectilinear vs diagonal.
std::unique_ptr<EveStrategy> make_intercept_resend(const EveBasisRule& rule);

// Parse a strategy spec: "none", "rect", "diag", "random", "angle:<radians>".
// Returns nullptr for "none".
std::unique_ptr<EveStrategy> parse_eve_strategy(const std::string& spec);

struct EveStats {
  double info_bits = 0.0;     // mean expected information per sifted bit
  double info_radius = 0.0;   // 4 standard errors
  double disturbance = 0.0;   // disagreement rate on sifted bits
  double dist_radius = 0.0;   // 4 standard errors
  int sifted_samples = 0;
  bool low_confidence = false;  // fewer than 10^4 pulses requested
  // Disturbance split by whether the eavesdropper's basis matched the
  // sender's; only populated for strategies measuring in protocol bases.
  int matched_samples = 0;
  int matched_disagreements = 0;
  int mismatched_samples = 0;
  int mismatched_disagreements = 0;
};

// Monte Carlo estimate of the information/disturbance pair for a strategy:
// runs one lossless key-distribution session of n pulses (no comparison
// phase) and scores the eavesdropper over the sifted positions. Information
// per bit is 1 - H2(p) where p is the posterior probability of the sent bit
// given the eavesdropper's basis, its outcome, and the later basis
// announcement; pulses it never touched contribute zero.
EveStats estimate_eve_stats(EveStrategy& strategy, int n, std::uint64_t seed);

// Posterior probability that the eavesdropper's best guess of the sent bit
// is right, given its measurement basis, its outcome, and the announced
// preparation basis. Computed from the public candidate states.
double eve_posterior_correct(const Basis& eve_basis, int outcome, int announced_basis);

}  // namespace qcrypt
