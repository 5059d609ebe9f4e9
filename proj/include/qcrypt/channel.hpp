#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qcrypt/quantum.hpp"
#include "qcrypt/random.hpp"

namespace qcrypt {

class EveStrategy;

// Lossy quantum channel with an imperfect detector at the far end and an
// optional eavesdropper in the middle. Order of hazards is fixed: loss in
// transit first, then interception, then the detection roll.
struct QuantumChannelConfig {
  double loss_probability = 0.0;
  double detector_efficiency = 1.0;
  EveStrategy* eavesdropper = nullptr;  // not owned; nullptr = untapped line
  double intercept_fraction = 1.0;      // share of pulses the eavesdropper touches

  void validate() const;
};

// Exactly one fate per pulse. Intercepted means the eavesdropper touched it
// AND it still reached the detector; an intercepted pulse the detector missed
// counts as NotDetected (the intercept record is kept either way).
enum class PulseFate { Delivered, LostInTransit, NotDetected, Intercepted };

const char* to_string(PulseFate f);

struct InterceptRecord {
  std::string basis;  // label of the measurement the eavesdropper used
  int outcome;
};

struct DeliveryResult {
  PulseFate fate;
  bool detected;                             // detector fired at the receiver
  std::optional<Photon> photon;              // absent when lost in transit
  std::optional<InterceptRecord> intercept;  // present when the eavesdropper measured
};

// Push one photon through the channel. Draw order per pulse, fixed for
// replay: loss roll (channel rng); the eavesdropper's fraction roll (its own
// rng, skipped when intercept_fraction == 1) and measurement draws; detection
// roll (channel rng, skipped when the pulse was lost).
DeliveryResult send_photon(const QuantumChannelConfig& cfg, int pulse_index, Photon&& photon,
                           RandomSource& channel_rng, RandomSource& eve_rng);

struct ClassicalMessage {
  std::size_t seq = 0;
  std::string sender;
  std::string body;                      // as published
  std::optional<std::string> delivered;  // substituted copy, when an active adversary rewrote it

  const std::string& effective() const { return delivered ? *delivered : body; }
  bool tampered() const { return delivered.has_value(); }
};

// Public classical channel: append-only log every party and every adversary
// can read. Passive observers see each message as published. An active
// adversary may substitute the delivered copy; the log keeps both forms, so
// tampering is visible to an auditor even when the receiver is fooled.
class ClassicalChannelLog {
 public:
  using SubstitutionRule =
      std::function<std::optional<std::string>(const std::string& sender, const std::string& body)>;
  using Observer = std::function<void(const ClassicalMessage&)>;

  const ClassicalMessage& publish(const std::string& sender, std::string body);

  const std::vector<ClassicalMessage>& entries() const { return entries_; }
  void add_passive_observer(Observer obs) { observers_.push_back(std::move(obs)); }
  void set_active_adversary(SubstitutionRule rule) { adversary_ = std::move(rule); }

 private:
  std::vector<ClassicalMessage> entries_;
  std::vector<Observer> observers_;
  SubstitutionRule adversary_;
};

}  // namespace qcrypt
