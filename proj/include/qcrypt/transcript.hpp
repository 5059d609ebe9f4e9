#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "qcrypt/channel.hpp"

namespace qcrypt {

struct PulseEvent {
  int index = 0;
  PulseFate fate = PulseFate::Delivered;
  std::optional<InterceptRecord> intercept;
};

// Full machine-readable record of one protocol run: every pulse fate and
// every classical message. Serialized as JSON lines, one event per line.
struct Transcript {
  std::vector<PulseEvent> pulses;
  std::vector<ClassicalMessage> messages;

  // Pulse lines: {"type":"pulse","index":..,"fate":"..",("eve_basis":..,"eve_outcome":..)}
  // Message lines: {"type":"message","seq":..,"sender":"..","body":"<json text>",("delivered":"..")}
  // A trial field is prepended to every line when `trial` is set.
  void write_jsonl(std::ostream& out, std::optional<int> trial = std::nullopt) const;
};

}  // namespace qcrypt
