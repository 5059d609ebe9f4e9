#include "qcrypt/channel.hpp"

#include <stdexcept>
#include <utility>

#include "qcrypt/eve.hpp"

namespace qcrypt {

void QuantumChannelConfig::validate() const {
  if (!(loss_probability >= 0.0 && loss_probability <= 1.0))
    throw std::invalid_argument("channel: loss_probability must be in [0, 1]");
  if (!(detector_efficiency >= 0.0 && detector_efficiency <= 1.0))
    throw std::invalid_argument("channel: detector_efficiency must be in [0, 1]");
  if (!(intercept_fraction >= 0.0 && intercept_fraction <= 1.0))
    throw std::invalid_argument("channel: intercept_fraction must be in [0, 1]");
}

const char* to_string(PulseFate f) {
  switch (f) {
    case PulseFate::Delivered: return "delivered";
    case PulseFate::LostInTransit: return "lost";
    case PulseFate::NotDetected: return "not_detected";
    case PulseFate::Intercepted: return "intercepted";
  }
  return "unknown";
}

DeliveryResult send_photon(const QuantumChannelConfig& cfg, int pulse_index, Photon&& photon,
                           RandomSource& channel_rng, RandomSource& eve_rng) {
  if (channel_rng.uniform01() < cfg.loss_probability)
    return {PulseFate::LostInTransit, false, std::nullopt, std::nullopt};

  std::optional<InterceptRecord> intercept;
  Photon travelling = std::move(photon);
  if (cfg.eavesdropper) {
    bool touch = cfg.intercept_fraction >= 1.0 || eve_rng.uniform01() < cfg.intercept_fraction;
    if (touch) {
      travelling = cfg.eavesdropper->intercept(pulse_index, std::move(travelling), eve_rng);
      const EveObservation& obs = cfg.eavesdropper->last_observation();
      intercept = InterceptRecord{obs.basis_label, obs.outcome};
    }
  }

  bool detected = channel_rng.uniform01() < cfg.detector_efficiency;
  PulseFate fate = !detected ? PulseFate::NotDetected
                   : intercept ? PulseFate::Intercepted
                               : PulseFate::Delivered;
  return {fate, detected, std::move(travelling), std::move(intercept)};
}

const ClassicalMessage& ClassicalChannelLog::publish(const std::string& sender, std::string body) {
  ClassicalMessage msg;
  msg.seq = entries_.size();
  msg.sender = sender;
  msg.body = std::move(body);
  if (adversary_) {
    auto sub = adversary_(sender, msg.body);
    if (sub && *sub != msg.body) msg.delivered = std::move(*sub);
  }
  entries_.push_back(std::move(msg));
  const ClassicalMessage& stored = entries_.back();
  for (auto& obs : observers_) obs(stored);
  return stored;
}

}  // namespace qcrypt
