#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "qcrypt/channel.hpp"
#include "qcrypt/eve.hpp"

using namespace qcrypt;

TEST_SUITE("channels") {

TEST_CASE("channel config validation") {
  QuantumChannelConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.loss_probability = 1.2;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.loss_probability = std::nan("");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.loss_probability = 0.0;
  cfg.detector_efficiency = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.detector_efficiency = 1.0;
  cfg.intercept_fraction = 2.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("pulse fates render as stable strings") {
  CHECK(std::string(to_string(PulseFate::Delivered)) == "delivered");
  CHECK(std::string(to_string(PulseFate::LostInTransit)) == "lost");
  CHECK(std::string(to_string(PulseFate::NotDetected)) == "not_detected");
  CHECK(std::string(to_string(PulseFate::Intercepted)) == "intercepted");
}

TEST_CASE("a lost pulse consumes only the loss roll") {
  QuantumChannelConfig cfg;
  cfg.loss_probability = 0.5;
  ScriptedSource channel({0.25});
  ScriptedSource eve_src;
  auto res = send_photon(cfg, 0, Photon::prepared(photon_from_angle(0.0)), channel, eve_src);
  CHECK(res.fate == PulseFate::LostInTransit);
  CHECK_FALSE(res.detected);
  CHECK_FALSE(res.photon.has_value());
  CHECK_FALSE(res.intercept.has_value());
  CHECK(channel.remaining() == 0);
}

TEST_CASE("a clean line delivers the photon unchanged") {
  QuantumChannelConfig cfg;
  ScriptedSource channel({0.5, 0.2});
  ScriptedSource eve_src;
  auto res =
      send_photon(cfg, 0, Photon::prepared(StateVector(Basis::rectilinear().e0())), channel, eve_src);
  CHECK(res.fate == PulseFate::Delivered);
  CHECK(res.detected);
  CHECK(channel.remaining() == 0);
  REQUIRE(res.photon.has_value());
  ScriptedSource meas({0.9});
  auto [outcome, rest] = measure_photon(std::move(*res.photon), Basis::rectilinear(), meas);
  (void)rest;
  CHECK(outcome == 0);
}

TEST_CASE("an undetected pulse keeps the photon") {
  QuantumChannelConfig cfg;
  cfg.detector_efficiency = 0.5;
  ScriptedSource channel({0.5, 0.75});
  ScriptedSource eve_src;
  auto res = send_photon(cfg, 3, Photon::prepared(photon_from_angle(0.0)), channel, eve_src);
  CHECK(res.fate == PulseFate::NotDetected);
  CHECK_FALSE(res.detected);
  CHECK(res.photon.has_value());
}

TEST_CASE("a full-tap eavesdropper never rolls for the fraction") {
  auto eve = make_intercept_resend({EveBasisRule::Kind::FixedRectilinear});
  QuantumChannelConfig cfg;
  cfg.eavesdropper = eve.get();
  ScriptedSource channel({0.5, 0.2});
  ScriptedSource eve_src({0.3});  // measurement draw only
  auto res = send_photon(cfg, 7, Photon::prepared(StateVector(Basis::diagonal().e0())), channel,
                         eve_src);
  CHECK(res.fate == PulseFate::Intercepted);
  CHECK(eve_src.remaining() == 0);
  REQUIRE(res.intercept.has_value());
  CHECK(res.intercept->basis == "rectilinear");
  CHECK(res.intercept->outcome == 0);
  CHECK(eve->observations().size() == 1);
  CHECK(eve->observations()[0].pulse_index == 7);
  ScriptedSource meas({0.9});
  auto [outcome, rest] = measure_photon(std::move(*res.photon), Basis::rectilinear(), meas);
  (void)rest;
  CHECK(outcome == 0);  // resent in the eavesdropper's basis
}

TEST_CASE("a partial tap rolls once and may pass the pulse through") {
  auto eve = make_intercept_resend({EveBasisRule::Kind::FixedRectilinear});
  QuantumChannelConfig cfg;
  cfg.eavesdropper = eve.get();
  cfg.intercept_fraction = 0.5;
  ScriptedSource channel({0.5, 0.2});
  ScriptedSource eve_src({0.7});  // fraction roll fails, nothing else drawn
  auto res = send_photon(cfg, 0, Photon::prepared(photon_from_angle(0.0)), channel, eve_src);
  CHECK(res.fate == PulseFate::Delivered);
  CHECK_FALSE(res.intercept.has_value());
  CHECK(eve_src.remaining() == 0);
  CHECK(eve->observations().empty());
}

TEST_CASE("a partial tap intercepts when the roll lands inside the fraction") {
  auto eve = make_intercept_resend({EveBasisRule::Kind::FixedRectilinear});
  QuantumChannelConfig cfg;
  cfg.eavesdropper = eve.get();
  cfg.intercept_fraction = 0.5;
  ScriptedSource channel({0.5, 0.2});
  ScriptedSource eve_src({0.3, 0.4});  // fraction roll, then the measurement draw
  auto res = send_photon(cfg, 0, Photon::prepared(StateVector(Basis::diagonal().e1())), channel,
                         eve_src);
  CHECK(res.fate == PulseFate::Intercepted);
  CHECK(eve_src.remaining() == 0);
  REQUIRE(res.intercept.has_value());
  CHECK(res.intercept->outcome == 0);
}

TEST_CASE("an intercepted pulse the detector misses counts as not detected") {
  auto eve = make_intercept_resend({EveBasisRule::Kind::FixedRectilinear});
  QuantumChannelConfig cfg;
  cfg.eavesdropper = eve.get();
  cfg.detector_efficiency = 0.5;
  ScriptedSource channel({0.5, 0.95});
  ScriptedSource eve_src({0.3});
  auto res = send_photon(cfg, 0, Photon::prepared(StateVector(Basis::diagonal().e0())), channel,
                         eve_src);
  CHECK(res.fate == PulseFate::NotDetected);
  CHECK_FALSE(res.detected);
  CHECK(res.intercept.has_value());
  CHECK(res.photon.has_value());
}

TEST_CASE("delivery statistics match loss times efficiency") {
  QuantumChannelConfig cfg;
  cfg.loss_probability = 0.1;
  cfg.detector_efficiency = 0.9;
  SeededRng channel(101), eve_src(102);
  const int n = 20000;
  int delivered = 0, lost = 0;
  for (int i = 0; i < n; ++i) {
    auto res = send_photon(cfg, i, Photon::prepared(photon_from_angle(0.0)), channel, eve_src);
    if (res.fate == PulseFate::Delivered) ++delivered;
    if (res.fate == PulseFate::LostInTransit) ++lost;
  }
  double p = 0.9 * 0.9;
  CHECK(std::abs(delivered / double(n) - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
  CHECK(std::abs(lost / double(n) - 0.1) <= 4.0 * std::sqrt(0.1 * 0.9 / n));
}

TEST_CASE("the public log numbers messages and keeps them verbatim") {
  ClassicalChannelLog log;
  ClassicalMessage a = log.publish("alice", "hello");  // copy: the log may reallocate
  ClassicalMessage b = log.publish("bob", "reply");
  CHECK(a.seq == 0);
  CHECK(b.seq == 1);
  CHECK(log.entries().size() == 2);
  CHECK(log.entries()[0].body == "hello");
  CHECK(log.entries()[0].effective() == "hello");
  CHECK_FALSE(log.entries()[0].tampered());
  CHECK(log.entries()[1].sender == "bob");
}

TEST_CASE("passive observers see every message as published") {
  ClassicalChannelLog log;
  std::vector<std::string> seen;
  log.add_passive_observer([&](const ClassicalMessage& m) { seen.push_back(m.body); });
  log.publish("alice", "one");
  log.publish("bob", "two");
  CHECK(seen == std::vector<std::string>{"one", "two"});
}

TEST_CASE("an active adversary rewrites the delivered copy but not the record") {
  ClassicalChannelLog log;
  log.set_active_adversary([](const std::string& sender, const std::string& body)
                               -> std::optional<std::string> {
    if (sender == "alice" && body == "x") return std::string("y");
    return std::nullopt;
  });
  const ClassicalMessage& hit = log.publish("alice", "x");
  CHECK(hit.tampered());
  CHECK(hit.body == "x");
  CHECK(hit.effective() == "y");
  const ClassicalMessage& miss = log.publish("bob", "x");
  CHECK_FALSE(miss.tampered());
  CHECK(miss.effective() == "x");
}

TEST_CASE("a substitution identical to the original does not count as tampering") {
  ClassicalChannelLog log;
  log.set_active_adversary(
      [](const std::string&, const std::string& body) { return std::optional<std::string>(body); });
  const ClassicalMessage& m = log.publish("alice", "same");
  CHECK_FALSE(m.tampered());
}

}  // TEST_SUITE
