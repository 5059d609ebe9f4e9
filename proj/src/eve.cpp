#include "qcrypt/eve.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qcrypt/bb84.hpp"

namespace qcrypt {

namespace {

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

class InterceptResend final : public EveStrategy {
 public:
  explicit InterceptResend(EveBasisRule rule) : rule_(rule) {
    if (rule_.kind == EveBasisRule::Kind::FixedAngle)
      angle_basis_.emplace(Basis::from_angle(rule_.angle));
  }

  std::string name() const override { return "intercept-resend/" + rule_.label(); }

  Photon intercept(int pulse_index, Photon&& photon, RandomSource& rng) override {
    const Basis* b;
    int code;
    double angle = 0.0;
    switch (rule_.kind) {
      case EveBasisRule::Kind::FixedRectilinear:
        b = &Basis::rectilinear();
        code = 0;
        break;
      case EveBasisRule::Kind::FixedDiagonal:
        b = &Basis::diagonal();
        code = 1;
        break;
      case EveBasisRule::Kind::UniformRandom: {
        int pick = rng.bit();
        b = pick ? &Basis::diagonal() : &Basis::rectilinear();
        code = pick;
        break;
      }
      case EveBasisRule::Kind::FixedAngle:
        b = &*angle_basis_;
        code = 2;
        angle = rule_.angle;
        break;
      default:
        throw std::logic_error("InterceptResend: unknown basis rule");
    }
    auto [outcome, post] = measure_photon(std::move(photon), *b, rng);
    record({pulse_index, code, angle, b->label(), outcome});
    return std::move(post);
  }

 private:
  EveBasisRule rule_;
  std::optional<Basis> angle_basis_;
};

}  // namespace

std::string EveBasisRule::label() const {
  switch (kind) {
    case Kind::FixedRectilinear: return "rect";
    case Kind::FixedDiagonal: return "diag";
    case Kind::UniformRandom: return "random";
    case Kind::FixedAngle: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "angle(%.6f)", angle);
      return buf;
    }
  }
  return "unknown";
}

std::unique_ptr<EveStrategy> make_intercept_resend(const EveBasisRule& rule) {
  return std::make_unique<InterceptResend>(rule);
}

std::unique_ptr<EveStrategy> parse_eve_strategy(const std::string& spec) {
  if (spec == "none" || spec.empty()) return nullptr;
  EveBasisRule rule;
  if (spec == "rect") {
    rule.kind = EveBasisRule::Kind::FixedRectilinear;
  } else if (spec == "diag") {
    rule.kind = EveBasisRule::Kind::FixedDiagonal;
  } else if (spec == "random") {
    rule.kind = EveBasisRule::Kind::UniformRandom;
  } else if (spec.rfind("angle:", 0) == 0) {
    rule.kind = EveBasisRule::Kind::FixedAngle;
    std::size_t used = 0;
    rule.angle = std::stod(spec.substr(6), &used);
    if (used != spec.size() - 6) throw std::invalid_argument("eve: bad angle in '" + spec + "'");
  } else {
    throw std::invalid_argument("eve: unknown strategy '" + spec + "'");
  }
  return make_intercept_resend(rule);
}

double eve_posterior_correct(const Basis& eve_basis, int outcome, int announced_basis) {
  const Vec2& e = eve_basis.vector(outcome);
  double p0 = std::norm(e.dot(encode_pulse(0, announced_basis).coords()));
  double p1 = std::norm(e.dot(encode_pulse(1, announced_basis).coords()));
  double total = p0 + p1;
  if (total <= 0.0) return 0.5;  // outcome impossible under both candidates
  return std::max(p0, p1) / total;
}

EveStats estimate_eve_stats(EveStrategy& strategy, int n, std::uint64_t seed) {
  SessionConfig cfg;
  cfg.n = n;
  cfg.compare_count = 0;  // score over the full sift, sacrificing nothing
  cfg.channel.eavesdropper = &strategy;

  SeededRng alice(derive_seed(seed, 1));
  SeededRng bob(derive_seed(seed, 2));
  SeededRng channel(derive_seed(seed, 3));
  SeededRng eve(derive_seed(seed, 4));
  SessionResult res = run_bb84_session(cfg, {alice, bob, channel, eve});

  std::vector<const EveObservation*> by_pulse(n, nullptr);
  for (const EveObservation& obs : strategy.observations()) by_pulse[obs.pulse_index] = &obs;

  EveStats stats;
  stats.sifted_samples = static_cast<int>(res.sifted.size());
  stats.low_confidence = n < 10000;
  double info_sum = 0.0, info_sumsq = 0.0;
  int disagreements = 0;
  for (std::size_t j = 0; j < res.sifted.size(); ++j) {
    int pulse = res.sifted.kept_positions[j];
    bool wrong = res.sifted.alice_bits[j] != res.sifted.bob_bits[j];
    if (wrong) ++disagreements;
    double info = 0.0;
    if (const EveObservation* obs = by_pulse[pulse]) {
      const Basis& eb = obs->basis_code == 0   ? Basis::rectilinear()
                        : obs->basis_code == 1 ? Basis::diagonal()
                                               : Basis::from_angle(obs->basis_angle);
      double p = eve_posterior_correct(eb, obs->outcome, res.alice.bases[pulse]);
      info = 1.0 - binary_entropy(p);
      if (obs->basis_code == 0 || obs->basis_code == 1) {
        bool matched = obs->basis_code == res.alice.bases[pulse];
        (matched ? stats.matched_samples : stats.mismatched_samples)++;
        if (wrong) (matched ? stats.matched_disagreements : stats.mismatched_disagreements)++;
      }
    }
    info_sum += info;
    info_sumsq += info * info;
  }
  int m = stats.sifted_samples;
  if (m > 0) {
    stats.info_bits = info_sum / m;
    stats.disturbance = static_cast<double>(disagreements) / m;
    if (m > 1) {
      double var = (info_sumsq - info_sum * info_sum / m) / (m - 1);
      stats.info_radius = 4.0 * std::sqrt(std::max(var, 0.0) / m);
    }
    stats.dist_radius = 4.0 * std::sqrt(stats.disturbance * (1.0 - stats.disturbance) / m);
  }
  return stats;
}

}  // namespace qcrypt
