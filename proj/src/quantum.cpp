#include "qcrypt/quantum.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace qcrypt {

namespace {

constexpr Amplitude kI{0.0, 1.0};

void require_finite(const Vec2& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite coordinates");
}

// One uniform draw over a clamped, renormalized branch distribution.
int pick_branch(std::vector<double>& probs, RandomSource& rng) {
  double total = 0.0;
  for (double& p : probs) {
    if (p < kProbClamp) p = 0.0;
    total += p;
  }
  if (total <= 0.0) throw std::logic_error("measurement: all branch probabilities vanish");
  double u = rng.uniform01() * total;
  double cum = 0.0;
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    cum += probs[k];
    if (u < cum) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

StateVector::StateVector(const Vec2& coords) : coords_(coords) {
  require_finite(coords, "StateVector");
  double n = coords_.norm();
  if (std::abs(n - 1.0) > kRenormTolerance)
    throw std::invalid_argument("StateVector: norm " + std::to_string(n) + " not within 1e-6 of 1");
  coords_ /= n;
}

StateVector photon_from_angle(double alpha) {
  if (!std::isfinite(alpha)) throw std::invalid_argument("photon_from_angle: non-finite angle");
  return StateVector(Vec2(std::cos(alpha), std::sin(alpha)));
}

double transmission_probability(double alpha, double beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta))
    throw std::invalid_argument("transmission_probability: non-finite angle");
  double c = std::cos(alpha - beta);
  return c * c;
}

Amplitude inner_product(const StateVector& phi, const StateVector& psi) {
  return phi.coords().dot(psi.coords());
}

Basis::Basis(BasisKind kind, const Vec2& e0, const Vec2& e1) : kind_(kind), e0_(e0), e1_(e1) {
  require_finite(e0, "Basis");
  require_finite(e1, "Basis");
  if (std::abs(e0_.norm() - 1.0) > kNormTolerance || std::abs(e1_.norm() - 1.0) > kNormTolerance)
    throw std::invalid_argument("Basis: vectors must be unit length");
  if (std::abs(e0_.dot(e1_)) > kNormTolerance)
    throw std::invalid_argument("Basis: vectors must be orthogonal");
}

const Basis& Basis::rectilinear() {
  static const Basis b(BasisKind::Rectilinear, Vec2(1.0, 0.0), Vec2(0.0, 1.0));
  return b;
}

const Basis& Basis::diagonal() {
  static const double s = 1.0 / std::sqrt(2.0);
  static const Basis b(BasisKind::Diagonal, Vec2(s, s), Vec2(-s, s));
  return b;
}

const Basis& Basis::circular() {
  static const double s = 1.0 / std::sqrt(2.0);
  static const Basis b(BasisKind::Circular, Vec2(Amplitude(s, 0.0), s * kI),
                       Vec2(s * kI, Amplitude(s, 0.0)));
  return b;
}

Basis Basis::from_angle(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("Basis::from_angle: non-finite angle");
  Basis b(BasisKind::Angle, Vec2(std::cos(theta), std::sin(theta)),
          Vec2(-std::sin(theta), std::cos(theta)));
  b.angle_ = theta;
  return b;
}

std::string Basis::label() const {
  switch (kind_) {
    case BasisKind::Rectilinear: return "rectilinear";
    case BasisKind::Diagonal: return "diagonal";
    case BasisKind::Circular: return "circular";
    case BasisKind::Angle: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "angle(%.6f)", angle_);
      return buf;
    }
  }
  return "unknown";
}

Measurement::Measurement(std::vector<Mat2> projectors) : projectors_(std::move(projectors)) {
  if (projectors_.empty()) throw std::invalid_argument("Measurement: no projectors");
  Mat2 sum = Mat2::Zero();
  for (std::size_t i = 0; i < projectors_.size(); ++i) {
    const Mat2& p = projectors_[i];
    if (!p.allFinite()) throw std::invalid_argument("Measurement: non-finite projector");
    if ((p - p.adjoint()).norm() > kNormTolerance)
      throw std::invalid_argument("Measurement: projector not hermitian");
    if ((p * p - p).norm() > kNormTolerance)
      throw std::invalid_argument("Measurement: projector not idempotent");
    for (std::size_t j = 0; j < i; ++j)
      if ((p * projectors_[j]).norm() > kNormTolerance)
        throw std::invalid_argument("Measurement: projectors not mutually orthogonal");
    sum += p;
  }
  if ((sum - Mat2::Identity()).norm() > kNormTolerance)
    throw std::invalid_argument("Measurement: projectors do not sum to identity");
}

Measurement Measurement::from_basis(const Basis& b) {
  std::vector<Mat2> ps;
  ps.push_back(b.e0() * b.e0().adjoint());
  ps.push_back(b.e1() * b.e1().adjoint());
  return Measurement(std::move(ps));
}

MeasureResult measure(const StateVector& psi, const Measurement& m, RandomSource& rng) {
  std::vector<double> probs(m.outcomes());
  for (std::size_t k = 0; k < m.outcomes(); ++k)
    probs[k] = psi.coords().dot(m.projectors()[k] * psi.coords()).real();
  int k = pick_branch(probs, rng);
  Vec2 v = m.projectors()[k] * psi.coords();
  return {k, StateVector(v / v.norm())};
}

MeasureResult measure_in_basis(const StateVector& psi, const Basis& b, RandomSource& rng) {
  Amplitude a0 = b.e0().dot(psi.coords());
  Amplitude a1 = b.e1().dot(psi.coords());
  std::vector<double> probs{std::norm(a0), std::norm(a1)};
  int k = pick_branch(probs, rng);
  Vec2 v = b.vector(k) * (k == 0 ? a0 : a1);
  return {k, StateVector(v / v.norm())};
}

PairState::PairState(const Vec4& coords) : coords_(coords) {
  if (!coords_.allFinite()) throw std::invalid_argument("PairState: non-finite coordinates");
  double n = coords_.norm();
  if (std::abs(n - 1.0) > kRenormTolerance)
    throw std::invalid_argument("PairState: norm not within 1e-6 of 1");
  coords_ /= n;
}

PairState PairState::product(const StateVector& first, const StateVector& second) {
  Vec4 c;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c[2 * i + j] = first.coords()[i] * second.coords()[j];
  return PairState(c);
}

PairState epr_pair() {
  double s = 1.0 / std::sqrt(2.0);
  return PairState(Vec4(0.0, s, -s, 0.0));
}

PairMeasureResult measure_pair(const PairState& pair, PairHalf which, const Basis& b,
                               RandomSource& rng) {
  // Unnormalized partner state for each outcome k: contract the measured
  // slot with e_k. Its squared norm is the branch probability.
  std::array<Vec2, 2> w;
  for (int k = 0; k < 2; ++k) {
    const Vec2& e = b.vector(k);
    for (int other = 0; other < 2; ++other) {
      Amplitude acc = 0.0;
      for (int mine = 0; mine < 2; ++mine) {
        int idx = which == PairHalf::First ? 2 * mine + other : 2 * other + mine;
        acc += std::conj(e[mine]) * pair.coords()[idx];
      }
      w[k][other] = acc;
    }
  }
  std::vector<double> probs{w[0].squaredNorm(), w[1].squaredNorm()};
  int k = pick_branch(probs, rng);
  return {k, StateVector(w[k] / w[k].norm())};
}

Vec4 pair_coordinates(const PairState& pair, const Basis& first, const Basis& second) {
  Vec4 c;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      Amplitude acc = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          acc += std::conj(first.vector(k)[i] * second.vector(l)[j]) * pair.coords()[2 * i + j];
      c[2 * k + l] = acc;
    }
  return c;
}

Photon Photon::prepared(const StateVector& state) { return Photon(state); }

EntangledPair epr_photon_pair() {
  auto cell = std::make_shared<Photon::PairCell>();
  cell->joint = epr_pair();
  return {Photon(Photon::Half{cell, 0}), Photon(Photon::Half{cell, 1})};
}

std::pair<int, Photon> measure_photon(Photon&& ph, const Basis& b, RandomSource& rng) {
  if (auto* pure = std::get_if<StateVector>(&ph.state_)) {
    MeasureResult r = measure_in_basis(*pure, b, rng);
    return {r.outcome, Photon::prepared(r.post)};
  }
  auto& half = std::get<Photon::Half>(ph.state_);
  Photon::PairCell& cell = *half.cell;
  if (cell.joint) {
    PairMeasureResult r = measure_pair(*cell.joint, half.index == 0 ? PairHalf::First : PairHalf::Second, b, rng);
    cell.collapsed[1 - half.index] = r.remaining;
    cell.joint.reset();
    return {r.outcome, Photon::prepared(StateVector(b.vector(r.outcome)))};
  }
  if (!cell.collapsed[half.index])
    throw std::logic_error("measure_photon: pair cell holds no state for this half");
  MeasureResult r = measure_in_basis(*cell.collapsed[half.index], b, rng);
  return {r.outcome, Photon::prepared(r.post)};
}

std::pair<int, Photon> measure_photon(Photon&& ph, const Measurement& m, RandomSource& rng) {
  auto* pure = std::get_if<StateVector>(&ph.state_);
  if (!pure)
    throw std::logic_error("measure_photon: general measurements on entangled halves unsupported; measure in a basis");
  MeasureResult r = measure(*pure, m, rng);
  return {r.outcome, Photon::prepared(r.post)};
}

}  // namespace qcrypt
