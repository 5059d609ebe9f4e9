#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qcrypt/random.hpp"

namespace qcrypt {

using Amplitude = std::complex<double>;
using Vec2 = Eigen::Vector2cd;
using Vec4 = Eigen::Vector4cd;
using Mat2 = Eigen::Matrix2cd;

inline constexpr double kNormTolerance = 1e-9;    // invariant checks
inline constexpr double kRenormTolerance = 1e-6;  // constructor acceptance band
inline constexpr double kProbClamp = 1e-12;       // measurement branch cutoff

// Pure polarization state of one photon: a unit vector in the 2-d complex
// space, coordinates given in the rectilinear basis r1 = (1,0), r2 = (0,1).
// This is the open math value used by module-level operations and tests; the
// opaque transport handle protocols exchange is Photon, below.
class StateVector {
 public:
  // Accepts any finite vector whose norm is within kRenormTolerance of 1 and
  // renormalizes it; anything else is rejected.
  explicit StateVector(const Vec2& coords);

  const Vec2& coords() const { return coords_; }

 private:
  Vec2 coords_;
};

// Linear polarization at angle alpha from r1: (cos alpha, sin alpha).
StateVector photon_from_angle(double alpha);

// Probability that a photon polarized at alpha passes a linear analyzer at
// beta: cos^2(alpha - beta).
double transmission_probability(double alpha, double beta);

// <phi|psi>, conjugate-linear in the first argument.
Amplitude inner_product(const StateVector& phi, const StateVector& psi);

enum class BasisKind { Rectilinear, Diagonal, Circular, Angle };

// Orthonormal measurement basis {e0, e1}. The three named bases are mutually
// conjugate: every cross-basis overlap has squared magnitude 1/2.
class Basis {
 public:
  // Validates orthonormality to kNormTolerance.
  Basis(BasisKind kind, const Vec2& e0, const Vec2& e1);

  static const Basis& rectilinear();  // (1,0), (0,1)
  static const Basis& diagonal();     // 45 and 135 degrees
  static const Basis& circular();     // (1,i)/sqrt2, (i,1)/sqrt2
  // Linear basis at angle theta: e0 at theta, e1 at theta + pi/2.
  static Basis from_angle(double theta);

  BasisKind kind() const { return kind_; }
  const Vec2& e0() const { return e0_; }
  const Vec2& e1() const { return e1_; }
  const Vec2& vector(int outcome) const { return outcome == 0 ? e0_ : e1_; }
  double angle() const { return angle_; }  // meaningful for Angle only
  std::string label() const;

 private:
  BasisKind kind_;
  Vec2 e0_, e1_;
  double angle_ = 0.0;
};

// General projective measurement: a list of orthogonal projectors summing to
// the identity. Validated on construction.
class Measurement {
 public:
  explicit Measurement(std::vector<Mat2> projectors);
  static Measurement from_basis(const Basis& b);

  const std::vector<Mat2>& projectors() const { return projectors_; }
  std::size_t outcomes() const { return projectors_.size(); }

 private:
  std::vector<Mat2> projectors_;
};

struct MeasureResult {
  int outcome;
  StateVector post;  // collapsed state, renormalized
};

// Projective measurement with collapse. Consumes exactly one uniform draw
// regardless of the branch probabilities; branches below kProbClamp are
// dropped, so deterministic cases ignore the draw's value.
MeasureResult measure(const StateVector& psi, const Measurement& m, RandomSource& rng);
MeasureResult measure_in_basis(const StateVector& psi, const Basis& b, RandomSource& rng);

// Joint state of an ordered photon pair: unit vector in the 4-d product
// space, coordinates ordered (r1r1, r1r2, r2r1, r2r2).
class PairState {
 public:
  explicit PairState(const Vec4& coords);

  static PairState product(const StateVector& first, const StateVector& second);

  const Vec4& coords() const { return coords_; }

 private:
  Vec4 coords_;
};

// The singlet: (r1r2 - r2r1)/sqrt2. Its coordinates keep the same
// antisymmetric form in every polarization basis.
PairState epr_pair();

enum class PairHalf { First, Second };

struct PairMeasureResult {
  int outcome;
  StateVector remaining;  // collapsed state of the unmeasured photon
};

// Measure one member of a pair in a basis; the partner collapses to the
// renormalized conditional state. One uniform draw, same clamping as above.
PairMeasureResult measure_pair(const PairState& pair, PairHalf which, const Basis& b,
                               RandomSource& rng);

// Coordinates of a pair state in the product basis first x second:
// entry 2k+l is <first.e_k (x) second.e_l | psi>.
Vec4 pair_coordinates(const PairState& pair, const Basis& first, const Basis& second);

struct EntangledPair;

// Opaque transport handle for one photon in flight. The polarization is held
// privately with no accessor, and the type is move-only, so code outside this
// module can neither read nor duplicate an unknown state; measurement is the
// only way to extract information, and it consumes the handle. Halves of an
// entangled pair share a collapse cell: measuring either one fixes the
// conditional state the other will be measured in, whenever that happens.
class Photon {
 public:
  Photon(const Photon&) = delete;
  Photon& operator=(const Photon&) = delete;
  Photon(Photon&&) noexcept = default;
  Photon& operator=(Photon&&) noexcept = default;

  static Photon prepared(const StateVector& state);

 private:
  struct PairCell {
    std::optional<PairState> joint;
    std::array<std::optional<StateVector>, 2> collapsed;
  };
  struct Half {
    std::shared_ptr<PairCell> cell;
    int index;  // 0 = first, 1 = second
  };

  explicit Photon(StateVector s) : state_(std::move(s)) {}
  explicit Photon(Half h) : state_(std::move(h)) {}

  std::variant<StateVector, Half> state_;

  friend EntangledPair epr_photon_pair();
  friend std::pair<int, Photon> measure_photon(Photon&& ph, const Basis& b, RandomSource& rng);
  friend std::pair<int, Photon> measure_photon(Photon&& ph, const Measurement& m,
                                               RandomSource& rng);
};

struct EntangledPair {
  Photon first;
  Photon second;
};

// Source of entangled pairs in the singlet state. The two handles share one
// collapse cell.
EntangledPair epr_photon_pair();

// Measure a photon, consuming the handle; returns the outcome and a new
// handle holding the collapsed state. For an entangled half this collapses
// the partner as well, in whichever order the two are measured.
std::pair<int, Photon> measure_photon(Photon&& ph, const Basis& b, RandomSource& rng);

// General-measurement overload; defined for unentangled photons only.
std::pair<int, Photon> measure_photon(Photon&& ph, const Measurement& m, RandomSource& rng);

}  // namespace qcrypt
