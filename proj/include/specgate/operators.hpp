#pragma once

// Finite operator models and their spectral data.
//
// Every operator acts on C^N with the Euclidean norm; functionals act through
// the bilinear pairing <x', x> = sum x'_j x_j. Infinite-dimensional shifts are
// represented by their N-dimensional truncations (e_{N-1} -> 0).

#include <cstddef>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "specgate/linalg.hpp"
#include "specgate/seqspace.hpp"

namespace specgate::operators {

class OperatorSpec {
 public:
  struct Dense { Matrix matrix; };
  struct Diagonal { std::vector<cplx> entries; };
  /// e_j -> w_j e_{j+1} for j < dim - 1, e_{dim-1} -> 0; weights.size() == dim - 1.
  struct WeightedShift { std::vector<cplx> weights; std::size_t dim; };
  struct Jordan { cplx eigenvalue; std::size_t size; };
  struct Scaled { cplx factor; std::shared_ptr<const OperatorSpec> inner; };

  using Variant = std::variant<Dense, Diagonal, WeightedShift, Jordan, Scaled>;

  static OperatorSpec dense(Matrix matrix);
  static OperatorSpec diagonal(std::vector<cplx> entries);
  static OperatorSpec weighted_shift(std::vector<cplx> weights, std::size_t dim);
  static OperatorSpec jordan(cplx eigenvalue, std::size_t size);
  /// Nested scalings are folded into one factor, so depth never exceeds one.
  static OperatorSpec scaled(cplx factor, const OperatorSpec& inner);

  std::size_t dim() const noexcept { return dim_; }
  const Variant& variant() const noexcept { return rep_; }
  Matrix densify() const;

 private:
  OperatorSpec(Variant rep, std::size_t dim) : rep_(std::move(rep)), dim_(dim) {}

  Variant rep_;
  std::size_t dim_;
};

Vector apply(const OperatorSpec& t, const Vector& x);

/// Almost-norming family: unit-normalized functionals.
class FunctionalFamily {
 public:
  explicit FunctionalFamily(std::vector<Vector> members);
  const std::vector<Vector>& members() const noexcept { return members_; }

 private:
  std::vector<Vector> members_;
};

/// max over samples of ||x|| / sup_{x' in E} |<x', x>|, clamped to >= 1.
/// Throws DegenerateFamily when a sample is annihilated by every member.
double norming_constant(const FunctionalFamily& family, const std::vector<Vector>& samples);

/// Geometric model ||T^n|| <= kappa rho^n used for orbit tails.
struct DecayFit {
  double rho = 0.0;
  double kappa = 0.0;
  std::size_t horizon = 0;
  /// Smallest n with T^n == 0 exactly; tails past it are exact zeros.
  std::optional<std::size_t> nilpotent_at;
  /// Fitted ratio ||T^n|| / rho^n has peaked inside the horizon.
  bool peak_inside = false;

  bool exact() const noexcept { return nilpotent_at.has_value(); }
  /// Bound for ||T^m||, m >= n.
  double tail_at(std::size_t n) const;
};

/// Fits the decay model from Frobenius norms of T^n, n < horizon. Returns
/// nothing when T is neither nilpotent nor has spectral radius below one.
std::optional<DecayFit> fit_power_decay(const OperatorSpec& t, std::size_t horizon);

/// a_n = <x', T^n x>, n < n_terms, by iterated application. With a fit, a
/// tail bound ||x'|| ||x|| kappa rho^N is attached (exact 0 past nilpotency).
seqspace::ComplexSeq weak_orbit(const OperatorSpec& t, const Vector& x, const Vector& xp,
                                std::size_t n_terms, const std::optional<DecayFit>& fit = std::nullopt);

/// One orbit of x paired with many functionals.
std::vector<seqspace::ComplexSeq> weak_orbits(const OperatorSpec& t, const Vector& x,
                                              const std::vector<Vector>& functionals, std::size_t n_terms,
                                              const std::optional<DecayFit>& fit = std::nullopt);

struct PowerNorms {
  seqspace::NonNegSeq norms;
  bool power_bounded = true;
};

inline constexpr double kPowerBoundedThreshold = 1e6;

PowerNorms power_norms(const OperatorSpec& t, std::size_t n_terms);

/// Spectrum: closed form for structured variants, Schur form for dense.
std::vector<cplx> spectrum(const OperatorSpec& t);
double spectral_radius_oracle(const OperatorSpec& t);

struct GelfandEstimate {
  double estimate = 0.0;
  std::vector<double> sequence;  // ||T^n||^{1/n}, n = 1..n_terms-1
};

GelfandEstimate gelfand_estimate(const OperatorSpec& t, std::size_t n_terms);

}  // namespace specgate::operators
