#include "specgate/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specgate/error.hpp"

namespace specgate::operators {

namespace {

void check_finite(cplx v) {
  require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorCode::InvalidArgument,
          "operator entries must be finite");
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

OperatorSpec OperatorSpec::dense(Matrix matrix) {
  require(matrix.rows() >= 1 && matrix.rows() == matrix.cols(), ErrorCode::InvalidArgument,
          "dense operator must be a non-empty square matrix");
  for (Eigen::Index i = 0; i < matrix.size(); ++i) check_finite(matrix.data()[i]);
  auto n = static_cast<std::size_t>(matrix.rows());
  return OperatorSpec(Dense{std::move(matrix)}, n);
}

OperatorSpec OperatorSpec::diagonal(std::vector<cplx> entries) {
  require(!entries.empty(), ErrorCode::InvalidArgument, "diagonal operator needs entries");
  for (auto v : entries) check_finite(v);
  auto n = entries.size();
  return OperatorSpec(Diagonal{std::move(entries)}, n);
}

OperatorSpec OperatorSpec::weighted_shift(std::vector<cplx> weights, std::size_t dim) {
  require(dim >= 1, ErrorCode::InvalidArgument, "shift dimension must be >= 1");
  require(weights.size() + 1 == dim, ErrorCode::InvalidArgument,
          "weighted shift on C^N takes N-1 weights");
  for (auto v : weights) check_finite(v);
  return OperatorSpec(WeightedShift{std::move(weights), dim}, dim);
}

OperatorSpec OperatorSpec::jordan(cplx eigenvalue, std::size_t size) {
  require(size >= 1, ErrorCode::InvalidArgument, "Jordan block size must be >= 1");
  check_finite(eigenvalue);
  return OperatorSpec(Jordan{eigenvalue, size}, size);
}

OperatorSpec OperatorSpec::scaled(cplx factor, const OperatorSpec& inner) {
  check_finite(factor);
  if (const auto* s = std::get_if<Scaled>(&inner.rep_)) {
    return OperatorSpec(Scaled{factor * s->factor, s->inner}, inner.dim_);
  }
  return OperatorSpec(Scaled{factor, std::make_shared<const OperatorSpec>(inner)}, inner.dim_);
}

Matrix OperatorSpec::densify() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  return std::visit(
      overloaded{
          [](const Dense& d) -> Matrix { return d.matrix; },
          [n](const Diagonal& d) -> Matrix {
            Matrix m = Matrix::Zero(n, n);
            for (Eigen::Index i = 0; i < n; ++i) m(i, i) = d.entries[static_cast<std::size_t>(i)];
            return m;
          },
          [n](const WeightedShift& s) -> Matrix {
            Matrix m = Matrix::Zero(n, n);
            for (Eigen::Index j = 0; j + 1 < n; ++j) m(j + 1, j) = s.weights[static_cast<std::size_t>(j)];
            return m;
          },
          [n](const Jordan& j) -> Matrix {
            Matrix m = Matrix::Zero(n, n);
            for (Eigen::Index i = 0; i < n; ++i) {
              m(i, i) = j.eigenvalue;
              if (i + 1 < n) m(i, i + 1) = 1.0;
            }
            return m;
          },
          [](const Scaled& s) -> Matrix { return s.factor * s.inner->densify(); },
      },
      rep_);
}

Vector apply(const OperatorSpec& t, const Vector& x) {
  require(static_cast<std::size_t>(x.size()) == t.dim(), ErrorCode::DimensionMismatch,
          "vector length does not match operator dimension");
  const Eigen::Index n = x.size();
  return std::visit(
      overloaded{
          [&](const OperatorSpec::Dense& d) -> Vector { return d.matrix * x; },
          [&](const OperatorSpec::Diagonal& d) -> Vector {
            Vector y(n);
            for (Eigen::Index i = 0; i < n; ++i) y(i) = d.entries[static_cast<std::size_t>(i)] * x(i);
            return y;
          },
          [&](const OperatorSpec::WeightedShift& s) -> Vector {
            Vector y = Vector::Zero(n);
            for (Eigen::Index j = 0; j + 1 < n; ++j) y(j + 1) = s.weights[static_cast<std::size_t>(j)] * x(j);
            return y;
          },
          [&](const OperatorSpec::Jordan& j) -> Vector {
            Vector y = j.eigenvalue * x;
            for (Eigen::Index i = 0; i + 1 < n; ++i) y(i) += x(i + 1);
            return y;
          },
          [&](const OperatorSpec::Scaled& s) -> Vector { return s.factor * operators::apply(*s.inner, x); },
      },
      t.variant());
}

// --- functionals ----------------------------------------------------------

FunctionalFamily::FunctionalFamily(std::vector<Vector> members) : members_(std::move(members)) {
  require(!members_.empty(), ErrorCode::InvalidArgument, "functional family must be non-empty");
  for (auto& m : members_) {
    const double norm = m.norm();
    require(norm > 0.0 && std::isfinite(norm), ErrorCode::InvalidArgument,
            "functional family members must be nonzero and finite");
    m /= norm;
  }
}

double norming_constant(const FunctionalFamily& family, const std::vector<Vector>& samples) {
  require(!samples.empty(), ErrorCode::InvalidArgument, "norming constant needs samples");
  double c = 1.0;
  for (const auto& x : samples) {
    const double norm = x.norm();
    require(norm > 0.0, ErrorCode::InvalidArgument, "norming samples must be nonzero");
    double best = 0.0;
    for (const auto& xp : family.members()) {
      require(xp.size() == x.size(), ErrorCode::DimensionMismatch, "functional length mismatch");
      best = std::max(best, std::abs(linalg::pair(xp, x)));
    }
    if (best <= 1e-14 * norm) fail(ErrorCode::DegenerateFamily, "a sample is annihilated by every member");
    c = std::max(c, norm / best);
  }
  return c;
}

// --- powers and orbits ----------------------------------------------------

double DecayFit::tail_at(std::size_t n) const {
  if (nilpotent_at && n >= *nilpotent_at) return 0.0;
  return kappa * std::pow(rho, static_cast<double>(n));
}

std::optional<DecayFit> fit_power_decay(const OperatorSpec& t, std::size_t horizon) {
  require(horizon >= 1, ErrorCode::InvalidArgument, "decay fit horizon must be >= 1");
  const double r = spectral_radius_oracle(t);
  const Matrix m = t.densify();
  const auto n = m.rows();

  DecayFit fit;
  fit.horizon = horizon;
  fit.rho = std::max(0.5, 0.5 * (1.0 + r));
  Matrix power = Matrix::Identity(n, n);
  double scale = 1.0;  // rho^k
  double last_ratio = 0.0;
  for (std::size_t k = 0; k < horizon; ++k) {
    const double norm = power.norm();  // Frobenius >= operator norm
    if (norm == 0.0) {
      fit.nilpotent_at = k;
      fit.peak_inside = true;
      return fit;
    }
    last_ratio = norm / scale;
    fit.kappa = std::max(fit.kappa, last_ratio);
    power = m * power;
    scale *= fit.rho;
  }
  if (r >= 1.0 - 1e-9) return std::nullopt;
  fit.peak_inside = last_ratio < fit.kappa;
  return fit;
}

std::vector<seqspace::ComplexSeq> weak_orbits(const OperatorSpec& t, const Vector& x,
                                              const std::vector<Vector>& functionals, std::size_t n_terms,
                                              const std::optional<DecayFit>& fit) {
  require(n_terms >= 1, ErrorCode::InvalidArgument, "orbit needs at least one term");
  require(static_cast<std::size_t>(x.size()) == t.dim(), ErrorCode::DimensionMismatch,
          "vector length does not match operator dimension");
  for (const auto& xp : functionals) {
    require(static_cast<std::size_t>(xp.size()) == t.dim(), ErrorCode::DimensionMismatch,
            "functional length does not match operator dimension");
  }
  std::vector<std::vector<cplx>> entries(functionals.size(), std::vector<cplx>(n_terms));
  Vector v = x;
  for (std::size_t n = 0; n < n_terms; ++n) {
    for (std::size_t i = 0; i < functionals.size(); ++i) entries[i][n] = linalg::pair(functionals[i], v);
    if (n + 1 < n_terms) v = operators::apply(t, v);
  }
  std::vector<seqspace::ComplexSeq> out;
  out.reserve(functionals.size());
  const double xnorm = x.norm();
  for (std::size_t i = 0; i < functionals.size(); ++i) {
    std::optional<double> tail;
    if (fit) tail = functionals[i].norm() * xnorm * fit->tail_at(n_terms);
    out.emplace_back(std::move(entries[i]), tail);
  }
  return out;
}

seqspace::ComplexSeq weak_orbit(const OperatorSpec& t, const Vector& x, const Vector& xp,
                                std::size_t n_terms, const std::optional<DecayFit>& fit) {
  return std::move(weak_orbits(t, x, {xp}, n_terms, fit).front());
}

PowerNorms power_norms(const OperatorSpec& t, std::size_t n_terms) {
  require(n_terms >= 1, ErrorCode::InvalidArgument, "power norms need at least one term");
  std::vector<double> norms(n_terms);
  std::visit(
      overloaded{
          [&](const OperatorSpec::Diagonal& d) {
            double m = 0.0;
            for (auto v : d.entries) m = std::max(m, std::abs(v));
            for (std::size_t k = 0; k < n_terms; ++k) norms[k] = std::pow(m, static_cast<double>(k));
          },
          [&](const OperatorSpec::WeightedShift& s) {
            // S^k e_j = (w_j ... w_{j+k-1}) e_{j+k}: distinct targets, so the
            // norm is the largest product of k consecutive weights.
            for (std::size_t k = 0; k < n_terms; ++k) {
              if (k == 0) {
                norms[k] = 1.0;
                continue;
              }
              double best = 0.0;
              for (std::size_t j = 0; j + k < s.dim; ++j) {
                double prod = 1.0;
                for (std::size_t i = j; i < j + k; ++i) prod *= std::abs(s.weights[i]);
                best = std::max(best, prod);
              }
              norms[k] = best;
            }
          },
          [&](const OperatorSpec::Scaled& s) {
            auto inner = power_norms(*s.inner, n_terms);
            const double f = std::abs(s.factor);
            for (std::size_t k = 0; k < n_terms; ++k) {
              norms[k] = std::pow(f, static_cast<double>(k)) * inner.norms[k];
            }
          },
          [&](const auto&) {
            const Matrix m = t.densify();
            Matrix power = Matrix::Identity(m.rows(), m.cols());
            for (std::size_t k = 0; k < n_terms; ++k) {
              norms[k] = linalg::op_norm(power);
              if (k + 1 < n_terms) power = m * power;
            }
          },
      },
      t.variant());
  for (auto& v : norms) {
    if (!std::isfinite(v)) v = std::numeric_limits<double>::max();
  }
  PowerNorms out{seqspace::NonNegSeq(norms), true};
  const double first = norms.front();
  const double sup = *std::max_element(norms.begin(), norms.end());
  out.power_bounded = first > 0.0 ? sup / first <= kPowerBoundedThreshold : true;
  return out;
}

std::vector<cplx> spectrum(const OperatorSpec& t) {
  return std::visit(
      overloaded{
          [](const OperatorSpec::Dense& d) { return linalg::eigenvalues(d.matrix); },
          [](const OperatorSpec::Diagonal& d) { return d.entries; },
          [](const OperatorSpec::WeightedShift& s) { return std::vector<cplx>(s.dim, cplx(0.0)); },
          [](const OperatorSpec::Jordan& j) { return std::vector<cplx>(j.size, j.eigenvalue); },
          [](const OperatorSpec::Scaled& s) {
            auto inner = spectrum(*s.inner);
            for (auto& v : inner) v *= s.factor;
            return inner;
          },
      },
      t.variant());
}

double spectral_radius_oracle(const OperatorSpec& t) {
  return std::visit(
      overloaded{
          [](const OperatorSpec::Dense& d) { return linalg::max_modulus(linalg::eigenvalues(d.matrix)); },
          [](const OperatorSpec::Diagonal& d) { return linalg::max_modulus(d.entries); },
          [](const OperatorSpec::WeightedShift&) { return 0.0; },
          [](const OperatorSpec::Jordan& j) { return std::abs(j.eigenvalue); },
          [](const OperatorSpec::Scaled& s) { return std::abs(s.factor) * spectral_radius_oracle(*s.inner); },
      },
      t.variant());
}

GelfandEstimate gelfand_estimate(const OperatorSpec& t, std::size_t n_terms) {
  require(n_terms >= 8, ErrorCode::InvalidArgument, "Gelfand estimate needs at least 8 terms");
  auto norms = power_norms(t, n_terms).norms;
  GelfandEstimate g;
  g.sequence.reserve(n_terms - 1);
  for (std::size_t n = 1; n < n_terms; ++n) {
    g.sequence.push_back(std::pow(norms[n], 1.0 / static_cast<double>(n)));
  }
  g.estimate = g.sequence.back();
  return g;
}

}  // namespace specgate::operators
