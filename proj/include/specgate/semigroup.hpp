#pragma once

// Continuous-time pipeline for matrix semigroups e^{tA}: weak trajectories,
// their L^p norms, the Laplace-integral resolvent, the Hoelder factor M_q,
// the log-resolvent envelope constant M and the strip certificate
//   ||R(mu, A)|| <= 2/r  on  |Re mu| <= r/4,  r = min(0.9, 4 e^{-(4M+1)}),
// which bounds the abscissa of uniform boundedness by -r/4.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specgate/linalg.hpp"
#include "specgate/operators.hpp"
#include "specgate/resolvent.hpp"

namespace specgate::semigroup {

class GeneratorSpec {
 public:
  explicit GeneratorSpec(Matrix a, std::optional<double> growth_hint = std::nullopt);
  static GeneratorSpec from_operator(const operators::OperatorSpec& op,
                                     std::optional<double> growth_hint = std::nullopt);

  const Matrix& matrix() const noexcept { return a_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  std::optional<double> growth_hint() const noexcept { return growth_hint_; }

 private:
  Matrix a_;
  std::optional<double> growth_hint_;
};

struct Normalization {
  Matrix matrix;      // eps * A
  double scale = 1.0; // eps
  double hint = 0.0;  // growth bound hint before rescaling
};

/// Rescales A <- eps A so that the growth hint is at most 1/2. Without a
/// caller hint the spectral bound is used (the growth bound of a matrix).
Normalization normalize(const GeneratorSpec& gen);

inline constexpr double kExpBudget = 50.0;

/// e^{tA} by scaling and squaring. Throws HorizonTooLarge when ||tA|| > 50.
Matrix exp_at(const Matrix& a, double t);

/// e^{tA} for any t >= 0, split into budget-respecting factors.
Matrix propagator(const Matrix& a, double t);

/// Cached step e^{hA}; construction checks e^{2hA} = (e^{hA})^2.
class ExpCache {
 public:
  ExpCache(const Matrix& a, double h);
  const Matrix& step() const noexcept { return step_; }
  double h() const noexcept { return h_; }
  double law_residual() const noexcept { return law_residual_; }

 private:
  Matrix step_;
  double h_;
  double law_residual_ = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<cplx> values;
};

/// <x', e^{tA} x> on a sorted non-negative grid by stepping from cached
/// exponentials of the grid increments.
Trajectory weak_trajectory(const Matrix& a, const Vector& x, const Vector& xp, const std::vector<double>& grid);

/// |<x', e^{tA} x>| <= kappa ||x|| ||x'|| e^{alpha t}, alpha = s(A) + 1e-3.
struct DecayBound {
  double alpha = 0.0;
  double kappa = 0.0;
  double s_oracle = 0.0;
};

/// kappa from a sweep of ||e^{tA}||_F e^{-alpha t} over [0, horizon].
/// Throws NoDecayCertificate when alpha >= 0.
DecayBound decay_bound(const Matrix& a, double horizon);

struct LpNorm {
  double value = 0.0;     // (integral + tail)^{1/p}
  double integral = 0.0;  // composite Simpson on [0, horizon]
  double tail_bound = 0.0;
  double p = 1.0;
};

LpNorm lp_trajectory_norm(const Matrix& a, const Vector& x, const Vector& xp, double p, double horizon,
                          std::size_t steps);
LpNorm lp_trajectory_norm(const Matrix& a, const Vector& x, const Vector& xp, double p, double horizon,
                          std::size_t steps, const DecayBound& decay);
/// One trajectory of x against many functionals.
std::vector<LpNorm> lp_trajectory_norms(const Matrix& a, const Vector& x, const std::vector<Vector>& functionals,
                                        double p, double horizon, std::size_t steps, const DecayBound& decay);

/// L^q norm of t -> e^{-t re}: (re q)^{-1/q}, and 1 for q = inf.
double mq_factor(double re_lambda, double q);
/// The cruder bound re^{-1/q}.
double mq_factor_simplified(double re_lambda, double q);
/// Conjugate exponent of p in [1, inf).
double conjugate(double p);

/// Simpson quadrature of int_0^tau e^{-lambda t} e^{tA} dt.
Matrix laplace_resolvent(const Matrix& a, cplx lambda, double tau, std::size_t steps);
/// Same integral over [t0, t1].
Matrix laplace_segment(const Matrix& a, cplx lambda, double t0, double t1, std::size_t steps);

struct CauchyNetCheck {
  double mu_re = 0.0;
  double tau_a = 0.0;
  double tau_b = 0.0;
  double tau_end = 0.0;
  double norm_a = 0.0;  // ||int_{tau_a}^{tau_end}||
  double norm_b = 0.0;  // ||int_{tau_b}^{tau_end}||
  double ratio = 0.0;
  double bound = 0.0;   // e^{-(tau_b - tau_a)(Re lambda - Re mu)}
  bool pass = false;
};

/// Compares the decay of Laplace tails between two cut points with the
/// rate Re lambda - Re mu, Re mu = Re lambda / 2.
CauchyNetCheck cauchy_net_check(const Matrix& a, cplx lambda, double tau_a, double tau_b, double tau_end,
                                double step = 0.01);

struct EnvelopeFit {
  double m = 0.0;
  cplx argmax;
  std::size_t samples = 0;
};

/// M = max ||R(lambda, A)|| Re lambda |log Re lambda| over the samples.
EnvelopeFit log_envelope_fit(const Matrix& a, const std::vector<cplx>& samples);

/// Re log-spaced in [re_min, 0.9] x Im evenly spaced over the budget
/// 4 max|Im sigma| + 10, plus the imaginary parts of the eigenvalues.
std::vector<cplx> envelope_samples(const Matrix& a, std::size_t re_count = 24, std::size_t im_count = 17,
                                   double re_min = 1e-4);

struct StripSample {
  cplx mu;
  double resolvent_norm = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct StripCertificate {
  double m = 0.0;
  double r = 0.0;
  double log_r = 0.0;           // r may underflow; log r never does
  double halfwidth = 0.0;       // r / 4
  double bound = 0.0;           // 2 / r
  double s0_upper = 0.0;        // -r / 4
  double chain_lhs = 0.0;       // r / 2
  double chain_rhs = 0.0;       // (r / 4M) |log(r/4)| - r/2
  double log_margin = 0.0;      // |log(r/4)| - 4M
  std::optional<double> s_oracle;
  std::vector<StripSample> samples;
  std::size_t translated_checks = 0;
  std::size_t translated_failures = 0;
  double inner_flank_max = 0.0;  // max ||R|| / envelope on Re in [r/4, 2/3]
  double outer_flank_max = 0.0;  // max ||R|| on Re >= 2/3
  std::size_t refits = 0;
  bool verified = false;
};

StripCertificate strip_certificate(double m);

inline constexpr double kStripTolerance = 1e-8;

/// Direct-solve verification of a strip certificate; refits M once on a
/// denser grid before throwing StripViolation.
StripCertificate verify_strip(const Matrix& a, const StripCertificate& cert, std::size_t n_samples,
                              unsigned long long seed = 0);

// --- end-to-end --------------------------------------------------------------

struct SemigroupOptions {
  std::size_t verify_samples = 64;
  /// Simpson step cap; the actual step also resolves the spectrum.
  double max_step = 0.05;
  double max_horizon = 5000.0;
};

enum class SemigroupStatus { Certified, HypothesisUnmet, CertificationFailed, InternalInconsistency };
std::string to_string(SemigroupStatus s);

struct PairIntegrability {
  std::string label;
  std::optional<double> p;
  std::optional<LpNorm> norm;
  std::optional<std::string> error;
};

struct HoelderCheck {
  std::size_t checks = 0;
  std::size_t failures = 0;
  double worst_ratio = 0.0;  // max |<x', R x>| / (M_q C_p)
};

struct SemigroupReport {
  std::size_t dim = 0;
  double scale = 1.0;
  double s_oracle = 0.0;  // spectral bound of the original generator
  std::optional<DecayBound> decay;
  std::vector<PairIntegrability> pairs;
  std::optional<EnvelopeFit> envelope;
  std::optional<StripCertificate> certificate;
  HoelderCheck hoelder;
  std::optional<double> s0_upper_scaled;  // bound for eps A
  std::optional<double> s0_upper;         // back-transformed: s0(A) = s0(eps A) / eps
  SemigroupStatus status = SemigroupStatus::HypothesisUnmet;
  std::vector<std::string> messages;
};

SemigroupReport analyze_semigroup(const GeneratorSpec& gen, const resolvent::SamplePlan& plan,
                                  const std::vector<double>& p_plan, const SemigroupOptions& options = {});

std::string strip_csv(const StripCertificate& cert);

}  // namespace specgate::semigroup
