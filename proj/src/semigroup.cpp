#include "specgate/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "specgate/error.hpp"

namespace specgate::semigroup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_square_finite(const Matrix& a) {
  require(a.rows() == a.cols() && a.rows() > 0, ErrorCode::DimensionMismatch, "generator must be square");
  require(a.allFinite(), ErrorCode::InvalidArgument, "generator has non-finite entries");
}

Matrix matrix_power(Matrix base, std::size_t k) {
  Matrix out = Matrix::Identity(base.rows(), base.cols());
  while (k > 0) {
    if (k & 1u) out = out * base;
    k >>= 1u;
    if (k > 0) base = base * base;
  }
  return out;
}

std::size_t even_steps(std::size_t steps) {
  if (steps < 2) return 2;
  return steps % 2 == 0 ? steps : steps + 1;
}

double simpson_weight(std::size_t k, std::size_t steps) {
  if (k == 0 || k == steps) return 1.0;
  return k % 2 == 1 ? 4.0 : 2.0;
}

std::vector<double> imaginary_grid(const Matrix& a, std::size_t count) {
  const auto eig = linalg::eigenvalues(a);
  const double budget = 4.0 * linalg::max_abs_imag(eig) + 10.0;
  std::vector<double> ims;
  if (count == 1) {
    ims.push_back(0.0);
  } else {
    for (std::size_t j = 0; j < count; ++j)
      ims.push_back(-budget + 2.0 * budget * static_cast<double>(j) / static_cast<double>(count - 1));
  }
  for (const auto& z : eig) ims.push_back(z.imag());
  std::sort(ims.begin(), ims.end());
  ims.erase(std::unique(ims.begin(), ims.end()), ims.end());
  return ims;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  if (count == 1) return {hi};
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t j = 0; j < count; ++j)
    out.push_back(std::exp(a + (b - a) * static_cast<double>(j) / static_cast<double>(count - 1)));
  return out;
}

double envelope(double re) { return re * std::abs(std::log(re)); }

}  // namespace

// --- generator ---------------------------------------------------------------

GeneratorSpec::GeneratorSpec(Matrix a, std::optional<double> growth_hint)
    : a_(std::move(a)), growth_hint_(growth_hint) {
  require_square_finite(a_);
  if (growth_hint_) require(std::isfinite(*growth_hint_), ErrorCode::InvalidArgument, "growth hint must be finite");
}

GeneratorSpec GeneratorSpec::from_operator(const operators::OperatorSpec& op, std::optional<double> growth_hint) {
  return GeneratorSpec(op.densify(), growth_hint);
}

Normalization normalize(const GeneratorSpec& gen) {
  Normalization out;
  out.hint = gen.growth_hint().value_or(linalg::max_real_part(linalg::eigenvalues(gen.matrix())));
  out.scale = out.hint > 0.5 ? 0.5 / out.hint : 1.0;
  out.matrix = gen.matrix() * out.scale;
  return out;
}

// --- exponentials ------------------------------------------------------------

Matrix exp_at(const Matrix& a, double t) {
  require_square_finite(a);
  require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidArgument, "time must be finite and non-negative");
  if (t == 0.0) return Matrix::Identity(a.rows(), a.cols());
  const double size = t * linalg::op_norm(a);
  if (size > kExpBudget) {
    std::ostringstream msg;
    msg << "||tA|| = " << size << " exceeds the exponential budget " << kExpBudget;
    fail(ErrorCode::HorizonTooLarge, msg.str());
  }
  return Matrix(a * cplx(t)).exp();
}

Matrix propagator(const Matrix& a, double t) {
  require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidArgument, "time must be finite and non-negative");
  const double size = t * linalg::op_norm(a);
  if (size <= kExpBudget / 2) return exp_at(a, t);
  const auto pieces = static_cast<std::size_t>(std::ceil(size / (kExpBudget / 2)));
  return matrix_power(exp_at(a, t / static_cast<double>(pieces)), pieces);
}

ExpCache::ExpCache(const Matrix& a, double h) : step_(propagator(a, h)), h_(h) {
  const Matrix twice = propagator(a, 2.0 * h);
  law_residual_ = linalg::op_norm(twice - step_ * step_);
  if (law_residual_ > 1e-9 * (1.0 + linalg::op_norm(twice))) {
    std::ostringstream msg;
    msg << "semigroup law check failed at h = " << h << " (residual " << law_residual_ << ")";
    fail(ErrorCode::HorizonTooLarge, msg.str());
  }
}

Trajectory weak_trajectory(const Matrix& a, const Vector& x, const Vector& xp, const std::vector<double>& grid) {
  require_square_finite(a);
  require(x.size() == a.rows() && xp.size() == a.rows(), ErrorCode::DimensionMismatch,
          "vector and generator dimensions differ");
  Trajectory out;
  if (grid.empty()) return out;
  require(grid.front() >= 0.0, ErrorCode::InvalidArgument, "trajectory grid must be non-negative");
  for (std::size_t k = 1; k < grid.size(); ++k)
    require(grid[k] >= grid[k - 1], ErrorCode::InvalidArgument, "trajectory grid must be sorted");

  std::map<double, ExpCache> cache;
  Vector v = propagator(a, grid.front()) * x;
  out.times.push_back(grid.front());
  out.values.push_back(linalg::pair(xp, v));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double delta = grid[k] - grid[k - 1];
    if (delta > 0.0) {
      auto it = cache.find(delta);
      if (it == cache.end()) it = cache.emplace(delta, ExpCache(a, delta)).first;
      v = it->second.step() * v;
    }
    out.times.push_back(grid[k]);
    out.values.push_back(linalg::pair(xp, v));
  }
  return out;
}

// --- decay and L^p norms -----------------------------------------------------

DecayBound decay_bound(const Matrix& a, double horizon) {
  require_square_finite(a);
  require(horizon > 0.0, ErrorCode::InvalidArgument, "sweep horizon must be positive");
  DecayBound out;
  out.s_oracle = linalg::max_real_part(linalg::eigenvalues(a));
  out.alpha = out.s_oracle + 1e-3;
  if (out.alpha >= 0.0) {
    std::ostringstream msg;
    msg << "no decay certificate: spectral bound " << out.s_oracle << " gives rate " << out.alpha << " >= 0";
    fail(ErrorCode::NoDecayCertificate, msg.str());
  }
  // ||e^{(k+s)A}|| <= ||e^{kA}|| ||e^{sA}||: a fine sweep on [0,1] times a
  // coarse sweep over whole units.
  constexpr std::size_t kFine = 64;
  const Matrix fine = propagator(a, 1.0 / kFine);
  Matrix p = Matrix::Identity(a.rows(), a.cols());
  double local = 1.0;
  for (std::size_t j = 1; j <= kFine; ++j) {
    p = fine * p;
    local = std::max(local, p.norm() * std::exp(-out.alpha * static_cast<double>(j) / kFine));
  }
  const Matrix unit = p;
  const auto units = static_cast<std::size_t>(std::ceil(horizon));
  double global = 1.0;
  Matrix q = Matrix::Identity(a.rows(), a.cols());
  for (std::size_t k = 1; k <= units; ++k) {
    q = unit * q;
    global = std::max(global, q.norm() * std::exp(-out.alpha * static_cast<double>(k)));
  }
  out.kappa = local * global;
  return out;
}

std::vector<LpNorm> lp_trajectory_norms(const Matrix& a, const Vector& x, const std::vector<Vector>& functionals,
                                        double p, double horizon, std::size_t steps, const DecayBound& decay) {
  require_square_finite(a);
  require(std::isfinite(p) && p >= 1.0, ErrorCode::InvalidArgument, "p must lie in [1, inf)");
  require(std::isfinite(horizon) && horizon >= 0.0, ErrorCode::InvalidArgument, "horizon must be non-negative");
  require(x.size() == a.rows(), ErrorCode::DimensionMismatch, "vector and generator dimensions differ");
  for (const auto& xp : functionals)
    require(xp.size() == a.rows(), ErrorCode::DimensionMismatch, "functional and generator dimensions differ");
  if (decay.alpha >= 0.0) fail(ErrorCode::NoDecayCertificate, "decay rate is not negative");

  steps = even_steps(steps);
  const double h = horizon / static_cast<double>(steps);
  std::vector<double> sums(functionals.size(), 0.0);
  if (horizon > 0.0) {
    const ExpCache cache(a, h);
    Vector v = x;
    for (std::size_t k = 0; k <= steps; ++k) {
      if (k > 0) v = cache.step() * v;
      const double w = simpson_weight(k, steps);
      for (std::size_t j = 0; j < functionals.size(); ++j)
        sums[j] += w * std::pow(std::abs(linalg::pair(functionals[j], v)), p);
    }
  }
  std::vector<LpNorm> out;
  for (std::size_t j = 0; j < functionals.size(); ++j) {
    LpNorm n;
    n.p = p;
    n.integral = sums[j] * h / 3.0;
    const double scale = decay.kappa * x.norm() * functionals[j].norm();
    n.tail_bound = scale == 0.0 ? 0.0
                                : std::exp(p * std::log(scale) + p * decay.alpha * horizon) /
                                      (p * std::abs(decay.alpha));
    n.value = std::pow(n.integral + n.tail_bound, 1.0 / p);
    out.push_back(n);
  }
  return out;
}

LpNorm lp_trajectory_norm(const Matrix& a, const Vector& x, const Vector& xp, double p, double horizon,
                          std::size_t steps, const DecayBound& decay) {
  return lp_trajectory_norms(a, x, {xp}, p, horizon, steps, decay).front();
}

LpNorm lp_trajectory_norm(const Matrix& a, const Vector& x, const Vector& xp, double p, double horizon,
                          std::size_t steps) {
  return lp_trajectory_norm(a, x, xp, p, horizon, steps, decay_bound(a, std::max(horizon, 1.0)));
}

double mq_factor(double re_lambda, double q) {
  require(q > 1.0, ErrorCode::BadConjugate, "conjugate exponent must exceed 1");
  require(std::isfinite(re_lambda) && re_lambda > 0.0, ErrorCode::InvalidArgument, "Re lambda must be positive");
  if (std::isinf(q)) return 1.0;
  return std::pow(re_lambda * q, -1.0 / q);
}

double mq_factor_simplified(double re_lambda, double q) {
  require(q > 1.0, ErrorCode::BadConjugate, "conjugate exponent must exceed 1");
  require(std::isfinite(re_lambda) && re_lambda > 0.0, ErrorCode::InvalidArgument, "Re lambda must be positive");
  if (std::isinf(q)) return 1.0;
  return std::pow(re_lambda, -1.0 / q);
}

double conjugate(double p) {
  require(p >= 1.0 && std::isfinite(p), ErrorCode::InvalidArgument, "p must lie in [1, inf)");
  return p == 1.0 ? kInf : p / (p - 1.0);
}

// --- Laplace resolvent -------------------------------------------------------

Matrix laplace_segment(const Matrix& a, cplx lambda, double t0, double t1, std::size_t steps) {
  require_square_finite(a);
  require(lambda.real() > 0.0, ErrorCode::InvalidArgument, "Re lambda must be positive");
  require(t0 >= 0.0 && t1 >= t0 && std::isfinite(t1), ErrorCode::InvalidArgument, "need 0 <= t0 <= t1 < inf");
  constexpr std::size_t kMaxSteps = 1u << 22;
  if (steps > kMaxSteps) fail(ErrorCode::QuadratureBudget, "quadrature step count exceeds 2^22");
  const auto n = a.rows();
  if (t1 == t0) return Matrix::Zero(n, n);
  steps = even_steps(steps);
  const double h = (t1 - t0) / static_cast<double>(steps);
  const ExpCache cache(a, h);
  const cplx decay_step = std::exp(-lambda * h);
  Matrix p = propagator(a, t0) * std::exp(-lambda * t0);
  Matrix sum = p;
  for (std::size_t k = 1; k <= steps; ++k) {
    p = (cache.step() * p) * decay_step;
    sum += simpson_weight(k, steps) * p;
  }
  return sum * cplx(h / 3.0);
}

Matrix laplace_resolvent(const Matrix& a, cplx lambda, double tau, std::size_t steps) {
  require(tau >= 0.0, ErrorCode::InvalidArgument, "tau must be non-negative");
  return laplace_segment(a, lambda, 0.0, tau, steps);
}

CauchyNetCheck cauchy_net_check(const Matrix& a, cplx lambda, double tau_a, double tau_b, double tau_end,
                                double step) {
  require(tau_a < tau_b && tau_b < tau_end, ErrorCode::InvalidArgument, "need tau_a < tau_b < tau_end");
  require(step > 0.0, ErrorCode::InvalidArgument, "step must be positive");
  CauchyNetCheck out;
  out.mu_re = lambda.real() / 2.0;
  out.tau_a = tau_a;
  out.tau_b = tau_b;
  out.tau_end = tau_end;
  auto steps_for = [&](double len) { return static_cast<std::size_t>(std::ceil(len / step)); };
  out.norm_a = linalg::op_norm(laplace_segment(a, lambda, tau_a, tau_end, steps_for(tau_end - tau_a)));
  out.norm_b = linalg::op_norm(laplace_segment(a, lambda, tau_b, tau_end, steps_for(tau_end - tau_b)));
  out.ratio = out.norm_a == 0.0 ? 0.0 : out.norm_b / out.norm_a;
  out.bound = std::exp(-(tau_b - tau_a) * (lambda.real() - out.mu_re));
  out.pass = out.ratio <= out.bound * 1.01;
  return out;
}

// --- envelope and strip ------------------------------------------------------

EnvelopeFit log_envelope_fit(const Matrix& a, const std::vector<cplx>& samples) {
  require_square_finite(a);
  require(!samples.empty(), ErrorCode::InvalidArgument, "no envelope samples");
  const auto eig = linalg::eigenvalues(a);
  EnvelopeFit out;
  for (const auto& z : samples) {
    require(z.real() > 0.0 && z.real() < 1.0, ErrorCode::InvalidArgument, "envelope samples need Re in (0, 1)");
    if (linalg::distance_to(z, eig) <= 1e-10) {
      std::ostringstream msg;
      msg << "sample " << z << " lies within 1e-10 of an eigenvalue";
      fail(ErrorCode::SingularSample, msg.str());
    }
    const double value = linalg::resolvent_norm(a, z) * envelope(z.real());
    if (!(value <= out.m)) {
      out.m = value;
      out.argmax = z;
    }
  }
  out.samples = samples.size();
  return out;
}

std::vector<cplx> envelope_samples(const Matrix& a, std::size_t re_count, std::size_t im_count, double re_min) {
  require(re_count >= 1 && im_count >= 1, ErrorCode::InvalidArgument, "sample counts must be positive");
  require(re_min > 0.0 && re_min < 0.9, ErrorCode::InvalidArgument, "re_min must lie in (0, 0.9)");
  std::vector<cplx> out;
  const auto ims = imaginary_grid(a, im_count);
  for (double re : log_spaced(re_min, 0.9, re_count))
    for (double im : ims) out.emplace_back(re, im);
  return out;
}

StripCertificate strip_certificate(double m) {
  require(std::isfinite(m) && m > 0.0, ErrorCode::InvalidArgument, "M must be positive and finite");
  StripCertificate c;
  c.m = m;
  c.log_r = std::min(std::log(0.9), std::log(4.0) - (4.0 * m + 1.0));
  c.r = std::exp(c.log_r);
  c.halfwidth = c.r / 4.0;
  c.bound = 2.0 / c.r;
  c.s0_upper = -c.r / 4.0;
  const double abs_log = std::log(4.0) - c.log_r;  // |log(r/4)|, r/4 < 1
  c.log_margin = abs_log - 4.0 * m;
  c.chain_lhs = c.r / 2.0;
  c.chain_rhs = c.r / (4.0 * m) * abs_log - c.r / 2.0;
  return c;
}

namespace {

struct CheckOutcome {
  std::optional<cplx> offending;
  std::vector<cplx> envelope_points;  // flank points whose envelope exceeded M
};

// Strip sample points: Re in {-w, 0, w} on the eigenvalue heights, plus
// n uniformly random points of the strip.
std::vector<cplx> strip_points(const Matrix& a, double w, std::size_t n_samples, unsigned long long seed) {
  const auto eig = linalg::eigenvalues(a);
  const double im_budget = 4.0 * linalg::max_abs_imag(eig) + 10.0;
  std::vector<cplx> mus;
  std::vector<double> ims{0.0};
  for (const auto& z : eig) ims.push_back(z.imag());
  for (double im : ims)
    for (double re : {-w, 0.0, w}) mus.emplace_back(re, im);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ure(-w, w), uim(-im_budget, im_budget);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double re = ure(rng);
    mus.emplace_back(re, uim(rng));
  }
  return mus;
}

std::vector<double> inner_flank_res(double w) {
  const double lo = std::max(w, std::numeric_limits<double>::min());
  return log_spaced(std::min(lo, 2.0 / 3.0), 2.0 / 3.0, 8);
}

// Every point at which the checks below evaluate the envelope.
std::vector<cplx> envelope_check_points(const Matrix& a, double w, std::size_t n_samples, unsigned long long seed) {
  std::vector<cplx> out;
  if (w > 0.0 && w < 1.0)
    for (const auto& mu : strip_points(a, w, n_samples, seed)) out.emplace_back(w, mu.imag());
  const auto ims = imaginary_grid(a, 17);
  for (double re : inner_flank_res(w))
    for (double im : ims) out.emplace_back(re, im);
  return out;
}

CheckOutcome run_strip_checks(const Matrix& a, StripCertificate& cert, std::size_t n_samples,
                              unsigned long long seed) {
  CheckOutcome out;
  const double w = cert.halfwidth;
  const auto mus = strip_points(a, w, n_samples, seed);

  cert.samples.clear();
  cert.translated_checks = 0;
  cert.translated_failures = 0;
  for (const auto& mu : mus) {
    StripSample s;
    s.mu = mu;
    s.resolvent_norm = linalg::resolvent_norm(a, mu);
    s.bound = cert.bound;
    s.pass = s.resolvent_norm <= cert.bound + kStripTolerance;
    if (!s.pass && !out.offending) out.offending = mu;
    cert.samples.push_back(s);

    // Envelope bound at the translated point w + i Im mu.
    const cplx lambda(w, mu.imag());
    if (lambda.real() > 0.0 && lambda.real() < 1.0) {
      ++cert.translated_checks;
      const double limit = cert.m / envelope(lambda.real());
      if (linalg::resolvent_norm(a, lambda) > limit * (1.0 + 1e-9)) {
        ++cert.translated_failures;
        out.envelope_points.push_back(lambda);
        if (!out.offending) out.offending = mu;
      }
    }
  }

  // Flank Re in [r/4, 2/3] against the envelope; Re >= 2/3 only needs finiteness.
  const auto flank_ims = imaginary_grid(a, 17);
  cert.inner_flank_max = 0.0;
  for (double re : inner_flank_res(w)) {
    for (double im : flank_ims) {
      const cplx lambda(re, im);
      const double ratio = linalg::resolvent_norm(a, lambda) * envelope(re) / cert.m;
      cert.inner_flank_max = std::max(cert.inner_flank_max, ratio);
      if (!(ratio <= 1.0 + 1e-9)) {
        out.envelope_points.push_back(lambda);
        if (!out.offending) out.offending = lambda;
      }
    }
  }
  cert.outer_flank_max = 0.0;
  for (double re : {2.0 / 3.0, 1.0, 2.0, 4.0, 8.0}) {
    for (double im : flank_ims) {
      const double norm = linalg::resolvent_norm(a, cplx(re, im));
      cert.outer_flank_max = std::max(cert.outer_flank_max, norm);
      if (!std::isfinite(norm) && !out.offending) out.offending = cplx(re, im);
    }
  }
  return out;
}

}  // namespace

StripCertificate verify_strip(const Matrix& a, const StripCertificate& cert, std::size_t n_samples,
                              unsigned long long seed) {
  require_square_finite(a);
  StripCertificate out = cert;
  out.s_oracle = linalg::max_real_part(linalg::eigenvalues(a));
  auto first = run_strip_checks(a, out, n_samples, seed);
  if (!first.offending) {
    out.verified = true;
    return out;
  }
  // One refit on a denser grid that also covers the offending points.
  auto samples = envelope_samples(a, 48, 33, 1e-6);
  for (const auto& z : first.envelope_points)
    if (z.real() > 0.0 && z.real() < 1.0) samples.push_back(z);
  double fitted = 0.0;
  try {
    fitted = log_envelope_fit(a, samples).m;
  } catch (const Error& e) {
    // An offending point sitting on the spectrum is itself a violation.
    if (e.code() != ErrorCode::SingularSample) throw;
    std::ostringstream msg;
    msg << std::setprecision(17) << "strip violation at mu = " << *first.offending << " (" << e.what() << ")";
    fail(ErrorCode::StripViolation, msg.str());
  }
  // The retry evaluates the envelope at points that move with r; fold them
  // into the fit until M stops growing.
  double m = std::max(cert.m, fitted);
  for (int round = 0; round < 8; ++round) {
    const double w = strip_certificate(m).halfwidth;
    double grown = m;
    try {
      grown = std::max(m, log_envelope_fit(a, envelope_check_points(a, w, n_samples, seed + 1)).m);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularSample) throw;
      break;  // the retry reports the singular point as a violation
    }
    if (grown <= m) break;
    m = grown;
  }
  const std::size_t refits = cert.refits + 1;
  out = strip_certificate(m);
  out.refits = refits;
  out.s_oracle = linalg::max_real_part(linalg::eigenvalues(a));
  auto second = run_strip_checks(a, out, n_samples, seed + 1);
  if (second.offending) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "strip violation at mu = " << *second.offending << " (M = " << m
        << ", r = " << out.r << ")";
    fail(ErrorCode::StripViolation, msg.str());
  }
  out.verified = true;
  return out;
}

std::string strip_csv(const StripCertificate& cert) {
  std::ostringstream out;
  out << std::setprecision(17) << "re_mu,im_mu,resolvent_norm,bound,pass\n";
  for (const auto& s : cert.samples)
    out << s.mu.real() << ',' << s.mu.imag() << ',' << s.resolvent_norm << ',' << s.bound << ','
        << (s.pass ? "true" : "false") << '\n';
  return out.str();
}

// --- end-to-end --------------------------------------------------------------

std::string to_string(SemigroupStatus s) {
  switch (s) {
    case SemigroupStatus::Certified: return "certified";
    case SemigroupStatus::HypothesisUnmet: return "hypothesis_unmet";
    case SemigroupStatus::CertificationFailed: return "certification_failed";
    case SemigroupStatus::InternalInconsistency: return "internal_inconsistency";
  }
  return "unknown";
}

namespace {

// Above this M the strip width r = 4 e^{-(4M+1)} drops below 1e-14.
constexpr double kRescaleThreshold = 8.0;
constexpr int kMaxRescales = 12;

}  // namespace

SemigroupReport analyze_semigroup(const GeneratorSpec& gen, const resolvent::SamplePlan& plan,
                                  const std::vector<double>& p_plan, const SemigroupOptions& options) {
  require(!p_plan.empty(), ErrorCode::InvalidArgument, "p plan is empty");
  for (double p : p_plan) require(p >= 1.0 && std::isfinite(p), ErrorCode::InvalidArgument, "p must lie in [1, inf)");

  SemigroupReport report;
  report.dim = gen.dim();
  const auto norm = normalize(gen);
  report.scale = norm.scale;
  report.s_oracle = linalg::max_real_part(linalg::eigenvalues(gen.matrix()));
  const Matrix& a = norm.matrix;
  const auto pairs = resolvent::make_pairs(gen.dim(), plan);

  // Hypothesis: every sampled pair has an L^p trajectory for some p in the plan.
  std::optional<DecayBound> decay;
  std::string decay_error;
  try {
    const double alpha_guess = linalg::max_real_part(linalg::eigenvalues(a)) + 1e-3;
    const double sweep = alpha_guess < 0.0 ? std::min(options.max_horizon, std::max(50.0, 40.0 / -alpha_guess))
                                           : 1.0;
    decay = decay_bound(a, sweep);
  } catch (const Error& e) {
    decay_error = e.what();
  }
  report.decay = decay;

  const double spread = std::max(1.0, linalg::max_modulus(linalg::eigenvalues(a)));
  const double step = std::min(options.max_step, 0.05 / spread);
  for (std::size_t i = 0; i < pairs.size();) {
    std::size_t j = i;
    std::vector<Vector> functionals;
    while (j < pairs.size() && pairs[j].x == pairs[i].x) functionals.push_back(pairs[j++].xp);
    std::vector<PairIntegrability> group(j - i);
    for (std::size_t k = i; k < j; ++k) group[k - i].label = pairs[k].label;
    if (!decay) {
      for (auto& g : group) g.error = decay_error;
    } else {
      std::vector<bool> done(group.size(), false);
      for (double p : p_plan) {
        const double scale = std::max(1.0, decay->kappa * pairs[i].x.norm());
        const double horizon =
            std::min(options.max_horizon, std::max(20.0, (p * std::log(scale) + 30.0) / (p * -decay->alpha)));
        const auto steps = static_cast<std::size_t>(std::ceil(horizon / step));
        std::vector<LpNorm> norms;
        try {
          norms = lp_trajectory_norms(a, pairs[i].x, functionals, p, horizon, steps, *decay);
        } catch (const Error& e) {
          for (std::size_t k = 0; k < group.size(); ++k)
            if (!done[k]) group[k].error = e.what();
          continue;
        }
        for (std::size_t k = 0; k < group.size(); ++k) {
          if (done[k] || !std::isfinite(norms[k].value)) continue;
          group[k].p = p;
          group[k].norm = norms[k];
          group[k].error.reset();
          done[k] = true;
        }
        if (std::all_of(done.begin(), done.end(), [](bool b) { return b; })) break;
      }
    }
    for (auto& g : group) report.pairs.push_back(std::move(g));
    i = j;
  }
  const bool hypothesis =
      std::all_of(report.pairs.begin(), report.pairs.end(), [](const auto& p) { return p.norm.has_value(); });
  if (!hypothesis) {
    report.status = SemigroupStatus::HypothesisUnmet;
    report.messages.push_back(decay ? "some sampled pair has no finite L^p trajectory norm"
                                    : "hypothesis unmet: " + decay_error);
    return report;
  }

  // Hoelder link |<x', R(lambda) x>| <= M_q(Re lambda) C_p on a few lambdas.
  {
    std::vector<double> ims{0.0};
    for (const auto& z : linalg::eigenvalues(a))
      if (ims.size() < 4) ims.push_back(z.imag());
    for (double re : {0.05, 0.2, 0.6}) {
      for (double im : ims) {
        const Matrix res = linalg::resolvent(a, cplx(re, im));
        for (std::size_t k = 0; k < pairs.size(); ++k) {
          const auto& pn = report.pairs[k];
          const double lhs = std::abs(linalg::pair(pairs[k].xp, res * pairs[k].x));
          const double rhs = mq_factor(re, conjugate(*pn.p)) * pn.norm->value;
          ++report.hoelder.checks;
          if (rhs > 0.0) report.hoelder.worst_ratio = std::max(report.hoelder.worst_ratio, lhs / rhs);
          if (lhs > rhs * (1.0 + 1e-6) + 1e-12) ++report.hoelder.failures;
        }
      }
    }
  }

  // Envelope fit; large M is brought down by a further rescaling c A, which
  // keeps omega_0 <= 1/2 since the spectral bound is negative here.
  double c = 1.0;
  Matrix b = a;
  try {
    auto fit = log_envelope_fit(b, envelope_samples(b));
    for (int k = 0; k < kMaxRescales && fit.m > kRescaleThreshold; ++k) {
      c *= std::max(2.0, fit.m / 2.0);
      b = a * c;
      fit = log_envelope_fit(b, envelope_samples(b));
    }
    report.envelope = fit;
    const auto cert = verify_strip(b, strip_certificate(fit.m), options.verify_samples, plan.seed);
    report.certificate = cert;
  } catch (const Error& e) {
    report.status = SemigroupStatus::CertificationFailed;
    report.messages.push_back(e.what());
    return report;
  }
  report.scale = norm.scale * c;
  const auto& cert = *report.certificate;
  if (!(cert.s0_upper < 0.0)) {
    report.status = SemigroupStatus::CertificationFailed;
    report.messages.push_back("strip width underflows; no strict bound");
    return report;
  }
  report.s0_upper_scaled = cert.s0_upper;
  report.s0_upper = cert.s0_upper / report.scale;
  report.status = SemigroupStatus::Certified;
  if (report.s_oracle > 0.0 || report.s_oracle > *report.s0_upper) {
    report.status = SemigroupStatus::InternalInconsistency;
    report.messages.push_back("certified bound lies below the spectral bound");
  }
  if (report.hoelder.failures > 0) {
    report.status = SemigroupStatus::InternalInconsistency;
    report.messages.push_back("Hoelder link failed on " + std::to_string(report.hoelder.failures) + " samples");
  }
  return report;
}

}  // namespace specgate::semigroup
