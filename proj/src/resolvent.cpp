#include "specgate/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "specgate/error.hpp"

namespace specgate::resolvent {

using operators::OperatorSpec;
using seqspace::ComplexSeq;
using seqspace::NonNegSeq;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double relative_residual(double lhs, double rhs) {
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
  return (rhs - lhs) / scale;
}

ChainLink make_link(double lhs, double rhs) { return {lhs, rhs, relative_residual(lhs, rhs)}; }

}  // namespace

EValue e_of_r(const NonNegSeq& f, double r) {
  if (!(r > 1.0) || !std::isfinite(r)) fail(ErrorCode::InvalidR, "e(r) needs r > 1");
  const double w = 1.0 / r;
  double power = w;
  double sum = 0.0;
  for (double v : f.entries()) {
    sum += v * power;
    power *= w;
  }
  EValue e;
  e.value = (r - 1.0) * sum;
  double t = 0.0;
  if (f.tail_bound()) {
    t = *f.tail_bound();
  } else {
    t = f.sup_norm();
    e.conservative = true;
  }
  e.tail_bound = t * std::pow(w, static_cast<double>(f.size()));
  return e;
}

DecayCertificate e_decay_certificate(const NonNegSeq& f, double eps, std::size_t n_samples) {
  require(eps > 0.0, ErrorCode::InvalidArgument, "eps must be positive");
  require(!f.is_zero(), ErrorCode::InvalidArgument, "e(r) decay is vacuous for f = 0");
  if (f.tail_bound() && *f.tail_bound() > eps) {
    fail(ErrorCode::TailTooLarge, "tail bound of f exceeds eps");
  }
  DecayCertificate cert;
  cert.eps = eps;
  const auto& entries = f.entries();
  std::size_t n0 = 0;
  for (std::size_t n = entries.size(); n-- > 0;) {
    if (entries[n] > eps) {
      n0 = n + 1;
      break;
    }
  }
  cert.conclusive = n0 < entries.size() || (f.tail_bound() && *f.tail_bound() <= eps);
  cert.n0 = std::max<std::size_t>(n0, 1);
  cert.delta = eps / (static_cast<double>(cert.n0) * f.sup_norm());

  // Half the samples spread linearly over (1, 1 + delta), half crowd r -> 1.
  std::vector<double> rs;
  const std::size_t half = std::max<std::size_t>(1, n_samples / 2);
  for (std::size_t j = 1; j <= half; ++j) {
    rs.push_back(1.0 + cert.delta * static_cast<double>(j) / static_cast<double>(half + 1));
  }
  for (std::size_t j = 1; j <= n_samples - std::min(n_samples, half); ++j) {
    rs.push_back(1.0 + cert.delta * std::ldexp(1.0, -static_cast<int>(j)));
  }
  cert.all_pass = true;
  for (double r : rs) {
    if (!(r > 1.0)) continue;
    auto e = e_of_r(f, r);
    DecaySample s{r, e.value, e.tail_bound, e.value <= (2.0 * eps + e.tail_bound) * (1.0 + 1e-12)};
    cert.max_e = std::max(cert.max_e, e.value);
    cert.all_pass = cert.all_pass && s.pass;
    cert.samples.push_back(s);
  }
  return cert;
}

NeumannResult neumann_resolvent(const OperatorSpec& t, double r, cplx lambda, std::size_t terms) {
  require(r > 1.0, ErrorCode::InvalidR, "Neumann probe needs r > 1");
  require(std::abs(std::abs(lambda) - 1.0) <= 1e-12, ErrorCode::InvalidArgument,
          "probe direction must be unimodular");
  require(terms >= 1, ErrorCode::InvalidArgument, "Neumann series needs at least one term");
  const Matrix m = t.densify();
  const auto n = m.rows();
  const cplx z = r * lambda;
  const cplx zinv = 1.0 / z;

  NeumannResult out;
  out.approximation = Matrix::Zero(n, n);
  Matrix power = Matrix::Identity(n, n);
  cplx coeff = zinv;
  double prev_term = -1.0;
  std::size_t growing = 0;
  for (std::size_t k = 0; k < terms; ++k) {
    out.approximation += coeff * power;
    // Divergence: 32 consecutive non-shrinking increments while the root test
    // exceeds r.
    const double term = power.norm() * std::abs(coeff);
    growing = (prev_term >= 0.0 && term >= prev_term) ? growing + 1 : 0;
    prev_term = term;
    if (growing >= 32 && k > 0 &&
        std::pow(power.norm(), 1.0 / static_cast<double>(k)) >= r) {
      fail(ErrorCode::DivergentSeries, "Neumann partial sums keep growing at r = " + std::to_string(r));
    }
    power = m * power;
    coeff *= zinv;
  }
  out.terms = terms;
  const double norm_k = linalg::op_norm(power);
  if (norm_k == 0.0) {
    out.rho = 0.0;
    out.tail_bound = 0.0;
    return out;
  }
  out.rho = std::pow(norm_k, 1.0 / static_cast<double>(terms));
  out.tail_bound = out.rho < r
                       ? norm_k * std::pow(r, -static_cast<double>(terms)) / (r - out.rho)
                       : kInf;
  return out;
}

NeumannResult neumann_resolvent_adaptive(const OperatorSpec& t, double r, cplx lambda, double rel_tol,
                                         std::size_t max_terms) {
  std::size_t terms = 16;
  for (;;) {
    auto res = neumann_resolvent(t, r, lambda, terms);
    const double scale = linalg::op_norm(res.approximation);
    if (res.tail_bound <= rel_tol * scale || terms >= max_terms) return res;
    terms = std::min(terms * 2, max_terms);
  }
}

ChainRecord weak_resolvent_bound_check(const OperatorSpec& t, const Vector& x, const Vector& xp,
                                       const NonNegSeq& f, double c, double r, cplx lambda,
                                       const std::optional<operators::DecayFit>& fit) {
  require(r > 1.0, ErrorCode::InvalidR, "estimate chain needs r > 1");
  const std::size_t n = f.size();
  const ComplexSeq a = operators::weak_orbit(t, x, xp, n, fit);

  const Matrix res = linalg::resolvent(t.densify(), r * lambda);
  const double weak = std::abs(linalg::pair(xp, res * x));

  const NonNegSeq mod = seqspace::modulus(a);
  const NonNegSeq sorted = seqspace::rearrange(mod);
  const double w = 1.0 / r;
  double power = w;
  double series = 0.0;
  double rearranged = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    series += mod[k] * power;
    rearranged += sorted[k] * power;
    power *= w;
  }
  double tail = 0.0;
  if (a.tail_bound()) tail = *a.tail_bound() * std::pow(w, static_cast<double>(n)) / (r - 1.0);
  const double envelope = c * e_of_r(f, r).value / (r - 1.0);

  ChainRecord rec;
  rec.weak_vs_series = make_link(weak, series + tail);
  rec.series_vs_rearranged = make_link(series, rearranged);
  rec.rearranged_vs_e = make_link(rearranged, envelope);
  rec.min_residual = std::min({rec.weak_vs_series.residual, rec.series_vs_rearranged.residual,
                               rec.rearranged_vs_e.residual});
  return rec;
}

LowerBoundRecord resolvent_lower_bound_check(const OperatorSpec& t, double r, cplx lambda_spectral,
                                             const std::optional<NonNegSeq>& f) {
  require(r > 1.0, ErrorCode::InvalidR, "lower bound check needs r > 1");
  const auto sigma = operators::spectrum(t);
  LowerBoundRecord rec;
  rec.eigen_error = linalg::distance_to(lambda_spectral, sigma);
  if (rec.eigen_error > 1e-8) {
    fail(ErrorCode::NotSpectral, "lambda is not an eigenvalue of T (distance " +
                                     std::to_string(rec.eigen_error) + ")");
  }
  const cplx z = r * lambda_spectral;
  rec.resolvent_norm = linalg::resolvent_norm(t.densify(), z);
  rec.inverse_distance = 1.0 / linalg::distance_to(z, sigma);
  rec.inverse_gap = 1.0 / (r - 1.0);
  rec.norm_vs_distance = make_link(rec.inverse_distance, rec.resolvent_norm);
  rec.distance_vs_gap = make_link(1.0 / (r - 1.0 + rec.eigen_error), rec.inverse_distance);
  if (f) {
    const double e = e_of_r(*f, r).value;
    if (e > 0.0) {
      rec.inverse_e = 1.0 / e;
      rec.scaled_norm = (r - 1.0) / e * rec.resolvent_norm;
    }
  }
  return rec;
}

std::vector<double> default_r_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 12; ++k) grid.push_back(1.0 + std::ldexp(1.0, -k));
  return grid;
}

ResolventProbe build_probe(const OperatorSpec& t, cplx lambda, const std::vector<double>& r_grid,
                           const std::optional<NonNegSeq>& f) {
  ResolventProbe probe;
  probe.lambda = lambda;
  probe.r_grid = r_grid;
  const Matrix m = t.densify();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double r : r_grid) {
    require(r > 1.0, ErrorCode::InvalidR, "probe grid entries must exceed 1");
    probe.norms.push_back(linalg::resolvent_norm(m, r * lambda));
    try {
      auto neu = neumann_resolvent_adaptive(t, r, lambda, 1e-12, 1u << 12);
      probe.neumann_norms.push_back(linalg::op_norm(neu.approximation));
      probe.tail_estimates.push_back(neu.tail_bound);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DivergentSeries) throw;
      probe.neumann_norms.push_back(nan);
      probe.tail_estimates.push_back(kInf);
    }
    probe.e_values.push_back(f ? e_of_r(*f, r).value : nan);
  }
  return probe;
}

std::string probe_csv(const ResolventProbe& probe) {
  std::ostringstream out;
  out << "r,e_r,resolvent_norm,neumann_norm,tail\n";
  char buf[256];
  for (std::size_t i = 0; i < probe.r_grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", probe.r_grid[i], probe.e_values[i],
                  probe.norms[i], probe.neumann_norms[i], probe.tail_estimates[i]);
    out << buf;
  }
  return out.str();
}

// --- end-to-end --------------------------------------------------------------

std::string to_string(ReportVerdict v) {
  switch (v) {
    case ReportVerdict::ConsistentWithTheorem: return "consistent_with_theorem";
    case ReportVerdict::CounterexampleCandidate: return "counterexample_candidate";
    case ReportVerdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::vector<SamplePair> make_pairs(std::size_t dim, const SamplePlan& plan) {
  std::vector<SamplePair> pairs;
  const auto n = static_cast<Eigen::Index>(dim);
  if (plan.coordinate_pairs.value_or(dim <= 8)) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        pairs.push_back({"e" + std::to_string(j) + "->e'" + std::to_string(i), Vector::Unit(n, j),
                         Vector::Unit(n, i)});
      }
    }
  }
  std::mt19937_64 rng(plan.seed);
  std::normal_distribution<double> normal;
  auto unit = [&] {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(normal(rng), normal(rng));
    return Vector(v / v.norm());
  };
  for (std::size_t k = 0; k < plan.random_pairs; ++k) {
    Vector x = unit();
    Vector xp = unit();
    pairs.push_back({"random" + std::to_string(k), std::move(x), std::move(xp)});
  }
  return pairs;
}

namespace {

struct GaugeRunner {
  const seqspace::Gauge* gauge;
  std::optional<seqspace::Staircase> staircase;
  std::optional<std::string> build_error;
};

}  // namespace

StabilityReport analyze_discrete(const OperatorSpec& t, const SamplePlan& plan, const Family& family,
                                 const DiscreteOptions& options) {
  StabilityReport report;
  report.dim = t.dim();
  report.r_oracle = operators::spectral_radius_oracle(t);
  report.gelfand = operators::gelfand_estimate(t, std::max<std::size_t>(options.n_terms, 8)).estimate;
  report.power_bounded = operators::power_norms(t, std::max<std::size_t>(options.n_terms, 1)).power_bounded;

  // Horizon: long enough that the fitted tail sits well below the probe scale.
  std::size_t horizon = std::max<std::size_t>(options.n_terms, 1);
  auto fit = operators::fit_power_decay(t, horizon);
  if (fit && fit->nilpotent_at) {
    horizon = std::max(horizon, *fit->nilpotent_at);
  } else {
    while (fit && horizon < options.max_terms &&
           !(fit->peak_inside && fit->tail_at(horizon) <= 1e-3 * options.probe_eps)) {
      horizon = std::min(horizon * 2, options.max_terms);
      fit = operators::fit_power_decay(t, horizon);
    }
  }
  report.horizon = horizon;

  const auto pairs = make_pairs(t.dim(), plan);
  const auto* sequences = std::get_if<std::vector<NonNegSeq>>(&family);
  const auto* gauges = std::get_if<GaugeFamily>(&family);

  std::vector<GaugeRunner> runners;
  if (gauges) {
    require(!gauges->gauges.empty(), ErrorCode::InvalidArgument, "gauge family must be non-empty");
    for (const auto& g : gauges->gauges) {
      GaugeRunner run{&g, std::nullopt, std::nullopt};
      try {
        const std::size_t levels = seqspace::staircase_levels_covering(g, horizon, horizon);
        run.staircase = seqspace::staircase_from_gauge(g, levels);
      } catch (const Error& e) {
        run.build_error = e.what();
      }
      runners.push_back(std::move(run));
    }
  } else {
    require(sequences && !sequences->empty(), ErrorCode::InvalidArgument, "governing family must be non-empty");
  }

  std::size_t i = 0;
  while (i < pairs.size()) {
    // Pairs sharing x reuse one orbit.
    std::size_t j = i;
    std::vector<Vector> functionals;
    while (j < pairs.size() && pairs[j].x == pairs[i].x) functionals.push_back(pairs[j++].xp);
    const auto orbits = operators::weak_orbits(t, pairs[i].x, functionals, horizon, fit);
    for (std::size_t k = 0; k < orbits.size(); ++k) {
      PairCertificate pc;
      pc.label = pairs[i + k].label;
      const ComplexSeq& a = orbits[k];
      if (sequences) {
        pc.certificate = seqspace::governs(*sequences, a, options.probe_eps);
      } else {
        std::vector<std::string> failures;
        for (std::size_t g = 0; g < runners.size(); ++g) {
          if (!runners[g].staircase) {
            failures.push_back("gauge " + std::to_string(g) + ": " + *runners[g].build_error);
            continue;
          }
          try {
            auto sc = seqspace::staircase_governs(*runners[g].gauge, *runners[g].staircase, a, options.probe_eps);
            pc.certificate = sc.certificate;
            if (sc.certificate.verdict == seqspace::Verdict::Governed) {
              pc.gauge_index = g;
              pc.mu = sc.mu;
              break;
            }
            for (const auto& f : sc.certificate.failures) failures.push_back("gauge " + std::to_string(g) + ": " + f);
          } catch (const Error& e) {
            failures.push_back("gauge " + std::to_string(g) + ": " + e.what());
          }
        }
        if (!pc.gauge_index) {
          pc.certificate.verdict = pc.certificate.verdict == seqspace::Verdict::InconclusiveTruncation
                                       ? seqspace::Verdict::InconclusiveTruncation
                                       : seqspace::Verdict::NotGoverned;
          pc.certificate.failures = failures;
        }
      }
      report.pairs.push_back(std::move(pc));
    }
    i = j;
  }

  report.all_governed = std::all_of(report.pairs.begin(), report.pairs.end(), [](const PairCertificate& p) {
    return p.certificate.verdict == seqspace::Verdict::Governed;
  });
  report.all_exact = std::all_of(report.pairs.begin(), report.pairs.end(),
                                 [](const PairCertificate& p) { return p.certificate.exact; });
  if (report.all_governed && report.r_oracle >= 1.0) {
    report.verdict = report.all_exact ? ReportVerdict::CounterexampleCandidate : ReportVerdict::Inconclusive;
  } else {
    report.verdict = ReportVerdict::ConsistentWithTheorem;
  }

  // e(r) decay record for the sequence that plays the role of f.
  try {
    if (sequences) {
      report.governing_sequence = seqspace::merge_governing(*sequences);
    } else {
      for (const auto& p : report.pairs) {
        if (p.gauge_index) {
          report.governing_sequence = runners[*p.gauge_index].staircase->f;
          break;
        }
      }
    }
  } catch (const Error&) {
    report.governing_sequence.reset();
  }
  if (report.governing_sequence) {
    for (int k = 2; k <= 6; ++k) {
      const double eps = std::ldexp(1.0, -k);
      try {
        auto cert = e_decay_certificate(*report.governing_sequence, eps, 16);
        report.e_decay_record.push_back({eps, cert.delta, cert.max_e, cert.all_pass});
      } catch (const Error&) {
      }
    }
  }
  return report;
}

}  // namespace specgate::resolvent
