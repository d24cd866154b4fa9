#include "specgate/fuzz.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "specgate/error.hpp"

namespace specgate::fuzz {

namespace {

Matrix random_unitary(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = cplx(normal(rng), normal(rng));
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ();
}

int discrete_exit(const resolvent::StabilityReport& r) {
  switch (r.verdict) {
    case resolvent::ReportVerdict::ConsistentWithTheorem: return r.all_governed ? 0 : 2;
    case resolvent::ReportVerdict::Inconclusive: return 2;
    case resolvent::ReportVerdict::CounterexampleCandidate: return 3;
  }
  return 1;
}

int semigroup_exit(semigroup::SemigroupStatus s) {
  switch (s) {
    case semigroup::SemigroupStatus::Certified: return 0;
    case semigroup::SemigroupStatus::HypothesisUnmet:
    case semigroup::SemigroupStatus::CertificationFailed: return 2;
    case semigroup::SemigroupStatus::InternalInconsistency: return 3;
  }
  return 1;
}

double round_to(double v, double unit) { return std::round(v / unit) * unit; }

}  // namespace

Matrix CaseRecipe::matrix() const {
  const auto n = static_cast<Eigen::Index>(eigenvalues.size());
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = eigenvalues[static_cast<std::size_t>(i)];
  return similarity * d.asDiagonal() * similarity.inverse();
}

CaseRecipe generate_case(plan::Mode pipeline, bool marginal, std::size_t index, unsigned long long seed,
                         std::size_t max_dim) {
  require(pipeline != plan::Mode::Fuzz, ErrorCode::InvalidArgument, "fuzz pipeline must be discrete or semigroup");
  require(max_dim >= 1, ErrorCode::InvalidArgument, "max_dim must be positive");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(pipeline == plan::Mode::Discrete ? 1 : 2)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> dims(1, max_dim);

  CaseRecipe c;
  c.index = index;
  c.marginal = marginal;
  c.pipeline = pipeline;
  const std::size_t n = dims(rng);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    if (pipeline == plan::Mode::Discrete) {
      const double radius = 0.95 * std::sqrt(unit(rng));
      c.eigenvalues.push_back(std::polar(radius, kTwoPi * unit(rng)));
    } else {
      const double re = -3.0 + (3.0 - 0.05) * unit(rng);
      c.eigenvalues.emplace_back(re, -3.0 + 6.0 * unit(rng));
    }
  }
  if (marginal) {
    c.eigenvalues[0] = pipeline == plan::Mode::Discrete ? std::polar(1.0, kTwoPi * unit(rng))
                                                        : cplx(0.0, -3.0 + 6.0 * unit(rng));
  }
  const auto en = static_cast<Eigen::Index>(n);
  Vector s(en);
  for (Eigen::Index i = 0; i < en; ++i) s(i) = i == 0 ? 1.0 : std::pow(10.0, 3.0 * unit(rng));
  const Matrix u = random_unitary(rng, en);
  const Matrix w = random_unitary(rng, en);
  c.similarity = u * s.asDiagonal() * w;
  c.seed = rng();
  return c;
}

FuzzConfig config_from_plan(const plan::AnalysisPlan& p) {
  FuzzConfig c;
  c.pipeline = p.fuzz.pipeline;
  c.stable = p.fuzz.stable;
  c.marginal = p.fuzz.marginal;
  c.max_dim = p.fuzz.resolved_max_dim();
  c.workers = p.fuzz.workers;
  c.seed = p.sample.seed;
  c.sample = p.sample;
  c.discrete.n_terms = p.horizons.n_terms;
  c.discrete.max_terms = p.horizons.max_terms;
  c.discrete.probe_eps = p.horizons.probe_eps;
  c.p_plan = p.p_plan;
  return c;
}

CaseOutcome evaluate_case(const CaseRecipe& c, const FuzzConfig& config) {
  CaseOutcome out;
  out.index = c.index;
  out.marginal = c.marginal;
  out.dim = c.dim();
  resolvent::SamplePlan sample = config.sample;
  sample.seed = c.seed;
  try {
    if (c.pipeline == plan::Mode::Discrete) {
      resolvent::GaugeFamily phi;
      for (double p : {1.0, 2.0, 4.0, 8.0}) phi.gauges.push_back(seqspace::Gauge::power(p));
      const auto report = resolvent::analyze_discrete(operators::OperatorSpec::dense(c.matrix()), sample, phi,
                                                      config.discrete);
      out.exit_code = discrete_exit(report);
      out.verdict = resolvent::to_string(report.verdict);
      std::size_t governed = 0;
      for (const auto& pc : report.pairs) governed += pc.certificate.verdict == seqspace::Verdict::Governed;
      out.detail = std::to_string(governed) + "/" + std::to_string(report.pairs.size()) + " pairs governed";
    } else {
      const auto report =
          semigroup::analyze_semigroup(semigroup::GeneratorSpec(c.matrix()), sample, config.p_plan, config.semigroup);
      out.exit_code = semigroup_exit(report.status);
      out.verdict = semigroup::to_string(report.status);
      if (!report.messages.empty()) out.detail = report.messages.front();
    }
  } catch (const Error& e) {
    out.exit_code = 2;
    out.verdict = "error";
    out.detail = e.what();
  }
  if (config.exit_hook) out.exit_code = config.exit_hook(c, out.exit_code);
  return out;
}

Reproducer shrink(const CaseRecipe& c, const FuzzConfig& config) {
  Reproducer r;
  r.index = c.index;
  r.minimal = c;
  auto still_fails = [&](const CaseRecipe& cand) { return evaluate_case(cand, config).exit_code == 3; };

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t j = 0; r.minimal.dim() > 1 && j < r.minimal.dim(); ++j) {
      CaseRecipe cand = r.minimal;
      cand.eigenvalues.erase(cand.eigenvalues.begin() + static_cast<std::ptrdiff_t>(j));
      const auto n = static_cast<Eigen::Index>(cand.eigenvalues.size());
      const auto jj = static_cast<Eigen::Index>(j);
      Matrix v(n, n);
      for (Eigen::Index a = 0, ra = 0; a <= n; ++a) {
        if (a == jj) continue;
        for (Eigen::Index b = 0, cb = 0; b <= n; ++b) {
          if (b == jj) continue;
          v(ra, cb++) = r.minimal.similarity(a, b);
        }
        ++ra;
      }
      if (linalg::min_singular(v) <= 1e-8 * linalg::op_norm(v)) continue;
      cand.similarity = v;
      if (still_fails(cand)) {
        r.steps.push_back("dropped eigenvalue " + std::to_string(j));
        r.minimal = std::move(cand);
        changed = true;
        break;
      }
    }
  }
  {
    CaseRecipe cand = r.minimal;
    for (auto& z : cand.eigenvalues) {
      if (c.pipeline == plan::Mode::Discrete && std::abs(std::abs(z) - 1.0) < 1e-12) {
        z = std::polar(1.0, round_to(std::arg(z), 0.01));
      } else {
        z = cplx(round_to(z.real(), 0.01), round_to(z.imag(), 0.01));
      }
    }
    if (still_fails(cand)) {
      r.steps.push_back("rounded eigenvalues to 0.01");
      r.minimal = std::move(cand);
    }
  }
  {
    CaseRecipe cand = r.minimal;
    cand.similarity = Matrix::Identity(cand.similarity.rows(), cand.similarity.cols());
    if (still_fails(cand)) {
      r.steps.push_back("replaced the similarity by the identity");
      r.minimal = std::move(cand);
    }
  }

  plan::AnalysisPlan p;
  p.mode = r.minimal.pipeline;
  p.op = operators::OperatorSpec::dense(r.minimal.matrix());
  p.sample = config.sample;
  p.sample.seed = r.minimal.seed;
  p.sample.coordinate_pairs = p.sample.coordinate_pairs.value_or(r.minimal.dim() <= 8);
  if (p.mode == plan::Mode::Discrete) {
    p.family = plan::PowerList{{1.0, 2.0, 4.0, 8.0}};
    p.horizons.n_terms = config.discrete.n_terms;
    p.horizons.max_terms = config.discrete.max_terms;
    p.horizons.probe_eps = config.discrete.probe_eps;
  } else {
    p.p_plan = config.p_plan;
  }
  r.plan = plan::to_json(p);
  return r;
}

FuzzSummary run_fuzz(const FuzzConfig& config) {
  require(config.pipeline != plan::Mode::Fuzz, ErrorCode::InvalidArgument, "fuzz pipeline must be discrete or semigroup");
  const std::size_t total = config.stable + config.marginal;
  FuzzSummary s;
  s.cases.resize(total);
  std::vector<std::optional<CaseRecipe>> failing(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const auto c = generate_case(config.pipeline, k >= config.stable, k, config.seed, config.max_dim);
      s.cases[k] = evaluate_case(c, config);
      if (s.cases[k].exit_code == 3) failing[k] = c;
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, total));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t k = 0; k < total; ++k) {
    const auto& o = s.cases[k];
    if (o.exit_code == 0) ++s.consistent;
    else if (o.exit_code == 3) ++s.inconsistent;
    else ++s.hypothesis_unmet;
    if (!o.expected()) ++s.unexpected;
    if (failing[k]) s.reproducers.push_back(shrink(*failing[k], config));
  }
  return s;
}

io::json to_json(const FuzzSummary& s) {
  io::json cases = io::json::array();
  for (const auto& o : s.cases) {
    cases.push_back({{"index", o.index},
                     {"kind", o.marginal ? "marginal" : "stable"},
                     {"dim", o.dim},
                     {"exit_code", o.exit_code},
                     {"verdict", o.verdict},
                     {"detail", o.detail}});
  }
  io::json repro = io::json::array();
  for (const auto& r : s.reproducers) {
    io::json eig = io::json::array();
    for (const auto& z : r.minimal.eigenvalues) eig.push_back(io::to_json(z));
    repro.push_back({{"index", r.index}, {"steps", r.steps}, {"eigenvalues", eig}, {"plan", r.plan}});
  }
  return {{"counts",
           {{"total", s.cases.size()},
            {"consistent", s.consistent},
            {"hypothesis_unmet", s.hypothesis_unmet},
            {"internal_inconsistency", s.inconsistent},
            {"unexpected", s.unexpected}}},
          {"cases", cases},
          {"reproducers", repro}};
}

}  // namespace specgate::fuzz
