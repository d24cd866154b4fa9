#include "specgate/run.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "specgate/error.hpp"
#include "specgate/fuzz.hpp"
#include "specgate/resolvent.hpp"
#include "specgate/semigroup.hpp"

namespace specgate::run {

using io::json;

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json settings(const plan::AnalysisPlan& p) {
  return {{"probe_eps", io::number(p.horizons.probe_eps)},
          {"n_terms", p.horizons.n_terms},
          {"max_terms", p.horizons.max_terms},
          {"quadrature_steps", p.horizons.quadrature_steps},
          {"neumann_rel_tol", 1e-12},
          {"strip_tolerance", semigroup::kStripTolerance},
          {"exp_budget", semigroup::kExpBudget},
          {"power_bounded_threshold", operators::kPowerBoundedThreshold},
          {"seed", p.sample.seed}};
}

std::string pairs_csv(const resolvent::StabilityReport& r) {
  std::ostringstream out;
  out << "label,verdict,constant,residual,exact\n";
  char buf[64];
  for (const auto& p : r.pairs) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", p.certificate.constant, p.certificate.residual);
    out << p.label << ',' << seqspace::to_string(p.certificate.verdict) << ',' << buf << ','
        << (p.certificate.exact ? "true" : "false") << '\n';
  }
  return out.str();
}

void run_discrete(const plan::AnalysisPlan& p, bool certify, RunResult& out) {
  resolvent::DiscreteOptions opt;
  opt.n_terms = p.horizons.n_terms;
  opt.max_terms = p.horizons.max_terms;
  opt.probe_eps = p.horizons.probe_eps;
  const auto& t = *p.op;
  const auto report = resolvent::analyze_discrete(t, p.sample, plan::resolve_family(p.family), opt);
  json result = io::to_json(report);

  switch (report.verdict) {
    case resolvent::ReportVerdict::ConsistentWithTheorem: out.exit_code = report.all_governed ? 0 : 2; break;
    case resolvent::ReportVerdict::Inconclusive: out.exit_code = 2; break;
    case resolvent::ReportVerdict::CounterexampleCandidate: out.exit_code = 3; break;
  }
  std::size_t governed = 0;
  for (const auto& pc : report.pairs) governed += pc.certificate.verdict == seqspace::Verdict::Governed;
  std::ostringstream summary;
  summary << "verdict: " << resolvent::to_string(report.verdict) << "\n"
          << "pairs governed: " << governed << "/" << report.pairs.size() << "\n"
          << "spectral radius (oracle): " << report.r_oracle << ", Gelfand estimate: " << report.gelfand << "\n";
  out.csv.emplace_back("pairs.csv", pairs_csv(report));

  if (certify) {
    cplx lambda = 1.0;
    if (p.probe_lambda) {
      lambda = *p.probe_lambda;
    } else {
      const auto sigma = operators::spectrum(t);
      cplx best = 0.0;
      for (const auto& z : sigma)
        if (std::abs(z) > std::abs(best)) best = z;
      if (std::abs(best) > 0.0) lambda = best / std::abs(best);
    }
    require(std::abs(lambda) > 0.0, ErrorCode::InvalidArgument, "probe lambda must be nonzero");
    const auto probe = resolvent::build_probe(t, lambda, p.horizons.r_grid, report.governing_sequence);
    result["probe"] = io::to_json(probe);
    out.csv.emplace_back("probe.csv", resolvent::probe_csv(probe));
    if (linalg::distance_to(lambda, operators::spectrum(t)) <= 1e-8) {
      json lower = json::array();
      for (double r : p.horizons.r_grid)
        lower.push_back(io::to_json(resolvent::resolvent_lower_bound_check(t, r, lambda, report.governing_sequence)));
      result["lower_bound"] = lower;
      summary << "lower-bound checks at spectral value " << lambda << ": " << lower.size() << "\n";
    }
  }
  out.report["result"] = result;
  out.report["verdict"] = resolvent::to_string(report.verdict);
  out.summary = summary.str();
}

void run_semigroup(const plan::AnalysisPlan& p, RunResult& out) {
  const semigroup::GeneratorSpec gen(p.op->densify(), p.growth_hint);
  const auto report = semigroup::analyze_semigroup(gen, p.sample, p.p_plan);
  switch (report.status) {
    case semigroup::SemigroupStatus::Certified: out.exit_code = 0; break;
    case semigroup::SemigroupStatus::HypothesisUnmet:
    case semigroup::SemigroupStatus::CertificationFailed: out.exit_code = 2; break;
    case semigroup::SemigroupStatus::InternalInconsistency: out.exit_code = 3; break;
  }
  out.report["result"] = io::to_json(report);
  out.report["verdict"] = semigroup::to_string(report.status);
  std::ostringstream summary;
  summary << "status: " << semigroup::to_string(report.status) << "\n"
          << "spectral bound (oracle): " << report.s_oracle << "\n";
  if (report.s0_upper) summary << "certified s0 upper bound: " << *report.s0_upper << "\n";
  for (const auto& m : report.messages) summary << m << "\n";
  if (report.certificate) out.csv.emplace_back("strip.csv", semigroup::strip_csv(*report.certificate));
  out.summary = summary.str();
}

void run_fuzz(const plan::AnalysisPlan& p, RunResult& out) {
  const auto summary = fuzz::run_fuzz(fuzz::config_from_plan(p));
  out.exit_code = summary.exit_code();
  out.report["result"] = fuzz::to_json(summary);
  out.report["verdict"] = summary.inconsistent > 0 ? "internal_inconsistency"
                          : summary.unexpected > 0 ? "unexpected_outcomes"
                                                   : "all_expected";
  for (const auto& r : summary.reproducers)
    out.reproducers.emplace_back("reproducer_" + std::to_string(r.index) + ".json", r.plan);
  std::ostringstream s;
  s << "cases: " << summary.cases.size() << ", consistent: " << summary.consistent
    << ", hypothesis unmet: " << summary.hypothesis_unmet << ", internal inconsistency: " << summary.inconsistent
    << ", unexpected: " << summary.unexpected << "\n";
  out.summary = s.str();
  std::ostringstream csv;
  csv << "index,kind,dim,exit_code,verdict\n";
  for (const auto& c : summary.cases)
    csv << c.index << ',' << (c.marginal ? "marginal" : "stable") << ',' << c.dim << ',' << c.exit_code << ','
        << c.verdict << '\n';
  out.csv.emplace_back("fuzz.csv", csv.str());
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::Govern: return "govern";
    case Command::Certify: return "certify";
    case Command::Semigroup: return "semigroup";
    case Command::Fuzz: return "fuzz";
  }
  return "unknown";
}

RunResult run(plan::AnalysisPlan p, const RunOptions& options) {
  RunResult out;
  const plan::Mode wanted = options.command == Command::Semigroup ? plan::Mode::Semigroup
                            : options.command == Command::Fuzz    ? plan::Mode::Fuzz
                                                                  : plan::Mode::Discrete;
  if (p.mode != wanted) {
    out.exit_code = 1;
    out.summary = "plan mode \"" + plan::to_string(p.mode) + "\" does not match command \"" +
                  to_string(options.command) + "\"\n";
    return out;
  }
  if (options.cases) p.fuzz.stable = *options.cases;
  if (options.marginal) p.fuzz.marginal = *options.marginal;
  if (options.workers) p.fuzz.workers = std::max<std::size_t>(1, *options.workers);
  if (options.seed) p.sample.seed = *options.seed;

  out.report = {{"specgate_version", kVersion},
                {"timestamp", utc_timestamp()},
                {"command", to_string(options.command)},
                {"plan", plan::to_json(p)},
                {"settings", settings(p)}};
  try {
    switch (options.command) {
      case Command::Govern: run_discrete(p, false, out); break;
      case Command::Certify: run_discrete(p, true, out); break;
      case Command::Semigroup: run_semigroup(p, out); break;
      case Command::Fuzz: run_fuzz(p, out); break;
    }
  } catch (const Error& e) {
    const bool usage = e.code() == ErrorCode::ValidationError || e.code() == ErrorCode::ParseError;
    out.exit_code = usage ? 1 : 2;
    out.report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    out.report["verdict"] = "error";
    out.summary = std::string("error: ") + e.what() + "\n";
  }
  out.report["exit_code"] = out.exit_code;
  return out;
}

json without_timestamp(json report) {
  report.erase("timestamp");
  return report;
}

}  // namespace specgate::run
