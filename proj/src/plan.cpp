#include "specgate/plan.hpp"

#include <cmath>
#include <sstream>

#include "specgate/error.hpp"

namespace specgate::plan {

using io::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  fail(ErrorCode::ValidationError, path + ": " + what);
}

Mode mode_from(const json& j, const std::string& path, bool allow_fuzz) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "discrete") return Mode::Discrete;
    if (s == "semigroup") return Mode::Semigroup;
    if (s == "fuzz" && allow_fuzz) return Mode::Fuzz;
  }
  invalid(path, allow_fuzz ? "expected \"discrete\", \"semigroup\" or \"fuzz\""
                           : "expected \"discrete\" or \"semigroup\"");
}

std::vector<double> reals_at_least_one(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) invalid(path, "expected a non-empty array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto p = path + "[" + std::to_string(i) + "]";
    const double v = io::real_from_json(j[i], p);
    if (!std::isfinite(v) || v < 1.0) invalid(p, "must be a finite number >= 1");
    out.push_back(v);
  }
  return out;
}

void parse_sample(const json& j, AnalysisPlan& plan) {
  const std::string path = "$.sample_plan";
  io::check_keys(j, {"coordinate_pairs", "random_pairs", "seed"}, path);
  if (j.contains("coordinate_pairs") && !j["coordinate_pairs"].is_null()) {
    if (!j["coordinate_pairs"].is_boolean()) invalid(path + ".coordinate_pairs", "expected a boolean");
    plan.sample.coordinate_pairs = j["coordinate_pairs"].get<bool>();
  }
  if (j.contains("random_pairs")) plan.sample.random_pairs = io::count_from_json(j["random_pairs"], path + ".random_pairs");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || (j["seed"].is_number_integer() && !j["seed"].is_number_unsigned() &&
                                           j["seed"].get<long long>() < 0))
      invalid(path + ".seed", "expected a non-negative integer");
    plan.sample.seed = j["seed"].get<unsigned long long>();
  }
}

void parse_horizons(const json& j, Horizons& h) {
  const std::string path = "$.horizons";
  io::check_keys(j, {"n_terms", "max_terms", "r_grid", "quadrature_steps", "probe_eps"}, path);
  if (j.contains("n_terms")) h.n_terms = io::count_from_json(j["n_terms"], path + ".n_terms");
  if (j.contains("max_terms")) h.max_terms = io::count_from_json(j["max_terms"], path + ".max_terms");
  if (h.n_terms < 1) invalid(path + ".n_terms", "must be at least 1");
  if (h.max_terms < h.n_terms) invalid(path + ".max_terms", "must be at least n_terms");
  if (j.contains("r_grid")) {
    const auto& g = j["r_grid"];
    if (!g.is_array() || g.empty()) invalid(path + ".r_grid", "expected a non-empty array");
    h.r_grid.clear();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto p = path + ".r_grid[" + std::to_string(i) + "]";
      const double r = io::real_from_json(g[i], p);
      if (!std::isfinite(r) || r <= 1.0) invalid(p, "r must be a finite number > 1");
      h.r_grid.push_back(r);
    }
  }
  if (j.contains("quadrature_steps")) {
    h.quadrature_steps = io::count_from_json(j["quadrature_steps"], path + ".quadrature_steps");
    if (h.quadrature_steps < 2) invalid(path + ".quadrature_steps", "must be at least 2");
  }
  if (j.contains("probe_eps")) {
    h.probe_eps = io::real_from_json(j["probe_eps"], path + ".probe_eps");
    if (!(h.probe_eps > 0.0) || !std::isfinite(h.probe_eps)) invalid(path + ".probe_eps", "must be positive");
  }
}

void parse_output(const json& j, Output& out) {
  const std::string path = "$.output";
  io::check_keys(j, {"report", "csv_dir"}, path);
  for (const char* key : {"report", "csv_dir"}) {
    if (!j.contains(key) || j[key].is_null()) continue;
    if (!j[key].is_string()) invalid(path + "." + key, "expected a string");
    (std::string(key) == "report" ? out.report : out.csv_dir) = j[key].get<std::string>();
  }
}

void parse_fuzz(const json& j, FuzzSettings& f) {
  const std::string path = "$.fuzz";
  io::check_keys(j, {"pipeline", "stable", "marginal", "max_dim", "workers"}, path);
  if (j.contains("pipeline")) f.pipeline = mode_from(j["pipeline"], path + ".pipeline", false);
  if (j.contains("stable")) f.stable = io::count_from_json(j["stable"], path + ".stable");
  if (j.contains("marginal")) f.marginal = io::count_from_json(j["marginal"], path + ".marginal");
  if (j.contains("max_dim") && !j["max_dim"].is_null()) {
    f.max_dim = io::count_from_json(j["max_dim"], path + ".max_dim");
    if (*f.max_dim < 1 || *f.max_dim > 64) invalid(path + ".max_dim", "must lie in [1, 64]");
  }
  if (j.contains("workers")) {
    f.workers = io::count_from_json(j["workers"], path + ".workers");
    if (f.workers < 1) invalid(path + ".workers", "must be at least 1");
  }
}

std::string position(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Discrete: return "discrete";
    case Mode::Semigroup: return "semigroup";
    case Mode::Fuzz: return "fuzz";
  }
  return "unknown";
}

AnalysisPlan parse_plan(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte just past the failure point.
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    std::string what = e.what();
    const auto colon = what.rfind(": ");
    if (colon != std::string::npos) what = what.substr(colon + 2);
    fail(ErrorCode::ParseError, position(text, byte) + ": " + what);
  }
  io::check_keys(j, {"mode", "operator", "sequences", "gauges", "powers", "p_plan", "sample_plan", "horizons",
                     "probe_lambda", "output", "fuzz"},
                 "$");
  AnalysisPlan plan;
  if (!j.contains("mode")) invalid("$", "missing key \"mode\"");
  plan.mode = mode_from(j["mode"], "$.mode", true);

  auto forbid = [&](const char* key, const char* why) {
    if (j.contains(key)) invalid(std::string("$.") + key, why);
  };

  if (plan.mode == Mode::Fuzz) {
    forbid("operator", "fuzz mode generates its own operators");
    forbid("probe_lambda", "only meaningful with a fixed operator");
  } else {
    if (!j.contains("operator")) invalid("$", "missing key \"operator\"");
    json op = j["operator"];
    if (!op.is_object()) invalid("$.operator", "expected an operator object");
    bool generator = plan.mode == Mode::Semigroup;
    if (op.contains("generator")) {
      if (!op["generator"].is_boolean()) invalid("$.operator.generator", "expected a boolean");
      generator = op["generator"].get<bool>();
      op.erase("generator");
    }
    if (generator != (plan.mode == Mode::Semigroup))
      invalid("$.operator.generator", plan.mode == Mode::Semigroup ? "semigroup mode needs a generator"
                                                                   : "discrete mode needs a bounded operator, not a generator");
    if (op.contains("growth_hint")) {
      if (!generator) invalid("$.operator.growth_hint", "only generators carry a growth hint");
      const double hint = io::real_from_json(op["growth_hint"], "$.operator.growth_hint");
      if (!std::isfinite(hint)) invalid("$.operator.growth_hint", "must be finite");
      plan.growth_hint = hint;
      op.erase("growth_hint");
    }
    plan.op = io::operator_from_json(op, "$.operator");
  }

  int families = 0;
  for (const char* key : {"sequences", "gauges", "powers"}) families += j.contains(key) ? 1 : 0;
  if (plan.mode == Mode::Discrete) {
    if (families != 1)
      invalid("$", families == 0 ? "discrete mode needs one of \"sequences\", \"gauges\" or \"powers\""
                                 : "\"sequences\", \"gauges\" and \"powers\" are mutually exclusive");
    if (j.contains("sequences")) {
      const auto& s = j["sequences"];
      if (!s.is_array() || s.empty()) invalid("$.sequences", "expected a non-empty array");
      std::vector<seqspace::NonNegSeq> fam;
      for (std::size_t i = 0; i < s.size(); ++i)
        fam.push_back(io::nonneg_seq_from_json(s[i], "$.sequences[" + std::to_string(i) + "]"));
      plan.family = std::move(fam);
    } else if (j.contains("gauges")) {
      const auto& g = j["gauges"];
      if (!g.is_array() || g.empty()) invalid("$.gauges", "expected a non-empty array");
      std::vector<seqspace::Gauge> fam;
      for (std::size_t i = 0; i < g.size(); ++i)
        fam.push_back(io::gauge_from_json(g[i], "$.gauges[" + std::to_string(i) + "]"));
      plan.family = std::move(fam);
    } else {
      plan.family = PowerList{reals_at_least_one(j["powers"], "$.powers")};
    }
    forbid("p_plan", "p_plan belongs to semigroup and fuzz plans");
    forbid("fuzz", "fuzz settings belong to fuzz plans");
  } else {
    if (families != 0) invalid("$", "family keys are only valid in discrete mode");
    if (j.contains("p_plan")) plan.p_plan = reals_at_least_one(j["p_plan"], "$.p_plan");
    if (plan.mode == Mode::Semigroup) forbid("fuzz", "fuzz settings belong to fuzz plans");
    if (plan.mode == Mode::Semigroup) forbid("probe_lambda", "probe_lambda belongs to discrete plans");
  }

  if (j.contains("sample_plan")) parse_sample(j["sample_plan"], plan);
  if (j.contains("horizons")) parse_horizons(j["horizons"], plan.horizons);
  if (j.contains("probe_lambda")) plan.probe_lambda = io::complex_from_json(j["probe_lambda"], "$.probe_lambda");
  if (j.contains("output")) parse_output(j["output"], plan.output);
  if (j.contains("fuzz")) parse_fuzz(j["fuzz"], plan.fuzz);

  if (plan.op && !plan.sample.coordinate_pairs) plan.sample.coordinate_pairs = plan.op->dim() <= 8;
  return plan;
}

io::json to_json(const AnalysisPlan& plan) {
  json out;
  out["mode"] = to_string(plan.mode);
  if (plan.op) {
    json op = io::to_json(*plan.op);
    if (plan.mode == Mode::Semigroup) {
      op["generator"] = true;
      if (plan.growth_hint) op["growth_hint"] = io::number(*plan.growth_hint);
    }
    out["operator"] = op;
  }
  std::visit(
      [&](const auto& fam) {
        using F = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<F, std::vector<seqspace::NonNegSeq>>) {
          json arr = json::array();
          for (const auto& f : fam) arr.push_back(io::to_json(f));
          out["sequences"] = arr;
        } else if constexpr (std::is_same_v<F, std::vector<seqspace::Gauge>>) {
          json arr = json::array();
          for (const auto& g : fam) arr.push_back(io::to_json(g));
          out["gauges"] = arr;
        } else if constexpr (std::is_same_v<F, PowerList>) {
          json arr = json::array();
          for (double p : fam.powers) arr.push_back(io::number(p));
          out["powers"] = arr;
        }
      },
      plan.family);
  if (plan.mode != Mode::Discrete) {
    json arr = json::array();
    for (double p : plan.p_plan) arr.push_back(io::number(p));
    out["p_plan"] = arr;
  }
  out["sample_plan"] = {{"coordinate_pairs", plan.sample.coordinate_pairs ? json(*plan.sample.coordinate_pairs)
                                                                           : json(nullptr)},
                        {"random_pairs", plan.sample.random_pairs},
                        {"seed", plan.sample.seed}};
  json grid = json::array();
  for (double r : plan.horizons.r_grid) grid.push_back(io::number(r));
  out["horizons"] = {{"n_terms", plan.horizons.n_terms},
                     {"max_terms", plan.horizons.max_terms},
                     {"r_grid", grid},
                     {"quadrature_steps", plan.horizons.quadrature_steps},
                     {"probe_eps", io::number(plan.horizons.probe_eps)}};
  if (plan.probe_lambda) out["probe_lambda"] = io::to_json(*plan.probe_lambda);
  out["output"] = {{"report", plan.output.report ? json(*plan.output.report) : json(nullptr)},
                   {"csv_dir", plan.output.csv_dir ? json(*plan.output.csv_dir) : json(nullptr)}};
  if (plan.mode == Mode::Fuzz) {
    out["fuzz"] = {{"pipeline", to_string(plan.fuzz.pipeline)},
                   {"stable", plan.fuzz.stable},
                   {"marginal", plan.fuzz.marginal},
                   {"max_dim", plan.fuzz.resolved_max_dim()},
                   {"workers", plan.fuzz.workers}};
  }
  return out;
}

resolvent::Family resolve_family(const FamilySpec& family) {
  return std::visit(
      [](const auto& fam) -> resolvent::Family {
        using F = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<F, std::vector<seqspace::NonNegSeq>>) {
          return fam;
        } else if constexpr (std::is_same_v<F, std::vector<seqspace::Gauge>>) {
          return resolvent::GaugeFamily{fam};
        } else if constexpr (std::is_same_v<F, PowerList>) {
          resolvent::GaugeFamily g;
          for (double p : fam.powers) g.gauges.push_back(seqspace::Gauge::power(p));
          return g;
        } else {
          fail(ErrorCode::ValidationError, "$: plan has no family");
        }
      },
      family);
}

}  // namespace specgate::plan
