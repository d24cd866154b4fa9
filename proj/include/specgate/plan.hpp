#pragma once

// Analysis plans: the JSON documents driving the command-line front end.
//
//   {
//     "mode": "discrete" | "semigroup" | "fuzz",
//     "operator": {...},                       // discrete and semigroup modes
//     "sequences": [...] | "gauges": [...] | "powers": [...],   // discrete
//     "p_plan": [1, 2, 4, 8],                  // semigroup
//     "sample_plan": {"coordinate_pairs": bool, "random_pairs": n, "seed": s},
//     "horizons": {"n_terms": ..., "max_terms": ..., "r_grid": [...],
//                  "quadrature_steps": ..., "probe_eps": ...},
//     "probe_lambda": [re, im],                // optional, certify only
//     "output": {"report": path, "csv_dir": dir},
//     "fuzz": {"pipeline": ..., "stable": n, "marginal": n, "max_dim": n, "workers": n}
//   }

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "specgate/json_io.hpp"
#include "specgate/operators.hpp"
#include "specgate/resolvent.hpp"
#include "specgate/seqspace.hpp"

namespace specgate::plan {

enum class Mode { Discrete, Semigroup, Fuzz };
std::string to_string(Mode m);

struct Horizons {
  std::size_t n_terms = 256;
  std::size_t max_terms = 1u << 15;
  std::vector<double> r_grid = resolvent::default_r_grid();
  std::size_t quadrature_steps = 4000;
  double probe_eps = seqspace::kDefaultProbeEps;
};

struct Output {
  std::optional<std::string> report;
  std::optional<std::string> csv_dir;
};

struct FuzzSettings {
  Mode pipeline = Mode::Discrete;
  std::size_t stable = 500;
  std::size_t marginal = 100;
  std::optional<std::size_t> max_dim;  // 8 for discrete, 16 for semigroup
  std::size_t workers = 1;

  std::size_t resolved_max_dim() const { return max_dim.value_or(pipeline == Mode::Discrete ? 8 : 16); }
};

struct PowerList { std::vector<double> powers; };
using FamilySpec = std::variant<std::monostate, std::vector<seqspace::NonNegSeq>, std::vector<seqspace::Gauge>,
                                PowerList>;

struct AnalysisPlan {
  Mode mode = Mode::Discrete;
  std::optional<operators::OperatorSpec> op;
  std::optional<double> growth_hint;  // semigroup generators
  FamilySpec family;
  std::vector<double> p_plan{1.0, 2.0, 4.0, 8.0};
  resolvent::SamplePlan sample;
  Horizons horizons;
  std::optional<cplx> probe_lambda;
  Output output;
  FuzzSettings fuzz;
};

/// Throws ParseError (with line and column) or ValidationError (with the
/// JSON path of the offending value).
AnalysisPlan parse_plan(const std::string& text);

/// Normalized form with every default materialized.
io::json to_json(const AnalysisPlan& plan);

/// The gauges a family resolves to (powers become x^p).
resolvent::Family resolve_family(const FamilySpec& family);

}  // namespace specgate::plan
