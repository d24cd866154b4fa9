#include "specgate/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "specgate/error.hpp"

namespace specgate::io {

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  fail(ErrorCode::ValidationError, path + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) invalid(path, std::string("missing key \"") + key + "\"");
  return j.at(key);
}

std::string key_path(const std::string& path, const std::string& key) { return path + "." + key; }
std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

json to_json_list(const std::vector<cplx>& zs) {
  json out = json::array();
  for (const auto& z : zs) out.push_back(to_json(z));
  return out;
}

std::vector<cplx> complex_list(const json& j, const std::string& path) {
  if (!j.is_array()) invalid(path, "expected an array");
  std::vector<cplx> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(complex_from_json(j[i], index_path(path, i)));
  return out;
}

template <typename F>
auto guarded(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    invalid(path, e.what());
  }
}

json real_list(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

}  // namespace

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!j.is_object()) invalid(path, "expected an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!known) invalid(key_path(path, item.key()), "unknown key");
  }
}

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double real_from_json(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  invalid(path, "expected a number");
}

std::size_t count_from_json(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) invalid(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

json to_json(cplx z) { return json::array({number(z.real()), number(z.imag())}); }

cplx complex_from_json(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {real_from_json(j[0], path + "[0]"), real_from_json(j[1], path + "[1]")};
  invalid(path, "expected a number or an [re, im] pair");
}

json to_json(const seqspace::ComplexSeq& a) {
  json out = {{"entries", to_json_list(a.entries())}};
  if (a.tail_bound()) out["tail_bound"] = number(*a.tail_bound());
  return out;
}

seqspace::ComplexSeq complex_seq_from_json(const json& j, const std::string& path) {
  if (j.is_array()) return guarded(path, [&] { return seqspace::ComplexSeq(complex_list(j, path)); });
  check_keys(j, {"entries", "tail_bound"}, path);
  auto entries = complex_list(field(j, "entries", path), key_path(path, "entries"));
  std::optional<double> tail;
  if (j.contains("tail_bound")) tail = real_from_json(j["tail_bound"], key_path(path, "tail_bound"));
  return guarded(path, [&] { return seqspace::ComplexSeq(std::move(entries), tail); });
}

json to_json(const seqspace::NonNegSeq& f) {
  json out = {{"entries", real_list(f.entries())}};
  if (f.tail_bound()) out["tail_bound"] = number(*f.tail_bound());
  return out;
}

seqspace::NonNegSeq nonneg_seq_from_json(const json& j, const std::string& path) {
  auto reals = [&](const json& arr, const std::string& p) {
    if (!arr.is_array()) invalid(p, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(real_from_json(arr[i], index_path(p, i)));
    return out;
  };
  if (j.is_array()) return guarded(path, [&] { return seqspace::NonNegSeq(reals(j, path)); });
  check_keys(j, {"entries", "tail_bound"}, path);
  auto entries = reals(field(j, "entries", path), key_path(path, "entries"));
  std::optional<double> tail;
  if (j.contains("tail_bound")) tail = real_from_json(j["tail_bound"], key_path(path, "tail_bound"));
  return guarded(path, [&] { return seqspace::NonNegSeq(std::move(entries), tail); });
}

json to_json(const seqspace::Gauge& g) {
  using K = seqspace::Gauge::Kind;
  switch (g.kind()) {
    case K::Power: return {{"kind", "power"}, {"p", number(g.exponent())}};
    case K::Table: {
      json points = json::array();
      for (const auto& [x, y] : g.breakpoints()) points.push_back(json::array({number(x), number(y)}));
      return {{"kind", "table"}, {"breakpoints", points}};
    }
    case K::Composite: return {{"kind", "composite"}, {"scale", number(g.scale())}, {"inner", to_json(g.inner())}};
  }
  return {};
}

seqspace::Gauge gauge_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) invalid(path, "expected a gauge object");
  const auto kind = field(j, "kind", path);
  if (!kind.is_string()) invalid(key_path(path, "kind"), "expected a string");
  const auto k = kind.get<std::string>();
  if (k == "power") {
    check_keys(j, {"kind", "p"}, path);
    const double p = real_from_json(field(j, "p", path), key_path(path, "p"));
    return guarded(path, [&] { return seqspace::Gauge::power(p); });
  }
  if (k == "table") {
    check_keys(j, {"kind", "breakpoints"}, path);
    const auto& pts = field(j, "breakpoints", path);
    const auto bp = key_path(path, "breakpoints");
    if (!pts.is_array()) invalid(bp, "expected an array of [x, y] pairs");
    std::vector<std::pair<double, double>> points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto p = index_path(bp, i);
      if (!pts[i].is_array() || pts[i].size() != 2) invalid(p, "expected an [x, y] pair");
      points.emplace_back(real_from_json(pts[i][0], p + "[0]"), real_from_json(pts[i][1], p + "[1]"));
    }
    return guarded(path, [&] { return seqspace::Gauge::table(std::move(points)); });
  }
  if (k == "composite") {
    check_keys(j, {"kind", "scale", "inner"}, path);
    const double s = real_from_json(field(j, "scale", path), key_path(path, "scale"));
    auto inner = gauge_from_json(field(j, "inner", path), key_path(path, "inner"));
    return guarded(path, [&] { return seqspace::Gauge::composite(s, std::move(inner)); });
  }
  invalid(key_path(path, "kind"), "unknown gauge kind \"" + k + "\"");
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) invalid(path, "expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto p = index_path(path, static_cast<std::size_t>(i));
    const auto row = complex_list(j[static_cast<std::size_t>(i)], p);
    if (static_cast<Eigen::Index>(row.size()) != n) invalid(p, "matrix must be square");
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = row[static_cast<std::size_t>(k)];
  }
  return m;
}

json to_json(const operators::OperatorSpec& t) {
  using O = operators::OperatorSpec;
  return std::visit(
      [](const auto& v) -> json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, O::Dense>) {
          return {{"kind", "dense"}, {"rows", to_json(v.matrix)}};
        } else if constexpr (std::is_same_v<V, O::Diagonal>) {
          return {{"kind", "diagonal"}, {"entries", to_json_list(v.entries)}};
        } else if constexpr (std::is_same_v<V, O::WeightedShift>) {
          return {{"kind", "weighted_shift"}, {"weights", to_json_list(v.weights)}, {"dim", v.dim}};
        } else if constexpr (std::is_same_v<V, O::Jordan>) {
          return {{"kind", "jordan"}, {"lambda", to_json(v.eigenvalue)}, {"size", v.size}};
        } else {
          return {{"kind", "scaled"}, {"factor", to_json(v.factor)}, {"inner", to_json(*v.inner)}};
        }
      },
      t.variant());
}

operators::OperatorSpec operator_from_json(const json& j, const std::string& path) {
  using O = operators::OperatorSpec;
  if (!j.is_object()) invalid(path, "expected an operator object");
  const auto& kind = field(j, "kind", path);
  if (!kind.is_string()) invalid(key_path(path, "kind"), "expected a string");
  const auto k = kind.get<std::string>();
  if (k == "dense") {
    check_keys(j, {"kind", "rows"}, path);
    auto m = matrix_from_json(field(j, "rows", path), key_path(path, "rows"));
    return guarded(path, [&] { return O::dense(std::move(m)); });
  }
  if (k == "diagonal") {
    check_keys(j, {"kind", "entries"}, path);
    auto e = complex_list(field(j, "entries", path), key_path(path, "entries"));
    return guarded(path, [&] { return O::diagonal(std::move(e)); });
  }
  if (k == "weighted_shift") {
    check_keys(j, {"kind", "weights", "dim"}, path);
    auto w = complex_list(field(j, "weights", path), key_path(path, "weights"));
    const auto dim = count_from_json(field(j, "dim", path), key_path(path, "dim"));
    return guarded(path, [&] { return O::weighted_shift(std::move(w), dim); });
  }
  if (k == "jordan") {
    check_keys(j, {"kind", "lambda", "size"}, path);
    const auto lambda = complex_from_json(field(j, "lambda", path), key_path(path, "lambda"));
    const auto size = count_from_json(field(j, "size", path), key_path(path, "size"));
    return guarded(path, [&] { return O::jordan(lambda, size); });
  }
  if (k == "scaled") {
    check_keys(j, {"kind", "factor", "inner"}, path);
    const auto factor = complex_from_json(field(j, "factor", path), key_path(path, "factor"));
    auto inner = operator_from_json(field(j, "inner", path), key_path(path, "inner"));
    return guarded(path, [&] { return O::scaled(factor, inner); });
  }
  invalid(key_path(path, "kind"), "unknown operator kind \"" + k + "\"");
}

// --- reports -----------------------------------------------------------------

json to_json(const seqspace::GoverningCertificate& c) {
  json out = {{"verdict", seqspace::to_string(c.verdict)},
              {"constant", number(c.constant)},
              {"checked_range", json::array({c.checked_range.begin, c.checked_range.end})},
              {"residual", number(c.residual)},
              {"exact", c.exact},
              {"failures", c.failures}};
  out["governing_index"] = c.governing_index ? json(*c.governing_index) : json(nullptr);
  out["witness_index"] = c.witness_index ? json(*c.witness_index) : json(nullptr);
  return out;
}

json to_json(const resolvent::StabilityReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    json item = {{"label", p.label}, {"certificate", to_json(p.certificate)}};
    if (p.gauge_index) item["gauge_index"] = *p.gauge_index;
    if (p.mu) item["mu"] = number(*p.mu);
    if (p.error) item["error"] = *p.error;
    pairs.push_back(item);
  }
  json decay = json::array();
  for (const auto& t : r.e_decay_record)
    decay.push_back({{"eps", number(t.eps)}, {"delta", number(t.delta)}, {"max_e", number(t.max_e)}, {"pass", t.pass}});
  json out = {{"dim", r.dim},
              {"horizon", r.horizon},
              {"r_oracle", number(r.r_oracle)},
              {"gelfand", number(r.gelfand)},
              {"power_bounded", r.power_bounded},
              {"all_governed", r.all_governed},
              {"all_exact", r.all_exact},
              {"verdict", resolvent::to_string(r.verdict)},
              {"pairs", pairs},
              {"e_decay", decay}};
  return out;
}

json to_json(const resolvent::ResolventProbe& p) {
  return {{"lambda", to_json(p.lambda)},
          {"r_grid", real_list(p.r_grid)},
          {"resolvent_norm", real_list(p.norms)},
          {"neumann_norm", real_list(p.neumann_norms)},
          {"e_r", real_list(p.e_values)},
          {"tail", real_list(p.tail_estimates)}};
}

json to_json(const resolvent::LowerBoundRecord& r) {
  auto link = [](const resolvent::ChainLink& l) {
    return json{{"lhs", number(l.lhs)}, {"rhs", number(l.rhs)}, {"residual", number(l.residual)}};
  };
  json out = {{"resolvent_norm", number(r.resolvent_norm)},
              {"inverse_distance", number(r.inverse_distance)},
              {"inverse_gap", number(r.inverse_gap)},
              {"eigen_error", number(r.eigen_error)},
              {"norm_vs_distance", link(r.norm_vs_distance)},
              {"distance_vs_gap", link(r.distance_vs_gap)}};
  if (r.inverse_e) out["inverse_e"] = number(*r.inverse_e);
  if (r.scaled_norm) out["scaled_norm"] = number(*r.scaled_norm);
  return out;
}

json to_json(const semigroup::StripCertificate& c) {
  std::size_t failed = 0;
  for (const auto& s : c.samples) failed += s.pass ? 0 : 1;
  json out = {{"M", number(c.m)},
              {"r", number(c.r)},
              {"log_r", number(c.log_r)},
              {"strip_halfwidth", number(c.halfwidth)},
              {"strip_bound", number(c.bound)},
              {"s0_upper", number(c.s0_upper)},
              {"chain", {{"lhs", number(c.chain_lhs)}, {"rhs", number(c.chain_rhs)}}},
              {"log_margin", number(c.log_margin)},
              {"verification_samples", c.samples.size()},
              {"verification_failures", failed},
              {"translated_checks", c.translated_checks},
              {"translated_failures", c.translated_failures},
              {"inner_flank_max_ratio", number(c.inner_flank_max)},
              {"outer_flank_max_norm", number(c.outer_flank_max)},
              {"refits", c.refits},
              {"verified", c.verified}};
  if (c.s_oracle) out["s_oracle"] = number(*c.s_oracle);
  return out;
}

json to_json(const semigroup::SemigroupReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    json item = {{"label", p.label}};
    if (p.p) item["p"] = number(*p.p);
    if (p.norm) {
      item["C_p"] = number(p.norm->value);
      item["integral"] = number(p.norm->integral);
      item["tail_bound"] = number(p.norm->tail_bound);
    }
    if (p.error) item["error"] = *p.error;
    pairs.push_back(item);
  }
  json out = {{"dim", r.dim},
              {"status", semigroup::to_string(r.status)},
              {"scale", number(r.scale)},
              {"s_oracle", number(r.s_oracle)},
              {"pairs", pairs},
              {"quantifier", "sampled pairs only: " + std::to_string(r.pairs.size()) + " (x, x') pairs"},
              {"hoelder", {{"checks", r.hoelder.checks},
                           {"failures", r.hoelder.failures},
                           {"worst_ratio", number(r.hoelder.worst_ratio)}}},
              {"messages", r.messages}};
  if (r.decay)
    out["decay"] = {{"alpha", number(r.decay->alpha)}, {"kappa", number(r.decay->kappa)}};
  if (r.envelope)
    out["envelope"] = {{"M", number(r.envelope->m)}, {"argmax", to_json(r.envelope->argmax)},
                       {"samples", r.envelope->samples}};
  if (r.certificate) out["certificate"] = to_json(*r.certificate);
  if (r.s0_upper_scaled) out["s0_upper_scaled"] = number(*r.s0_upper_scaled);
  if (r.s0_upper) out["s0_upper"] = number(*r.s0_upper);
  return out;
}

}  // namespace specgate::io
