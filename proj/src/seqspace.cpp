#include "specgate/seqspace.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "specgate/error.hpp"

namespace specgate::seqspace {

namespace {

void check_tail(std::optional<double> tail) {
  if (tail) {
    require(std::isfinite(*tail) && *tail >= 0.0, ErrorCode::InvalidArgument,
            "tail bound must be finite and non-negative");
  }
}

// Relative slack for certified inequalities.
constexpr double kSlack = 1e-12;

}  // namespace

ComplexSeq::ComplexSeq(std::vector<cplx> entries, std::optional<double> tail_bound)
    : entries_(std::move(entries)), tail_bound_(tail_bound) {
  require(!entries_.empty(), ErrorCode::InvalidArgument, "sequence truncation length must be >= 1");
  for (auto v : entries_) {
    require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorCode::InvalidArgument,
            "sequence entries must be finite");
  }
  check_tail(tail_bound_);
}

NonNegSeq::NonNegSeq(std::vector<double> entries, std::optional<double> tail_bound)
    : entries_(std::move(entries)), tail_bound_(tail_bound) {
  require(!entries_.empty(), ErrorCode::InvalidArgument, "sequence truncation length must be >= 1");
  for (double v : entries_) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
            "entries must be finite and non-negative");
  }
  check_tail(tail_bound_);
  sorted_ = std::is_sorted(entries_.begin(), entries_.end(), std::greater<>());
}

double NonNegSeq::sup_norm() const noexcept {
  double m = *std::max_element(entries_.begin(), entries_.end());
  if (tail_bound_) m = std::max(m, *tail_bound_);
  return m;
}

bool NonNegSeq::is_zero() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(), [](double v) { return v == 0.0; }) &&
         (!tail_bound_ || *tail_bound_ == 0.0);
}

NonNegSeq NonNegSeq::scaled(double mu) const {
  require(mu >= 0.0 && std::isfinite(mu), ErrorCode::InvalidArgument, "scale must be non-negative");
  std::vector<double> out(entries_.size());
  std::transform(entries_.begin(), entries_.end(), out.begin(), [mu](double v) { return mu * v; });
  std::optional<double> tail;
  if (tail_bound_) tail = mu * *tail_bound_;
  NonNegSeq s(std::move(out), tail);
  s.tail_uncertified_ = tail_uncertified_;
  return s;
}

NonNegSeq NonNegSeq::truncated(std::size_t n) const {
  require(n >= 1, ErrorCode::InvalidArgument, "cannot truncate to length 0");
  if (n >= entries_.size()) return *this;
  // Dropped entries become part of the tail.
  double dropped = *std::max_element(entries_.begin() + static_cast<std::ptrdiff_t>(n), entries_.end());
  std::optional<double> tail;
  if (tail_bound_) tail = std::max(*tail_bound_, dropped);
  NonNegSeq s(std::vector<double>(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(n)),
              tail);
  s.tail_uncertified_ = tail_uncertified_;
  return s;
}

// --- Gauge ----------------------------------------------------------------

Gauge Gauge::power(double p) {
  require(std::isfinite(p) && p >= 1.0, ErrorCode::InvalidArgument, "power gauge needs p >= 1");
  return Gauge(Power{p});
}

Gauge Gauge::table(std::vector<std::pair<double, double>> breakpoints) {
  require(!breakpoints.empty(), ErrorCode::InvalidArgument, "table gauge needs breakpoints");
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    auto [x, y] = breakpoints[i];
    require(std::isfinite(x) && x >= 0.0 && std::isfinite(y) && y >= 0.0, ErrorCode::InvalidArgument,
            "table gauge breakpoints must be finite and non-negative");
    if (i > 0) {
      require(x > breakpoints[i - 1].first, ErrorCode::InvalidArgument,
              "table gauge abscissae must be strictly increasing");
      require(y >= breakpoints[i - 1].second, ErrorCode::InvalidArgument,
              "table gauge values must be non-decreasing");
    }
    if (x > 0.0) {
      require(y > 0.0, ErrorCode::InvalidArgument, "table gauge must be positive on (0, inf)");
    }
  }
  if (breakpoints.size() == 1) {
    require(breakpoints[0].second > 0.0, ErrorCode::InvalidArgument,
            "table gauge must be positive on (0, inf)");
  }
  return Gauge(Table{std::move(breakpoints)});
}

Gauge Gauge::composite(double scale, Gauge inner) {
  require(std::isfinite(scale) && scale > 0.0, ErrorCode::InvalidArgument,
          "composite gauge needs a positive scale");
  return Gauge(Composite{scale, std::make_shared<const Gauge>(std::move(inner))});
}

double Gauge::operator()(double x) const {
  require(x >= 0.0, ErrorCode::InvalidArgument, "gauge evaluated at a negative point");
  return std::visit(
      [x](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Power>) {
          return g.p == 1.0 ? x : std::pow(x, g.p);
        } else if constexpr (std::is_same_v<T, Table>) {
          auto it = std::lower_bound(g.points.begin(), g.points.end(), x,
                                     [](const auto& pt, double v) { return pt.first < v; });
          if (it == g.points.end()) return g.points.back().second;
          return it->second;
        } else {
          return g.scale * (*g.inner)(x);
        }
      },
      rep_);
}

Gauge::Kind Gauge::kind() const noexcept {
  switch (rep_.index()) {
    case 0: return Kind::Power;
    case 1: return Kind::Table;
    default: return Kind::Composite;
  }
}

double Gauge::exponent() const { return std::get<Power>(rep_).p; }
const std::vector<std::pair<double, double>>& Gauge::breakpoints() const {
  return std::get<Table>(rep_).points;
}
double Gauge::scale() const { return std::get<Composite>(rep_).scale; }
const Gauge& Gauge::inner() const { return *std::get<Composite>(rep_).inner; }

bool Gauge::valid_on(const std::vector<double>& xs) const {
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  double prev = -1.0;
  for (double x : sorted) {
    if (x < 0.0) return false;
    double v = (*this)(x);
    if (!(v >= 0.0) || v < prev) return false;
    if (x > 0.0 && v <= 0.0) return false;
    prev = v;
  }
  return true;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Governed: return "governed";
    case Verdict::NotGoverned: return "not_governed";
    case Verdict::InconclusiveTruncation: return "inconclusive_truncation";
  }
  return "unknown";
}

// --- operations -----------------------------------------------------------

NonNegSeq modulus(const ComplexSeq& a) {
  std::vector<double> out(a.size());
  std::transform(a.entries().begin(), a.entries().end(), out.begin(),
                 [](cplx v) { return std::abs(v); });
  return NonNegSeq(std::move(out), a.tail_bound());
}

NonNegSeq rearrange(const NonNegSeq& f) {
  std::vector<double> out = f.entries();
  std::sort(out.begin(), out.end(), std::greater<>());
  NonNegSeq r(std::move(out), f.tail_bound());
  r.tail_uncertified_ = f.tail_uncertified_ || !f.tail_exact();
  return r;
}

namespace {

struct RatioScan {
  double constant = 0.0;
  std::optional<std::size_t> argmax;
  std::optional<std::size_t> zero_divisor;
};

RatioScan scan_ratios(const std::vector<double>& g, const std::vector<double>& f, std::size_t len) {
  RatioScan s;
  for (std::size_t n = 0; n < len; ++n) {
    if (g[n] == 0.0) continue;
    if (f[n] == 0.0) {
      s.zero_divisor = n;
      return s;
    }
    double ratio = g[n] / f[n];
    if (!s.argmax || ratio > s.constant) {
      s.constant = ratio;
      s.argmax = n;
    }
  }
  // The quotient may round down; nudge c until every product covers g in
  // floating point as well.
  for (std::size_t n = 0; n < len; ++n) {
    while (g[n] > s.constant * f[n]) s.constant = std::nextafter(s.constant, HUGE_VAL);
  }
  return s;
}

}  // namespace

Domination domination_constant(const NonNegSeq& g, const NonNegSeq& f) {
  require(g.size() == f.size(), ErrorCode::DimensionMismatch,
          "domination_constant needs sequences of equal truncation length");
  auto scan = scan_ratios(g.entries(), f.entries(), g.size());
  if (scan.zero_divisor) {
    fail(ErrorCode::ZeroDivisorViolation,
         "g_" + std::to_string(*scan.zero_divisor) + " > 0 while f vanishes there");
  }
  Domination d;
  d.constant = scan.constant;
  d.argmax = scan.argmax;
  d.exact = g.tail_exact();
  return d;
}

ProbeResult c0_membership_probe(const ComplexSeq& a, double eps) {
  require(eps > 0.0, ErrorCode::InvalidArgument, "probe scale must be positive");
  ProbeResult r;
  const std::size_t n = a.size();
  // Fewer than four entries leave no final quarter to refute with.
  const std::size_t quarter = n / 4;
  const std::size_t begin = n - quarter;
  bool all_large = quarter > 0;
  for (std::size_t i = begin; i < n; ++i) {
    if (std::abs(a[i]) <= eps) {
      all_large = false;
      break;
    }
  }
  if (all_large) {
    r.plausible = false;
    r.witness_begin = begin;
  }
  if (a.tail_bound() && *a.tail_bound() >= eps) {
    r.plausible = false;
    r.tail_witness = true;
  }
  return r;
}

namespace {

// Shared front half of every governing test: c0 probe. Returns true when the
// certificate has already been decided.
bool apply_probe(const ComplexSeq& a, double eps, GoverningCertificate& cert) {
  auto probe = c0_membership_probe(a, eps);
  if (probe.plausible) return false;
  cert.checked_range = {0, a.size()};
  if (probe.witness_begin) {
    cert.verdict = Verdict::NotGoverned;
    cert.witness_index = probe.witness_begin;
    cert.failures.push_back("c0 probe: final quarter exceeds eps from index " +
                            std::to_string(*probe.witness_begin));
  } else {
    cert.verdict = Verdict::InconclusiveTruncation;
    cert.failures.push_back("c0 probe: uncertified tail bound exceeds eps");
  }
  return true;
}

double residual_of(const std::vector<double>& sorted, const std::vector<double>& f, double c,
                   std::size_t len) {
  double res = 0.0;
  for (std::size_t n = 0; n < len; ++n) res = std::max(res, sorted[n] - c * f[n]);
  return res;
}

}  // namespace

GoverningCertificate governs(const std::vector<NonNegSeq>& family, const ComplexSeq& a, double eps) {
  require(!family.empty(), ErrorCode::InvalidArgument, "governing family must be non-empty");
  GoverningCertificate cert;
  if (apply_probe(a, eps, cert)) return cert;

  const NonNegSeq sorted = rearrange(modulus(a));
  for (std::size_t i = 0; i < family.size(); ++i) {
    const NonNegSeq& f = family[i];
    const std::size_t len = std::min(sorted.size(), f.size());
    auto scan = scan_ratios(sorted.entries(), f.entries(), len);
    if (scan.zero_divisor) {
      if (!cert.witness_index) cert.witness_index = scan.zero_divisor;
      cert.failures.push_back("f[" + std::to_string(i) + "]: |a|*_" +
                              std::to_string(*scan.zero_divisor) + " > 0 where f vanishes");
      continue;
    }
    cert.governing_index = i;
    cert.constant = scan.constant;
    cert.checked_range = {0, len};
    cert.residual = residual_of(sorted.entries(), f.entries(), scan.constant, len);
    cert.verdict = cert.residual == 0.0 ? Verdict::Governed : Verdict::NotGoverned;
    cert.exact = a.tail_exact() && len == sorted.size();
    cert.witness_index.reset();
    return cert;
  }
  cert.verdict = Verdict::NotGoverned;
  cert.checked_range = {0, a.size()};
  return cert;
}

NonNegSeq merge_governing(const std::vector<NonNegSeq>& family) {
  std::vector<const NonNegSeq*> members;
  for (const auto& f : family) {
    if (!f.is_zero()) members.push_back(&f);
  }
  require(!members.empty(), ErrorCode::EmptyFamily, "every member of the family is zero");

  std::size_t len = 0;
  for (auto* f : members) len = std::max(len, f->size());
  std::vector<double> g(len, 0.0);
  std::optional<double> tail = 0.0;
  double weight = 1.0;
  for (auto* f : members) {
    weight *= 0.5;
    const double norm = f->sup_norm();
    for (std::size_t n = 0; n < f->size(); ++n) g[n] += weight * ((*f)[n] / norm);
    if (tail && f->tail_bound()) {
      *tail += weight * (*f->tail_bound() / norm);
    } else {
      tail.reset();
    }
  }
  NonNegSeq merged(std::move(g), tail);

  // f^(k) <= 2^k ||f^(k)|| g entrywise.
  double factor = 1.0;
  for (auto* f : members) {
    factor *= 2.0;
    const double norm = f->sup_norm();
    for (std::size_t n = 0; n < f->size(); ++n) {
      const double bound = factor * norm * merged[n];
      require((*f)[n] <= bound * (1.0 + kSlack), ErrorCode::InvalidArgument,
              "merged sequence lost resolution (family too large for double weights)");
    }
  }
  return merged;
}

GaugeSum gauge_sum(const Gauge& phi, const ComplexSeq& a) {
  GaugeSum s;
  s.value = gauge_sum(phi, modulus(a), 1.0);
  s.lower_bound_only = !a.tail_exact();
  return s;
}

double gauge_sum(const Gauge& phi, const NonNegSeq& modulus, double mu) {
  double sum = 0.0;
  for (double v : modulus.entries()) sum += phi(mu * v);
  return sum;
}

double scale_to_unit_sum(const Gauge& phi, const ComplexSeq& a) {
  const NonNegSeq mod = modulus(a);
  double mu = 1.0;
  for (int step = 0; step <= 64; ++step) {
    if (gauge_sum(phi, mod, mu) <= 1.0) return mu;
    mu *= 0.5;
  }
  fail(ErrorCode::NoAdmissibleScale, "64 halvings did not bring the gauge sum below 1");
}

namespace {

// Smallest admissible m_k: m_k phi(1/k) >= 1 (up to the certification slack)
// and m_k > m_{k-1}.
std::size_t next_step(const Gauge& phi, std::size_t k, std::size_t prev) {
  constexpr double kMaxStep = 1ULL << 26;
  const double value = phi(1.0 / static_cast<double>(k));
  if (value <= 0.0) fail(ErrorCode::GaugeVanishes, "phi(1/" + std::to_string(k) + ") = 0");
  const double target = 1.0 - kSlack;
  const double guess = std::ceil(1.0 / value);
  require(guess <= kMaxStep, ErrorCode::InvalidArgument,
          "staircase step m_" + std::to_string(k) + " exceeds 2^26 entries");
  auto mk = static_cast<std::size_t>(std::max(1.0, guess));
  while (mk > 1 && static_cast<double>(mk - 1) * value >= target) --mk;
  while (static_cast<double>(mk) * value < target) ++mk;
  return std::max(mk, prev + 1);
}

}  // namespace

std::size_t staircase_levels_covering(const Gauge& phi, std::size_t length, std::size_t max_levels) {
  std::size_t prev = 0;
  for (std::size_t k = 1; k <= max_levels; ++k) {
    prev = next_step(phi, k, prev);
    if (prev >= length) return k;
  }
  return max_levels;
}

Staircase staircase_from_gauge(const Gauge& phi, std::size_t levels) {
  require(levels >= 1, ErrorCode::InvalidArgument, "staircase needs at least one level");
  std::vector<std::size_t> m(levels);
  std::size_t prev = 0;
  for (std::size_t k = 1; k <= levels; ++k) {
    prev = next_step(phi, k, prev);
    m[k - 1] = prev;
  }

  std::vector<double> f(m.back());
  std::size_t j = 0;
  for (; j < m[0]; ++j) f[j] = 1.0;
  for (std::size_t k = 2; k <= levels; ++k) {
    const double value = 1.0 / static_cast<double>(k - 1);
    for (; j < m[k - 1]; ++j) f[j] = value;
  }
  Staircase s{std::move(m), NonNegSeq(std::move(f))};
  require(s.f.sorted(), ErrorCode::InvalidArgument, "staircase is not non-increasing");
  return s;
}

std::optional<std::size_t> counting_claim_violation(const NonNegSeq& scaled_modulus,
                                                    const std::vector<std::size_t>& m) {
  std::vector<double> sorted = scaled_modulus.entries();
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (std::size_t k = 1; k <= m.size(); ++k) {
    const double level = 1.0 / static_cast<double>(k);
    // Entries >= level form a prefix of the descending order.
    auto it = std::partition_point(sorted.begin(), sorted.end(), [level](double v) { return v >= level; });
    auto count = static_cast<std::size_t>(it - sorted.begin());
    if (count > m[k - 1]) return k;
  }
  return std::nullopt;
}

StaircaseCertificate staircase_governs(const Gauge& phi, const ComplexSeq& a, std::size_t levels,
                                       double eps) {
  return staircase_governs(phi, staircase_from_gauge(phi, levels), a, eps);
}

StaircaseCertificate staircase_governs(const Gauge& phi, const Staircase& staircase, const ComplexSeq& a,
                                       double eps) {
  StaircaseCertificate out{GoverningCertificate{}, 1.0, 0.0, false, staircase};
  GoverningCertificate& cert = out.certificate;
  if (apply_probe(a, eps, cert)) return out;

  const NonNegSeq mod = modulus(a);
  out.mu = scale_to_unit_sum(phi, a);
  out.scaled_gauge_sum = gauge_sum(phi, mod, out.mu);
  const NonNegSeq scaled = mod.scaled(out.mu);

  auto violation = counting_claim_violation(scaled, out.staircase.m);
  out.counting_claim_holds = !violation;
  if (violation) {
    cert.verdict = Verdict::NotGoverned;
    cert.checked_range = {0, a.size()};
    cert.failures.push_back("counting claim fails at level k = " + std::to_string(*violation));
    return out;
  }

  const NonNegSeq sorted_scaled = rearrange(scaled);
  const NonNegSeq& f = out.staircase.f;
  const std::size_t len = std::min(sorted_scaled.size(), f.size());
  auto scan = scan_ratios(sorted_scaled.entries(), f.entries(), len);
  // The staircase has no zero entries, so the scan cannot hit a zero divisor.
  cert.governing_index = 0;
  cert.constant = scan.constant / out.mu;
  cert.checked_range = {0, len};
  const NonNegSeq sorted = rearrange(mod);
  cert.residual = residual_of(sorted.entries(), f.entries(), cert.constant, len);
  cert.verdict = cert.residual == 0.0 ? Verdict::Governed : Verdict::NotGoverned;
  cert.exact = a.tail_exact() && len == sorted.size();
  return out;
}

RearrangementCheck rearrangement_inequality_check(const NonNegSeq& f, const NonNegSeq& g) {
  require(g.sorted(), ErrorCode::NotSorted, "weight sequence g must be non-increasing");
  require(f.size() == g.size(), ErrorCode::DimensionMismatch,
          "rearrangement check needs equal truncation lengths");
  const NonNegSeq fs = rearrange(f);
  RearrangementCheck c;
  for (std::size_t n = 0; n < f.size(); ++n) {
    c.lhs += fs[n] * g[n];
    c.rhs += f[n] * g[n];
  }
  c.holds = c.lhs >= c.rhs - kSlack * c.lhs;
  return c;
}

}  // namespace specgate::seqspace
