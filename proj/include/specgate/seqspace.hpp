#pragma once

// Sequence calculus on finite truncations of N0-indexed sequences.
//
// A truncated sequence stores entries 0..N-1 and, optionally, a certified
// bound on every entry with index >= N. A tail bound of exactly zero means the
// truncation is the whole sequence; anything else makes downstream results
// "verified on the stored range" only.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "specgate/linalg.hpp"

namespace specgate::seqspace {

class ComplexSeq {
 public:
  explicit ComplexSeq(std::vector<cplx> entries, std::optional<double> tail_bound = std::nullopt);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<cplx>& entries() const noexcept { return entries_; }
  cplx operator[](std::size_t n) const { return entries_[n]; }
  std::optional<double> tail_bound() const noexcept { return tail_bound_; }
  /// True when the stored entries are the whole sequence (tail bound 0).
  bool tail_exact() const noexcept { return tail_bound_ && *tail_bound_ == 0.0; }

 private:
  std::vector<cplx> entries_;
  std::optional<double> tail_bound_;
};

class NonNegSeq {
 public:
  explicit NonNegSeq(std::vector<double> entries, std::optional<double> tail_bound = std::nullopt);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<double>& entries() const noexcept { return entries_; }
  double operator[](std::size_t n) const { return entries_[n]; }
  std::optional<double> tail_bound() const noexcept { return tail_bound_; }
  bool tail_exact() const noexcept { return tail_bound_ && *tail_bound_ == 0.0; }

  /// Entries are non-increasing (checked at construction).
  bool sorted() const noexcept { return sorted_; }
  /// Set on rearrangements of sequences whose tail is not known to vanish:
  /// positions beyond N-1 of the true rearrangement are not certified.
  bool tail_uncertified() const noexcept { return tail_uncertified_; }

  double sup_norm() const noexcept;
  bool is_zero() const noexcept;

  NonNegSeq scaled(double mu) const;
  NonNegSeq truncated(std::size_t n) const;

 private:
  friend NonNegSeq rearrange(const NonNegSeq& f);

  std::vector<double> entries_;
  std::optional<double> tail_bound_;
  bool sorted_ = false;
  bool tail_uncertified_ = false;
};

/// Non-decreasing gauge phi: [0, inf) -> [0, inf), strictly positive on (0, inf).
///
/// Three shapes are supported:
///   power(p)            phi(x) = x^p, p >= 1
///   table(breakpoints)  step function; with breakpoints (x_0, y_0) < ... <
///                       (x_m, y_m) the value is y_0 on [0, x_0], y_i on
///                       (x_{i-1}, x_i] and y_m beyond x_m. The counting
///                       gauge 1_{x > 0} is {(0, 0), (1, 1)}.
///   composite(s, g)     phi(x) = s * g(x), s > 0
class Gauge {
 public:
  enum class Kind { Power, Table, Composite };

  static Gauge power(double p);
  static Gauge table(std::vector<std::pair<double, double>> breakpoints);
  static Gauge composite(double scale, Gauge inner);

  double operator()(double x) const;

  Kind kind() const noexcept;
  double exponent() const;                                        // Power
  const std::vector<std::pair<double, double>>& breakpoints() const;  // Table
  double scale() const;                                           // Composite
  const Gauge& inner() const;                                     // Composite

  /// Checks monotonicity and positivity on the given sample points.
  bool valid_on(const std::vector<double>& xs) const;

 private:
  struct Power { double p; };
  struct Table { std::vector<std::pair<double, double>> points; };
  struct Composite { double scale; std::shared_ptr<const Gauge> inner; };

  explicit Gauge(std::variant<Power, Table, Composite> rep) : rep_(std::move(rep)) {}

  std::variant<Power, Table, Composite> rep_;
};

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

enum class Verdict { Governed, NotGoverned, InconclusiveTruncation };

std::string to_string(Verdict v);

struct GoverningCertificate {
  std::optional<std::size_t> governing_index;
  double constant = 0.0;
  IndexRange checked_range;
  /// max over the checked range of (|a|*_n - c f_n)_+
  double residual = 0.0;
  Verdict verdict = Verdict::NotGoverned;
  /// For NotGoverned: the offending index (domination) or the first index of
  /// the block that failed the c0 probe.
  std::optional<std::size_t> witness_index;
  std::vector<std::string> failures;
  /// No truncation flags: the orbit is known to vanish beyond the range.
  bool exact = false;
};

// ---------------------------------------------------------------------------

NonNegSeq modulus(const ComplexSeq& a);

/// Non-increasing rearrangement of the stored entries.
NonNegSeq rearrange(const NonNegSeq& f);

struct Domination {
  double constant = 0.0;
  std::optional<std::size_t> argmax;
  bool exact = false;
};

/// Minimal c with g_n <= c f_n on the common range (0/0 counts as 0).
/// Throws ZeroDivisorViolation when g_n > 0 = f_n; DimensionMismatch when the
/// lengths differ.
Domination domination_constant(const NonNegSeq& g, const NonNegSeq& f);

struct ProbeResult {
  bool plausible = true;
  std::optional<std::size_t> witness_begin;  // last-quarter block start
  bool tail_witness = false;                 // tail bound >= eps
};

/// Heuristic refutation of "a is in c0" at scale eps. A truncation can refute
/// membership but never prove it.
ProbeResult c0_membership_probe(const ComplexSeq& a, double eps);

inline constexpr double kDefaultProbeEps = 1e-6;

GoverningCertificate governs(const std::vector<NonNegSeq>& family, const ComplexSeq& a,
                             double eps = kDefaultProbeEps);

/// g = sum_k 2^-k f^(k) / ||f^(k)||_inf over the nonzero members (k from 1).
NonNegSeq merge_governing(const std::vector<NonNegSeq>& family);

struct GaugeSum {
  double value = 0.0;
  bool lower_bound_only = true;
};

GaugeSum gauge_sum(const Gauge& phi, const ComplexSeq& a);
double gauge_sum(const Gauge& phi, const NonNegSeq& modulus, double mu);

/// Largest mu in {1, 1/2, 1/4, ...} (at most 64 halvings) with
/// sum phi(mu |a_n|) <= 1. Throws NoAdmissibleScale.
double scale_to_unit_sum(const Gauge& phi, const ComplexSeq& a);

struct Staircase {
  std::vector<std::size_t> m;  // m[k-1] = m_k, k = 1..K
  NonNegSeq f;
};

Staircase staircase_from_gauge(const Gauge& phi, std::size_t levels);

/// Smallest K <= max_levels whose staircase reaches length >= `length`
/// (max_levels when none does).
std::size_t staircase_levels_covering(const Gauge& phi, std::size_t length, std::size_t max_levels);

/// First level k (1-based) with #{n : scaled_n >= 1/k} > m_k, if any.
std::optional<std::size_t> counting_claim_violation(const NonNegSeq& scaled_modulus,
                                                    const std::vector<std::size_t>& m);

struct StaircaseCertificate {
  GoverningCertificate certificate;
  double mu = 1.0;
  double scaled_gauge_sum = 0.0;
  bool counting_claim_holds = false;
  Staircase staircase;
};

StaircaseCertificate staircase_governs(const Gauge& phi, const ComplexSeq& a, std::size_t levels,
                                       double eps = kDefaultProbeEps);
/// Same, reusing a staircase built from phi.
StaircaseCertificate staircase_governs(const Gauge& phi, const Staircase& staircase, const ComplexSeq& a,
                                       double eps = kDefaultProbeEps);

struct RearrangementCheck {
  double lhs = 0.0;  // sum f*_n g_n
  double rhs = 0.0;  // sum f_n g_n
  bool holds = false;
};

/// Throws NotSorted when g is not non-increasing.
RearrangementCheck rearrangement_inequality_check(const NonNegSeq& f, const NonNegSeq& g);

}  // namespace specgate::seqspace
