#pragma once

// Discrete-time certificates: the averaged tail functional
//   e(r) = (r - 1) sum_n f_n / r^{n+1},
// Neumann partial sums of R(r lambda, T), the upper estimate chain for weak
// resolvent values of governed orbits, the lower bound near unimodular
// spectral values, and the end-to-end discrete analysis.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "specgate/operators.hpp"
#include "specgate/seqspace.hpp"

namespace specgate::resolvent {

struct EValue {
  double value = 0.0;
  double tail_bound = 0.0;
  /// Tail bound used ||f||_inf because f carries no tail bound of its own.
  bool conservative = false;
};

EValue e_of_r(const seqspace::NonNegSeq& f, double r);

struct DecaySample {
  double r = 0.0;
  double e = 0.0;
  double tail = 0.0;
  bool pass = false;
};

struct DecayCertificate {
  bool conclusive = false;
  std::size_t n0 = 0;
  double delta = 0.0;
  double eps = 0.0;
  double max_e = 0.0;
  std::vector<DecaySample> samples;
  bool all_pass = false;
};

/// n0 = first index after which f stays <= eps (clamped to >= 1),
/// delta = eps / (n0 ||f||_inf); checks e(r) <= 2 eps + tail on sampled
/// r in (1, 1 + delta). Throws TailTooLarge when f's tail bound exceeds eps.
DecayCertificate e_decay_certificate(const seqspace::NonNegSeq& f, double eps, std::size_t n_samples = 32);

struct NeumannResult {
  Matrix approximation;
  double tail_bound = 0.0;  // heuristic: ||T^K|| r^{-K} / (r - rho)
  double rho = 0.0;         // ||T^K||^{1/K}
  std::size_t terms = 0;
};

/// sum_{n < terms} T^n / (r lambda)^{n+1}. Throws DivergentSeries when the
/// series visibly diverges (see the implementation for the exact test).
NeumannResult neumann_resolvent(const operators::OperatorSpec& t, double r, cplx lambda, std::size_t terms);

/// Doubles the horizon until tail_bound <= rel_tol * ||approximation||.
NeumannResult neumann_resolvent_adaptive(const operators::OperatorSpec& t, double r, cplx lambda,
                                         double rel_tol = 1e-12, std::size_t max_terms = 1u << 14);

struct ChainLink {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // rhs - lhs; >= 0 when the link holds
};

struct ChainRecord {
  ChainLink weak_vs_series;       // |<x', R x>| <= sum |a_n| / r^{n+1} (+ truncated tail)
  ChainLink series_vs_rearranged; // sum |a_n| g_n <= sum |a|*_n g_n
  ChainLink rearranged_vs_e;      // sum |a|*_n g_n <= c e(r) / (r - 1)
  double min_residual = 0.0;
};

/// Checks the three-link upper estimate for the weak resolvent value of a
/// governed orbit. The orbit is recomputed to f.size() terms.
ChainRecord weak_resolvent_bound_check(const operators::OperatorSpec& t, const Vector& x, const Vector& xp,
                                       const seqspace::NonNegSeq& f, double c, double r, cplx lambda,
                                       const std::optional<operators::DecayFit>& fit = std::nullopt);

struct LowerBoundRecord {
  double resolvent_norm = 0.0;   // ||R(r lambda, T)|| by direct solve
  double inverse_distance = 0.0; // 1 / dist(r lambda, sigma(T))
  double inverse_gap = 0.0;      // 1 / (r - 1)
  double eigen_error = 0.0;      // dist(lambda, sigma(T)) from the oracle
  ChainLink norm_vs_distance;    // 1/dist <= ||R||
  ChainLink distance_vs_gap;     // 1/(r - 1 + err) <= 1/dist
  std::optional<double> inverse_e; // 1/e(r) when f supplied
  std::optional<double> scaled_norm; // ||(r-1)/e(r) R||
};

LowerBoundRecord resolvent_lower_bound_check(const operators::OperatorSpec& t, double r, cplx lambda_spectral,
                                             const std::optional<seqspace::NonNegSeq>& f = std::nullopt);

/// Default grid r = 1 + 2^-k, k = 1..12.
std::vector<double> default_r_grid();

struct ResolventProbe {
  cplx lambda;
  std::vector<double> r_grid;
  std::vector<double> norms;
  std::vector<double> neumann_norms;
  std::vector<double> e_values;
  std::vector<double> tail_estimates;
};

ResolventProbe build_probe(const operators::OperatorSpec& t, cplx lambda, const std::vector<double>& r_grid,
                           const std::optional<seqspace::NonNegSeq>& f);

std::string probe_csv(const ResolventProbe& probe);

// --- end-to-end --------------------------------------------------------------

struct SamplePlan {
  /// Coordinate pairs (e_j, e_i); unset means "only when dim <= 8".
  std::optional<bool> coordinate_pairs;
  std::size_t random_pairs = 32;
  unsigned long long seed = 0;
};

struct SamplePair {
  std::string label;
  Vector x;
  Vector xp;
};

std::vector<SamplePair> make_pairs(std::size_t dim, const SamplePlan& plan);

struct GaugeFamily { std::vector<seqspace::Gauge> gauges; };
using Family = std::variant<std::vector<seqspace::NonNegSeq>, GaugeFamily>;

struct DiscreteOptions {
  std::size_t n_terms = 256;
  std::size_t max_terms = 1u << 15;
  double probe_eps = seqspace::kDefaultProbeEps;
};

enum class ReportVerdict { ConsistentWithTheorem, CounterexampleCandidate, Inconclusive };
std::string to_string(ReportVerdict v);

struct PairCertificate {
  std::string label;
  seqspace::GoverningCertificate certificate;
  /// Position in the gauge list (gauge path) that produced the certificate.
  std::optional<std::size_t> gauge_index;
  std::optional<double> mu;
  std::optional<std::string> error;
};

struct EDecayTriple {
  double eps = 0.0;
  double delta = 0.0;
  double max_e = 0.0;
  bool pass = false;
};

struct StabilityReport {
  std::size_t dim = 0;
  std::size_t horizon = 0;
  std::vector<PairCertificate> pairs;
  double r_oracle = 0.0;
  double gelfand = 0.0;
  bool power_bounded = true;
  bool all_governed = false;
  bool all_exact = false;
  ReportVerdict verdict = ReportVerdict::Inconclusive;
  std::vector<EDecayTriple> e_decay_record;
  /// Sequence used for the e(r) record: merged F or the first staircase.
  std::optional<seqspace::NonNegSeq> governing_sequence;
};

StabilityReport analyze_discrete(const operators::OperatorSpec& t, const SamplePlan& plan, const Family& family,
                                 const DiscreteOptions& options = {});

}  // namespace specgate::resolvent
