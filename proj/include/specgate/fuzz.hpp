#pragma once

// Property fuzzing over random stable and marginal operators.
//
// Case k is generated from (seed, k) alone, so results do not depend on the
// worker count or on scheduling. Operators are T = V D V^{-1} with
// V = U diag(s) W, U and W Haar-like unitaries and s log-uniform in [1, 1e3].

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "specgate/json_io.hpp"
#include "specgate/plan.hpp"
#include "specgate/resolvent.hpp"
#include "specgate/semigroup.hpp"

namespace specgate::fuzz {

struct CaseRecipe {
  std::size_t index = 0;
  bool marginal = false;
  plan::Mode pipeline = plan::Mode::Discrete;
  std::vector<cplx> eigenvalues;
  Matrix similarity;
  unsigned long long seed = 0;  // sample-plan seed of this case

  std::size_t dim() const { return eigenvalues.size(); }
  Matrix matrix() const;
};

CaseRecipe generate_case(plan::Mode pipeline, bool marginal, std::size_t index, unsigned long long seed,
                         std::size_t max_dim);

struct CaseOutcome {
  std::size_t index = 0;
  bool marginal = false;
  std::size_t dim = 0;
  int exit_code = 1;
  std::string verdict;
  std::string detail;
  /// Stable cases should exit 0, marginal ones 2.
  bool expected() const { return exit_code == (marginal ? 2 : 0); }
};

struct FuzzConfig {
  plan::Mode pipeline = plan::Mode::Discrete;
  std::size_t stable = 500;
  std::size_t marginal = 100;
  std::size_t max_dim = 8;
  std::size_t workers = 1;
  unsigned long long seed = 0;
  resolvent::SamplePlan sample;  // seed is replaced per case
  resolvent::DiscreteOptions discrete;
  std::vector<double> p_plan{1.0, 2.0, 4.0, 8.0};
  semigroup::SemigroupOptions semigroup;
  /// Test-only fault injection: maps (case, exit code) to the exit code used.
  std::function<int(const CaseRecipe&, int)> exit_hook;
};

FuzzConfig config_from_plan(const plan::AnalysisPlan& p);

CaseOutcome evaluate_case(const CaseRecipe& c, const FuzzConfig& config);

struct Reproducer {
  std::size_t index = 0;
  CaseRecipe minimal;
  std::vector<std::string> steps;
  io::json plan;  // a runnable plan for the minimal case
};

/// Greedy shrinking of an exit-3 case: dimension reduction, eigenvalue
/// rounding and V -> I, each kept only while the case still exits 3.
Reproducer shrink(const CaseRecipe& c, const FuzzConfig& config);

struct FuzzSummary {
  std::vector<CaseOutcome> cases;
  std::size_t consistent = 0;
  std::size_t hypothesis_unmet = 0;
  std::size_t inconsistent = 0;
  std::size_t unexpected = 0;
  std::vector<Reproducer> reproducers;

  int exit_code() const { return inconsistent > 0 ? 3 : (unexpected > 0 ? 2 : 0); }
};

FuzzSummary run_fuzz(const FuzzConfig& config);

io::json to_json(const FuzzSummary& s);

}  // namespace specgate::fuzz
