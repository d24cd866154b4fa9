#include <doctest.h>

#include "specgate/fuzz.hpp"

using namespace specgate;
using namespace specgate::fuzz;

namespace {

FuzzConfig small(plan::Mode pipeline) {
  FuzzConfig c;
  c.pipeline = pipeline;
  c.stable = 6;
  c.marginal = 3;
  c.max_dim = 4;
  c.seed = 42;
  c.sample.random_pairs = 4;
  return c;
}

}  // namespace

TEST_CASE("case generation is deterministic") {
  const auto a = generate_case(plan::Mode::Discrete, false, 5, 42, 8);
  const auto b = generate_case(plan::Mode::Discrete, false, 5, 42, 8);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.similarity == b.similarity);
  CHECK(a.seed == b.seed);
  CHECK(generate_case(plan::Mode::Discrete, false, 6, 42, 8).eigenvalues != a.eigenvalues);
  for (const auto& z : a.eigenvalues) CHECK(std::abs(z) < 1.0);

  const auto m = generate_case(plan::Mode::Discrete, true, 5, 42, 8);
  CHECK(std::abs(std::abs(m.eigenvalues[0]) - 1.0) < 1e-15);
  const auto s = generate_case(plan::Mode::Semigroup, true, 1, 42, 16);
  CHECK(s.eigenvalues[0].real() == 0.0);
  const auto st = generate_case(plan::Mode::Semigroup, false, 1, 42, 16);
  for (const auto& z : st.eigenvalues) {
    CHECK(z.real() <= -0.05);
    CHECK(z.real() >= -3.0);
  }
  const Eigen::JacobiSVD<Matrix> svd(a.similarity);
  const auto& sv = svd.singularValues();
  CHECK(sv(0) / sv(sv.size() - 1) <= 1e3 * (1 + 1e-9));
}

TEST_CASE("stable and marginal discrete cases") {
  auto c = small(plan::Mode::Discrete);
  c.workers = 3;
  const auto s = run_fuzz(c);
  CHECK(s.cases.size() == 9);
  CHECK(s.inconsistent == 0);
  CHECK(s.unexpected == 0);
  CHECK(s.exit_code() == 0);
  c.workers = 1;
  CHECK(to_json(run_fuzz(c)) == to_json(s));
}

TEST_CASE("semigroup cases") {
  auto c = small(plan::Mode::Semigroup);
  c.stable = 3;
  c.marginal = 2;
  const auto s = run_fuzz(c);
  CHECK(s.inconsistent == 0);
  CHECK(s.unexpected == 0);
}

TEST_CASE("shrinker on an injected failure") {
  auto c = small(plan::Mode::Discrete);
  c.stable = 2;
  c.marginal = 0;
  // Flip every stable verdict to exit 3.
  c.exit_hook = [](const CaseRecipe&, int code) { return code == 0 ? 3 : code; };
  const auto s = run_fuzz(c);
  CHECK(s.exit_code() == 3);
  REQUIRE(s.reproducers.size() == s.inconsistent);
  REQUIRE_FALSE(s.reproducers.empty());
  const auto& r = s.reproducers.front();
  CHECK(r.minimal.dim() == 1);
  CHECK(r.minimal.similarity == Matrix::Identity(1, 1));
  CHECK_FALSE(r.steps.empty());
  CHECK(r.plan["mode"] == "discrete");
  const auto p = plan::parse_plan(r.plan.dump());
  CHECK(p.op->dim() == 1);
}
