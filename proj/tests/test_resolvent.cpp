#include <doctest.h>

#include <cmath>
#include <random>

#include "specgate/error.hpp"
#include "specgate/resolvent.hpp"

using namespace specgate;
using namespace specgate::resolvent;
using operators::OperatorSpec;
using seqspace::NonNegSeq;

namespace {

NonNegSeq geometric(double q, std::size_t n, std::optional<double> tail = std::nullopt) {
  std::vector<double> xs;
  for (std::size_t k = 0; k < n; ++k) xs.push_back(std::pow(q, static_cast<double>(k)));
  return NonNegSeq(xs, tail);
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

Matrix random_stable(std::mt19937_64& rng, Eigen::Index n, double radius) {
  std::normal_distribution<double> normal;
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cplx(normal(rng), normal(rng));
  const double rho = linalg::max_modulus(linalg::eigenvalues(m));
  return m * (radius / rho);
}

}  // namespace

TEST_CASE("e(r)") {
  const NonNegSeq delta({1, 0, 0, 0}, 0.0);
  for (double r : {1.01, 1.5, 3.0}) CHECK(e_of_r(delta, r).value == doctest::Approx((r - 1) / r));
  const auto g = geometric(0.5, 200, 0.0);
  for (double r : {1.1, 2.0}) CHECK(e_of_r(g, r).value == doctest::Approx((r - 1) / (r - 0.5)).epsilon(1e-12));
  CHECK(e_of_r(NonNegSeq({0, 0}), 2.0).value == 0.0);
  CHECK(code_of([&] { e_of_r(g, 1.0); }) == ErrorCode::InvalidR);

  // Tail term t r^-N, conservative without a tail bound.
  const auto plain = e_of_r(geometric(0.5, 4), 2.0);
  CHECK(plain.conservative);
  CHECK(plain.tail_bound == doctest::Approx(1.0 / 16));
  const auto tailed = e_of_r(geometric(0.5, 4, 0.125), 2.0);
  CHECK_FALSE(tailed.conservative);
  CHECK(tailed.tail_bound == doctest::Approx(0.125 / 16));

  // Bounded by one for entries in [0, 1]; homogeneous.
  for (double r : {1.001, 1.3, 7.0}) {
    CHECK(e_of_r(g, r).value <= 1.0);
    CHECK(e_of_r(g.scaled(3.0), r).value == doctest::Approx(3.0 * e_of_r(g, r).value));
  }
}

TEST_CASE("e(r) decay certificate") {
  const auto c = e_decay_certificate(geometric(0.5, 64, 0.0), 1.0 / 16);
  CHECK(c.n0 == 4);
  CHECK(c.delta == doctest::Approx(1.0 / 64));
  CHECK(c.all_pass);
  for (const auto& s : c.samples) {
    CHECK(s.r > 1.0);
    CHECK(s.r < 1.0 + c.delta);
  }
  const auto d = e_decay_certificate(NonNegSeq({1, 0, 0, 0}, 0.0), 0.1);
  CHECK(d.n0 == 1);
  CHECK(d.delta == doctest::Approx(0.1));
  CHECK(d.all_pass);
  CHECK(e_decay_certificate(geometric(0.5, 16, 0.0), 2.0).n0 == 1);
  CHECK(code_of([] { e_decay_certificate(geometric(0.5, 4, 0.2), 0.1); }) == ErrorCode::TailTooLarge);
}

TEST_CASE("Neumann series") {
  const auto zero = neumann_resolvent(OperatorSpec::dense(Matrix::Zero(3, 3)), 2.0, cplx(0, 1), 1);
  CHECK((zero.approximation - Matrix::Identity(3, 3) / cplx(0, 2)).norm() == 0.0);

  const auto d = OperatorSpec::diagonal({0.5, cplx(0, 0.3), -0.2});
  const auto n = neumann_resolvent_adaptive(d, 1.5, 1.0);
  const std::vector<cplx> e{0.5, cplx(0, 0.3), -0.2};
  for (int i = 0; i < 3; ++i) CHECK(std::abs(n.approximation(i, i) - 1.0 / (1.5 - e[i])) < 1e-12);

  std::mt19937_64 rng(5);
  const auto t = OperatorSpec::dense(random_stable(rng, 12, 0.9));
  for (double r : {1.1, 1.5, 2.0}) {
    const cplx lambda = std::polar(1.0, 0.3);
    const auto approx = neumann_resolvent_adaptive(t, r, lambda);
    const Matrix direct = linalg::resolvent(t.densify(), r * lambda);
    CHECK(linalg::relative_distance(approx.approximation, direct) <= 1e-8);
    const double k1 = linalg::relative_distance(neumann_resolvent(t, r, lambda, 50).approximation, direct);
    const double k2 = linalg::relative_distance(neumann_resolvent(t, r, lambda, 100).approximation, direct);
    CHECK(k2 <= k1 + 1e-12);
  }
  CHECK(code_of([] { neumann_resolvent(OperatorSpec::diagonal({3.0}), 1.5, 1.0, 200); }) ==
        ErrorCode::DivergentSeries);
}

TEST_CASE("weak resolvent estimate chain") {
  const auto d = OperatorSpec::diagonal({0.5});
  const auto rec = weak_resolvent_bound_check(d, Vector::Unit(1, 0), Vector::Unit(1, 0), geometric(0.5, 200, 0.0),
                                              1.0, 2.0, 1.0);
  CHECK(rec.weak_vs_series.lhs == doctest::Approx(2.0 / 3));
  CHECK(rec.rearranged_vs_e.rhs == doctest::Approx(2.0 / 3));
  CHECK(rec.min_residual >= -1e-10);
  CHECK(std::abs(rec.min_residual) <= 1e-10);

  const auto z = weak_resolvent_bound_check(OperatorSpec::diagonal({0.5, 0.2}), Vector::Zero(2), Vector::Unit(2, 0),
                                            geometric(0.5, 32, 0.0), 1.0, 1.5, 1.0);
  CHECK(z.weak_vs_series.lhs == 0.0);
  CHECK(z.series_vs_rearranged.lhs == 0.0);
  CHECK(z.min_residual >= 0.0);
}

TEST_CASE("resolvent lower bound") {
  for (double r : default_r_grid()) {
    const auto one = resolvent_lower_bound_check(OperatorSpec::diagonal({1.0}), r, 1.0);
    CHECK(one.resolvent_norm == doctest::Approx(1.0 / (r - 1)).epsilon(1e-8));
    const auto mixed = resolvent_lower_bound_check(OperatorSpec::diagonal({cplx(0, 1), 0.5}), r, cplx(0, 1));
    CHECK(mixed.resolvent_norm == doctest::Approx(1.0 / (r - 1)).epsilon(1e-8));
    CHECK(mixed.norm_vs_distance.residual >= -1e-10);
    CHECK(mixed.distance_vs_gap.residual >= -1e-10);
  }
  CHECK(code_of([] { resolvent_lower_bound_check(OperatorSpec::diagonal({0.5}), 1.5, 1.0); }) ==
        ErrorCode::NotSpectral);
  const auto withf = resolvent_lower_bound_check(OperatorSpec::diagonal({1.0}), 1.25, 1.0, geometric(0.5, 64, 0.0));
  REQUIRE(withf.inverse_e);
  REQUIRE(withf.scaled_norm);
  CHECK(*withf.scaled_norm >= *withf.inverse_e * (1 - 1e-12));
}

TEST_CASE("probes and pairs") {
  const auto grid = default_r_grid();
  REQUIRE(grid.size() == 12);
  CHECK(grid.front() == 1.5);
  CHECK(grid.back() == 1.0 + std::ldexp(1.0, -12));
  const auto probe = build_probe(OperatorSpec::diagonal({0.5, 0.2}), 1.0, {1.5, 1.1}, geometric(0.5, 32, 0.0));
  CHECK(probe.norms[0] == doctest::Approx(1.0));
  const auto csv = probe_csv(probe);
  CHECK(csv.rfind("r,e_r,resolvent_norm,neumann_norm,tail\n", 0) == 0);

  const auto pairs = make_pairs(3, {});
  CHECK(pairs.size() == 9 + 32);
  CHECK(pairs.front().label == "e0->e'0");
  const auto again = make_pairs(3, {});
  for (std::size_t i = 0; i < pairs.size(); ++i) CHECK(pairs[i].x == again[i].x);
  CHECK(make_pairs(9, {}).size() == 32);
}

TEST_CASE("analyze discrete") {
  const SamplePlan plan;
  const auto f = geometric(0.9, 64);
  const auto a = analyze_discrete(OperatorSpec::diagonal({0.5, 0.3}), plan, std::vector<NonNegSeq>{f});
  CHECK(a.all_governed);
  CHECK(a.r_oracle == doctest::Approx(0.5));
  CHECK(a.verdict == ReportVerdict::ConsistentWithTheorem);

  const auto b = analyze_discrete(OperatorSpec::diagonal({1.0}), plan, std::vector<NonNegSeq>{f});
  CHECK_FALSE(b.all_governed);
  CHECK(b.verdict == ReportVerdict::ConsistentWithTheorem);

  GaugeFamily phi{{seqspace::Gauge::power(1), seqspace::Gauge::power(2)}};
  const auto c = analyze_discrete(OperatorSpec::jordan(0.99, 4), plan, phi);
  CHECK(c.all_governed);
  CHECK(c.r_oracle == doctest::Approx(0.99));
  CHECK(c.verdict == ReportVerdict::ConsistentWithTheorem);
  CHECK_FALSE(c.e_decay_record.empty());
  for (const auto& t : c.e_decay_record) CHECK(t.pass);

  // Nilpotent operators have exact orbits.
  const auto s = analyze_discrete(OperatorSpec::weighted_shift({2.0, 3.0}, 3), plan, phi);
  CHECK(s.all_governed);
  CHECK(s.all_exact);
  CHECK(s.verdict == ReportVerdict::ConsistentWithTheorem);
}
