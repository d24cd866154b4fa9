#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "specgate/error.hpp"
#include "specgate/seqspace.hpp"

using namespace specgate;
using namespace specgate::seqspace;

namespace {

ComplexSeq real_seq(std::vector<double> xs, std::optional<double> tail = std::nullopt) {
  std::vector<cplx> out(xs.begin(), xs.end());
  return ComplexSeq(std::move(out), tail);
}

ComplexSeq geometric(double q, std::size_t n, std::optional<double> tail = std::nullopt) {
  std::vector<double> xs;
  for (std::size_t k = 0; k < n; ++k) xs.push_back(std::pow(q, static_cast<double>(k)));
  return real_seq(xs, tail);
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

}  // namespace

TEST_CASE("modulus") {
  CHECK(modulus(real_seq({0, 0, 0})).entries() == std::vector<double>{0, 0, 0});
  const ComplexSeq a({cplx(0, 1), cplx(-1, 0), cplx(3, 4)}, 0.25);
  const auto m = modulus(a);
  CHECK(m.entries() == std::vector<double>{1, 1, 5});
  CHECK(m.tail_bound() == 0.25);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::vector<cplx> zs;
  for (int i = 0; i < 200; ++i) zs.emplace_back(normal(rng), normal(rng));
  const auto mz = modulus(ComplexSeq(zs));
  for (std::size_t i = 0; i < zs.size(); ++i)
    CHECK(mz[i] == doctest::Approx(std::sqrt(zs[i].real() * zs[i].real() + zs[i].imag() * zs[i].imag())).epsilon(1e-15));
}

TEST_CASE("rearrange") {
  const NonNegSeq harmonic({1, 0.5, 1.0 / 3, 0.25});
  CHECK(rearrange(harmonic).entries() == harmonic.entries());
  const auto r = rearrange(NonNegSeq({0, 2, 0, 1, 3}));
  CHECK(r.entries() == std::vector<double>{3, 2, 1, 0, 0});
  CHECK(r.sorted());

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = u(rng);
  const NonNegSeq f(xs);
  const auto fr = rearrange(f);
  auto oracle = xs;
  std::sort(oracle.begin(), oracle.end(), std::greater<>());
  CHECK(fr.entries() == oracle);
  CHECK(rearrange(fr).entries() == fr.entries());
  CHECK(rearrange(f.scaled(0.5)).entries() == fr.scaled(0.5).entries());

  const auto tailed = rearrange(NonNegSeq({0.1, 0.3}, 0.2));
  CHECK(tailed.tail_bound() == 0.2);
  CHECK(tailed.tail_uncertified());
  CHECK_FALSE(rearrange(NonNegSeq({0.1, 0.3}, 0.0)).tail_uncertified());
}

TEST_CASE("domination constant") {
  const NonNegSeq f({1, 0.5, 1.0 / 3, 0.25});
  CHECK(domination_constant(f, f).constant == doctest::Approx(1.0));
  const auto d = domination_constant(NonNegSeq({1, 0.25, 1.0 / 9, 1.0 / 16}), f);
  CHECK(d.constant == doctest::Approx(1.0));
  REQUIRE(d.argmax);
  CHECK(*d.argmax == 0);
  CHECK(code_of([] { domination_constant(NonNegSeq({0, 1, 0}), NonNegSeq({1, 0, 1})); }) ==
        ErrorCode::ZeroDivisorViolation);
  CHECK(code_of([] { domination_constant(NonNegSeq({0, 1}), NonNegSeq({1, 0, 1})); }) ==
        ErrorCode::DimensionMismatch);

  // Minimality: shaving the constant breaks the inequality at the argmax.
  const NonNegSeq g({0.3, 0.7, 0.2}), h({0.9, 0.8, 0.1});
  const auto m = domination_constant(g, h);
  for (std::size_t n = 0; n < 3; ++n) CHECK(g[n] <= m.constant * h[n]);
  const double shaved = m.constant * (1 - 1e-9);
  CHECK(g[*m.argmax] > shaved * h[*m.argmax]);
}

TEST_CASE("c0 membership probe") {
  CHECK(c0_membership_probe(geometric(0.5, 64), 1e-3).plausible);
  const auto p = c0_membership_probe(real_seq(std::vector<double>(64, 1.0)), 0.5);
  CHECK_FALSE(p.plausible);
  REQUIRE(p.witness_begin);
  CHECK(*p.witness_begin == 48);
  std::vector<cplx> unitary;
  for (int n = 0; n < 64; ++n) unitary.push_back(std::polar(1.0, 0.7 * n));
  CHECK_FALSE(c0_membership_probe(ComplexSeq(unitary), 1e-6).plausible);
  const auto t = c0_membership_probe(geometric(0.5, 64, 0.01), 1e-3);
  CHECK_FALSE(t.plausible);
  CHECK(t.tail_witness);
}

TEST_CASE("governs") {
  const NonNegSeq f({1, 0.5, 0.25});
  const auto c1 = governs({f}, real_seq({0.25, 1, 0.5}));
  CHECK(c1.verdict == Verdict::Governed);
  CHECK(c1.constant == doctest::Approx(1.0));
  CHECK(c1.governing_index == 0u);

  std::vector<double> nine;
  for (int n = 0; n < 64; ++n) nine.push_back(std::pow(0.9, n));
  const auto c2 = governs({NonNegSeq(nine)}, geometric(0.5, 64));
  CHECK(c2.verdict == Verdict::Governed);
  CHECK(c2.constant == doctest::Approx(1.0));

  const auto c3 = governs({NonNegSeq(nine)}, real_seq(std::vector<double>(64, 1.0)));
  CHECK(c3.verdict == Verdict::NotGoverned);

  // A tail that alone fails the probe gives an inconclusive verdict.
  const auto c4 = governs({NonNegSeq(nine)}, geometric(0.5, 64, 0.01));
  CHECK(c4.verdict == Verdict::InconclusiveTruncation);

  CHECK(to_string(Verdict::Governed) == "governed");
  CHECK(to_string(Verdict::NotGoverned) == "not_governed");
  CHECK(to_string(Verdict::InconclusiveTruncation) == "inconclusive_truncation");
}

TEST_CASE("merge governing") {
  const NonNegSeq f({2, 1, 0.5});
  const auto g = merge_governing({f});
  for (std::size_t n = 0; n < 3; ++n) CHECK(g[n] == doctest::Approx(f[n] / 4.0));
  CHECK(domination_constant(f, g).constant == doctest::Approx(4.0));

  const auto g2 = merge_governing({NonNegSeq({1, 0, 0}), NonNegSeq({0, 1, 0})});
  CHECK(g2.entries() == std::vector<double>{0.5, 0.25, 0});

  const auto g3 = merge_governing({NonNegSeq({0, 0, 0}), f});
  CHECK(g3.entries() == g.entries());
  CHECK(code_of([] { merge_governing({NonNegSeq({0, 0})}); }) == ErrorCode::EmptyFamily);
}

TEST_CASE("gauge sums and scaling") {
  const auto x = Gauge::power(1), x2 = Gauge::power(2);
  CHECK(gauge_sum(x, geometric(0.5, 60)).value == doctest::Approx(2.0));
  CHECK(gauge_sum(x2, geometric(0.5, 60)).value == doctest::Approx(4.0 / 3.0));
  CHECK(gauge_sum(x, real_seq({0, 0})).value == 0.0);
  CHECK(gauge_sum(x, geometric(0.5, 8)).lower_bound_only);
  CHECK_FALSE(gauge_sum(x, geometric(0.5, 8, 0.0)).lower_bound_only);

  CHECK(scale_to_unit_sum(x, real_seq({0.5, 0.25})) == 1.0);
  CHECK(scale_to_unit_sum(x, geometric(0.5, 60)) == 0.5);
  const auto counting = Gauge::table({{0, 0}, {1, 1}});
  CHECK(counting(0.0) == 0.0);
  CHECK(counting(1e-9) == 1.0);
  CHECK(counting(5.0) == 1.0);
  CHECK(code_of([&] { scale_to_unit_sum(counting, real_seq({0.5, 0.25})); }) == ErrorCode::NoAdmissibleScale);

  // Monotone in |a|.
  CHECK(gauge_sum(x2, real_seq({0.1, 0.2})).value <= gauge_sum(x2, real_seq({0.3, 0.2})).value);
  CHECK(Gauge::composite(2.0, x2)(3.0) == doctest::Approx(18.0));
}

TEST_CASE("staircase construction") {
  const auto s1 = staircase_from_gauge(Gauge::power(1), 5);
  CHECK(s1.m == std::vector<std::size_t>{1, 2, 3, 4, 5});
  const std::vector<double> f1{1, 1, 0.5, 1.0 / 3, 0.25};
  REQUIRE(s1.f.size() == f1.size());
  for (std::size_t j = 0; j < f1.size(); ++j) CHECK(s1.f[j] == doctest::Approx(f1[j]));

  const auto s2 = staircase_from_gauge(Gauge::power(2), 3);
  CHECK(s2.m == std::vector<std::size_t>{1, 4, 9});
  const std::vector<double> f2{1, 1, 1, 1, 0.5, 0.5, 0.5, 0.5, 0.5};
  REQUIRE(s2.f.size() == f2.size());
  for (std::size_t j = 0; j < f2.size(); ++j) CHECK(s2.f[j] == doctest::Approx(f2[j]));

  CHECK(staircase_from_gauge(Gauge::composite(3.0, Gauge::power(2)), 4).m.front() == 1);
  // Table gauges are positive on (0, inf) by construction; only underflow vanishes.
  CHECK(code_of([] { staircase_from_gauge(Gauge::power(2000), 3); }) == ErrorCode::GaugeVanishes);
}

TEST_CASE("staircase governs") {
  const auto x = Gauge::power(1);
  const auto zero = staircase_governs(x, real_seq({0, 0, 0}), 8);
  CHECK(zero.certificate.verdict == Verdict::Governed);
  CHECK(zero.certificate.constant == 0.0);

  const auto geo = staircase_governs(x, geometric(0.5, 40), 64);
  CHECK(geo.certificate.verdict == Verdict::Governed);
  CHECK(geo.mu == 0.5);
  CHECK(geo.counting_claim_holds);
  for (std::size_t k = 1; k <= 64; ++k) CHECK(std::floor(std::log2(static_cast<double>(k))) <= geo.staircase.m[k - 1]);

  // m_k + 1 copies of 1/k violate the unit-sum premise: scaling kicks in
  // rather than a false certificate at mu = 1.
  const auto x2 = Gauge::power(2);
  const auto st = staircase_from_gauge(x2, 3);
  const std::size_t k = 3;
  std::vector<double> block(st.m[k - 1] + 1, 1.0 / k);
  block.resize(4 * block.size(), 0.0);  // zero padding so the c0 probe passes
  const auto adversarial = real_seq(block, 0.0);
  CHECK(gauge_sum(x2, adversarial).value > 1.0);
  const auto adv = staircase_governs(x2, adversarial, 8);
  CHECK(adv.mu < 1.0);
  CHECK(adv.counting_claim_holds);
}

TEST_CASE("rearrangement inequality") {
  const NonNegSeq g({1, 0.5});
  const auto same = rearrangement_inequality_check(NonNegSeq({2, 1}), g);
  CHECK(same.lhs == same.rhs);
  const auto two = rearrangement_inequality_check(NonNegSeq({0, 1}), g);
  CHECK(two.lhs == 1.0);
  CHECK(two.rhs == 0.5);
  CHECK(two.holds);
  CHECK(code_of([] { rearrangement_inequality_check(NonNegSeq({1, 2}), NonNegSeq({0.5, 1})); }) ==
        ErrorCode::NotSorted);
}
