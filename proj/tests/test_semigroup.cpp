#include <doctest.h>

#include <cmath>
#include <random>

#include "specgate/error.hpp"
#include "specgate/semigroup.hpp"

using namespace specgate;
using namespace specgate::semigroup;

namespace {

Matrix diag(std::initializer_list<cplx> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (auto x : xs) v(i++) = x;
  return v.asDiagonal();
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

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cplx(normal(rng), normal(rng));
  return m;
}

double simpson(auto&& f, double a, double b, int steps) {
  const double h = (b - a) / steps;
  double s = f(a) + f(b);
  for (int k = 1; k < steps; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("matrix exponential") {
  CHECK(exp_at(Matrix::Zero(3, 3), 1.0) == Matrix::Identity(3, 3));
  std::mt19937_64 rng(9);
  const Matrix a = random_matrix(rng, 4);
  CHECK(exp_at(a, 0.0) == Matrix::Identity(4, 4));

  const Matrix d = diag({-1.0, cplx(0, 2), 0.5});
  const Matrix e = exp_at(d, 0.7);
  CHECK(std::abs(e(0, 0) - std::exp(-0.7)) < 1e-14);
  CHECK(std::abs(e(1, 1) - std::exp(cplx(0, 1.4))) < 1e-14);
  CHECK(std::abs(e(2, 2) - std::exp(0.35)) < 1e-14);

  Matrix n = Matrix::Zero(3, 3);
  n(0, 1) = 1.0;
  n(1, 2) = 1.0;
  const Matrix expect = Matrix::Identity(3, 3) + n + n * n / 2.0;
  CHECK((exp_at(n, 1.0) - expect).norm() < 1e-14);

  CHECK(code_of([&] { exp_at(a, 1e3); }) == ErrorCode::HorizonTooLarge);

  // Semigroup law on budget-respecting horizons.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Matrix b = a / linalg::op_norm(a);
  for (int k = 0; k < 20; ++k) {
    const double s = 10 * u(rng), t = 10 * u(rng);
    const Matrix st = exp_at(b, s + t);
    CHECK(linalg::op_norm(st - exp_at(b, s) * exp_at(b, t)) <= 1e-9 * (1 + linalg::op_norm(st)));
  }
  const ExpCache cache(b, 0.1);
  CHECK(cache.law_residual() < 1e-12);
  const Matrix e40 = exp_at(b, 40.0);
  const Matrix cubed = e40 * e40 * e40;
  CHECK((propagator(b, 120.0) - cubed).norm() < 1e-8 * (1 + cubed.norm()));
}

TEST_CASE("weak trajectory") {
  std::vector<double> grid;
  for (int k = 0; k <= 50; ++k) grid.push_back(0.1 * k);
  const Vector x = Vector::Ones(2), xp = Vector::Unit(2, 0) * 2.0;
  const auto flat = weak_trajectory(Matrix::Zero(2, 2), x, xp, grid);
  for (const auto& v : flat.values) CHECK(v == cplx(2.0));

  const auto decay = weak_trajectory(diag({-1.0}), Vector::Unit(1, 0), Vector::Unit(1, 0), grid);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(decay.values[k] - std::exp(-grid[k])) < 1e-13);

  std::mt19937_64 rng(10);
  const Matrix h = random_matrix(rng, 4);
  const Matrix skew = (h - h.adjoint()) / 2.0;
  const Vector v = random_matrix(rng, 4).col(0), vp = random_matrix(rng, 4).col(1);
  for (const auto& z : weak_trajectory(skew, v, vp, grid).values)
    CHECK(std::abs(z) <= v.norm() * vp.norm() * (1 + 1e-12));

  CHECK(code_of([&] { weak_trajectory(skew, v, vp, {1.0, 0.5}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("L^p trajectory norms") {
  for (double a : {0.5, 1.0, 3.0}) {
    const Matrix m = diag({-a});
    const Vector e0 = Vector::Unit(1, 0);
    const auto p1 = lp_trajectory_norm(m, e0, e0, 1.0, 60.0 / a, 20000);
    CHECK(p1.value == doctest::Approx(1.0 / a).epsilon(1e-9));
    const auto p2 = lp_trajectory_norm(m, e0, e0, 2.0, 60.0 / a, 20000);
    CHECK(p2.value == doctest::Approx(std::sqrt(1.0 / (2 * a))).epsilon(1e-9));
    CHECK(p2.tail_bound >= 0.0);
  }
  CHECK(lp_trajectory_norm(diag({-1.0}), Vector::Zero(1), Vector::Unit(1, 0), 1.0, 10, 100).value == 0.0);
  CHECK(code_of([] {
          lp_trajectory_norm(diag({cplx(0, 1)}), Vector::Unit(1, 0), Vector::Unit(1, 0), 1.0, 10, 100);
        }) == ErrorCode::NoDecayCertificate);

  // The tail bound really bounds the discarded integral.
  const Matrix m = diag({-0.2});
  const auto dec = decay_bound(m, 50);
  const auto shortn = lp_trajectory_norm(m, Vector::Unit(1, 0), Vector::Unit(1, 0), 1.0, 5.0, 1000, dec);
  CHECK(shortn.integral + shortn.tail_bound >= 5.0 * (1 - 1e-9));
}

TEST_CASE("M_q factor") {
  CHECK(mq_factor(0.3, INFINITY) == 1.0);
  CHECK(mq_factor(1.0, 2.0) == doctest::Approx(std::pow(2.0, -0.5)));
  CHECK(mq_factor_simplified(0.25, 2.0) == doctest::Approx(2.0));
  CHECK(code_of([] { mq_factor(0.5, 1.0); }) == ErrorCode::BadConjugate);
  CHECK(code_of([] { mq_factor(0.5, 0.5); }) == ErrorCode::BadConjugate);

  // re |log re| M_q -> 0 as re -> 0.
  double prev = INFINITY;
  for (double re = 1e-2; re > 1e-12; re /= 10) {
    const double v = re * std::abs(std::log(re)) * mq_factor(re, 2.0);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-4);

  for (double q : {1.5, 3.0}) {
    const double re = 0.4;
    const double numeric = std::pow(simpson([&](double t) { return std::exp(-q * re * t); }, 0, 200, 200000), 1 / q);
    CHECK(mq_factor(re, q) == doctest::Approx(numeric).epsilon(1e-9));
  }
  CHECK(conjugate(1.0) == INFINITY);
  CHECK(conjugate(2.0) == 2.0);
}

TEST_CASE("Laplace resolvent") {
  const Matrix a = diag({-1.0, -2.0, -5.0});
  CHECK(laplace_resolvent(a, 1.0, 0.0, 10).norm() == 0.0);
  const Matrix one = laplace_resolvent(diag({-1.0}), 1.0, 40.0, 8000);
  CHECK(std::abs(one(0, 0) - 0.5) < 1e-9);
  for (cplx lambda : {cplx(1.0), cplx(1.0, 2.0)}) {
    const Matrix lr = laplace_resolvent(a, lambda, 40.0, 8000);
    CHECK(linalg::op_norm(lr - linalg::resolvent(a, lambda)) <= 1e-6);
  }
  // Residual shrinks with tau for normal stable A.
  double prev = INFINITY;
  for (double tau : {2.0, 4.0, 8.0, 16.0}) {
    const double res = linalg::op_norm(laplace_resolvent(a, 1.0, tau, 4000) - linalg::resolvent(a, 1.0));
    CHECK(res < prev);
    prev = res;
  }
  const auto net = cauchy_net_check(a, cplx(1.0, 2.0), 10.0, 20.0, 60.0);
  CHECK(net.pass);
  CHECK(net.mu_re == 0.5);
  CHECK(code_of([&] { laplace_resolvent(a, cplx(-1.0), 1.0, 10); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { laplace_resolvent(a, 1.0, 1.0, std::size_t{1} << 23); }) == ErrorCode::QuadratureBudget);
}

TEST_CASE("log envelope fit") {
  const Matrix m1 = diag({-1.0});
  const auto samples = envelope_samples(m1);
  const auto f1 = log_envelope_fit(m1, samples);
  CHECK(f1.m <= std::exp(-1.0) + 1e-12);
  CHECK(f1.m > 0.0);
  CHECK(log_envelope_fit(diag({-10.0}), samples).m < f1.m);
  CHECK(code_of([] { log_envelope_fit(diag({cplx(0.5, 0.0)}), {cplx(0.5 + 1e-12, 0.0)}); }) ==
        ErrorCode::SingularSample);
  CHECK(samples.size() >= 24 * 17);
}

TEST_CASE("strip certificate") {
  const auto a = strip_certificate(0.25);
  CHECK(a.r == doctest::Approx(4 * std::exp(-2.0)));
  CHECK(a.r == doctest::Approx(0.5413).epsilon(1e-3));
  CHECK(4 * a.m < std::abs(std::log(a.r / 4)));
  CHECK(a.chain_lhs < a.chain_rhs);

  const auto b = strip_certificate(1e-6);
  CHECK(b.r == 0.9);
  CHECK(std::abs(std::log(0.225)) == doctest::Approx(1.492).epsilon(1e-3));

  const auto c = strip_certificate(5.0);
  CHECK(c.r == doctest::Approx(4 * std::exp(-21.0)));
  CHECK(c.r == doctest::Approx(3.05e-9).epsilon(1e-2));
  CHECK(c.s0_upper == doctest::Approx(-7.6e-10).epsilon(1e-2));
  CHECK(c.log_margin >= 1.0 - 1e-12);

  // Any M > 0 gives a strict margin, even when r underflows.
  const auto huge = strip_certificate(400.0);
  CHECK(huge.log_margin == doctest::Approx(1.0 + std::log(4.0) - std::log(4.0)));
  CHECK(code_of([] { strip_certificate(0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("verify strip") {
  auto cert = strip_certificate(0.25);
  cert.r = 0.5;
  cert.halfwidth = 0.125;
  cert.bound = 4.0;
  cert.s0_upper = -0.125;
  const auto v = verify_strip(diag({-1.0}), cert, 64, 1);
  CHECK(v.verified);
  for (const auto& s : v.samples) {
    CHECK(s.pass);
    CHECK(s.resolvent_norm <= 8.0 / 7.0 + 1e-12);
  }

  // Eigenvalue just left of the strip: the construction still holds.
  const double m = log_envelope_fit(diag({-0.01, -1.0}), envelope_samples(diag({-0.01, -1.0}))).m;
  auto c2 = strip_certificate(m);
  const Matrix near = diag({cplx(-c2.r / 8, 0.0), -1.0});
  c2 = strip_certificate(log_envelope_fit(near, envelope_samples(near)).m);
  const auto v2 = verify_strip(near, c2, 64, 2);
  CHECK(v2.verified);
  for (const auto& s : v2.samples) CHECK(s.pass);

  // An eigenvalue at 0 never yields a certificate.
  const Matrix marginal = diag({0.0, -1.0});
  const auto c3 = strip_certificate(log_envelope_fit(marginal, envelope_samples(marginal)).m);
  CHECK(code_of([&] { verify_strip(marginal, c3, 64, 3); }) == ErrorCode::StripViolation);

  const auto csv = strip_csv(v);
  CHECK(csv.rfind("re_mu,im_mu,resolvent_norm,bound,pass\n", 0) == 0);
}

TEST_CASE("analyze semigroup") {
  const resolvent::SamplePlan plan;
  const std::vector<double> p_plan{1, 2, 4, 8};
  const auto a = analyze_semigroup(GeneratorSpec(diag({-1.0, -2.0})), plan, p_plan);
  CHECK(a.status == SemigroupStatus::Certified);
  CHECK(a.s_oracle == doctest::Approx(-1.0));
  REQUIRE(a.s0_upper);
  CHECK(*a.s0_upper < 0.0);
  CHECK(*a.s0_upper > -1.0);
  CHECK(a.hoelder.failures == 0);
  CHECK(a.hoelder.checks > 0);

  const auto b = analyze_semigroup(GeneratorSpec(diag({cplx(0, 1)})), plan, p_plan);
  CHECK(b.status == SemigroupStatus::HypothesisUnmet);
  CHECK_FALSE(b.certificate);
  REQUIRE(b.pairs.front().error);
  CHECK(b.pairs.front().error->find("NoDecayCertificate") != std::string::npos);

  Matrix j = diag({-0.5, -0.5, -0.5});
  j(0, 1) = 1.0;
  j(1, 2) = 1.0;
  const auto c = analyze_semigroup(GeneratorSpec(j), plan, p_plan);
  CHECK(c.status == SemigroupStatus::Certified);
  REQUIRE(c.s0_upper);
  CHECK(*c.s0_upper < 0.0);
  CHECK(c.s_oracle <= *c.s0_upper);

  // A large growth hint triggers rescaling; bounds are reported both ways.
  const auto d = analyze_semigroup(GeneratorSpec(diag({-1.0, -3.0}), 2.0), plan, p_plan);
  CHECK(d.status == SemigroupStatus::Certified);
  REQUIRE(d.s0_upper_scaled);
  CHECK(*d.s0_upper == doctest::Approx(*d.s0_upper_scaled / d.scale));
  CHECK(d.scale <= 0.25 + 1e-15);

  const auto e = analyze_semigroup(GeneratorSpec(diag({0.0, -1.0})), plan, p_plan);
  CHECK(e.status != SemigroupStatus::Certified);
}
