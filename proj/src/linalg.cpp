#include "specgate/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specgate/error.hpp"

namespace specgate {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroDivisorViolation: return "ZeroDivisorViolation";
    case ErrorCode::EmptyFamily: return "EmptyFamily";
    case ErrorCode::NoAdmissibleScale: return "NoAdmissibleScale";
    case ErrorCode::GaugeVanishes: return "GaugeVanishes";
    case ErrorCode::NotSorted: return "NotSorted";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::DegenerateFamily: return "DegenerateFamily";
    case ErrorCode::InvalidR: return "InvalidR";
    case ErrorCode::TailTooLarge: return "TailTooLarge";
    case ErrorCode::DivergentSeries: return "DivergentSeries";
    case ErrorCode::NotSpectral: return "NotSpectral";
    case ErrorCode::HorizonTooLarge: return "HorizonTooLarge";
    case ErrorCode::NoDecayCertificate: return "NoDecayCertificate";
    case ErrorCode::BadConjugate: return "BadConjugate";
    case ErrorCode::QuadratureBudget: return "QuadratureBudget";
    case ErrorCode::SingularSample: return "SingularSample";
    case ErrorCode::StripViolation: return "StripViolation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

namespace linalg {

namespace {

Eigen::VectorXd singular_values(const Matrix& a) {
  if (a.size() == 0) return Eigen::VectorXd();
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues();
}

}  // namespace

double op_norm(const Matrix& a) {
  auto s = singular_values(a);
  return s.size() == 0 ? 0.0 : s(0);
}

double min_singular(const Matrix& a) {
  auto s = singular_values(a);
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

std::vector<cplx> eigenvalues(const Matrix& a) {
  require(a.rows() == a.cols(), ErrorCode::DimensionMismatch, "eigenvalues of a non-square matrix");
  Eigen::ComplexEigenSolver<Matrix> solver;
  // 30 QR sweeps per eigenvalue is Eigen's default budget; keep it explicit.
  solver.setMaxIterations(30 * std::max<Eigen::Index>(1, a.rows()));
  solver.compute(a, /*computeEigenvectors=*/false);
  require(solver.info() == Eigen::Success, ErrorCode::EigenFailure,
          "shifted QR iteration did not converge");
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double max_modulus(const std::vector<cplx>& values) {
  double r = 0.0;
  for (auto v : values) r = std::max(r, std::abs(v));
  return r;
}

double max_real_part(const std::vector<cplx>& values) {
  double s = -std::numeric_limits<double>::infinity();
  for (auto v : values) s = std::max(s, v.real());
  return s;
}

double max_abs_imag(const std::vector<cplx>& values) {
  double m = 0.0;
  for (auto v : values) m = std::max(m, std::abs(v.imag()));
  return m;
}

double distance_to(cplx z, const std::vector<cplx>& values) {
  double d = std::numeric_limits<double>::infinity();
  for (auto v : values) d = std::min(d, std::abs(z - v));
  return d;
}

double resolvent_norm(const Matrix& a, cplx z) {
  Matrix shifted = -a;
  shifted.diagonal().array() += z;
  double smin = min_singular(shifted);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / smin;
}

Matrix resolvent(const Matrix& a, cplx z) {
  Matrix shifted = -a;
  shifted.diagonal().array() += z;
  return shifted.partialPivLu().inverse();
}

double relative_distance(const Matrix& a, const Matrix& b) {
  double nb = op_norm(b);
  return op_norm(a - b) / std::max(nb, std::numeric_limits<double>::min());
}

}  // namespace linalg
}  // namespace specgate
