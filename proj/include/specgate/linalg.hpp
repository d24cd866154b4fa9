#pragma once

// Dense complex linear algebra shared by the operator, resolvent and
// semigroup modules. Thin wrappers over Eigen so the rest of the code base
// talks in terms of operator norms, spectra and resolvents.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace specgate {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace linalg {

/// Largest singular value.
double op_norm(const Matrix& a);

/// Smallest singular value.
double min_singular(const Matrix& a);

/// Eigenvalues of a square matrix (complex Schur form). Throws EigenFailure.
std::vector<cplx> eigenvalues(const Matrix& a);

double max_modulus(const std::vector<cplx>& values);
double max_real_part(const std::vector<cplx>& values);
double max_abs_imag(const std::vector<cplx>& values);

/// Distance from z to the nearest listed eigenvalue.
double distance_to(cplx z, const std::vector<cplx>& values);

/// ||(z - A)^{-1}|| computed as 1 / sigma_min(z - A); +inf when singular.
double resolvent_norm(const Matrix& a, cplx z);

/// (z - A)^{-1} by partial-pivot LU.
Matrix resolvent(const Matrix& a, cplx z);

/// Bilinear pairing <x', x> = sum_j x'_j x_j (no conjugation).
inline cplx pair(const Vector& xp, const Vector& x) { return (xp.transpose() * x)(0, 0); }

/// Relative operator-norm distance ||a - b|| / max(||b||, tiny).
double relative_distance(const Matrix& a, const Matrix& b);

}  // namespace linalg
}  // namespace specgate
