#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "afrelay/errors.hpp"

namespace afrelay {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Hermitian matrices share the dense storage type; operations that require
/// the property validate it with `require_hermitian`.
using HermitianMatrix = ComplexMatrix;

/// Eigendecomposition A = U diag(eigenvalues) U^H with eigenvalues sorted in
/// non-increasing order.
struct EigenDecomposition {
  ComplexMatrix vectors;
  RealVector values;
};

inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kPsdTolerance = 1e-10;

/// Frobenius distance between A and A^H relative to ||A||_F (absolute when A is zero).
double hermitian_defect(const ComplexMatrix& a);
bool is_hermitian(const ComplexMatrix& a, double tol = kHermitianTolerance);
void require_hermitian(const ComplexMatrix& a, const char* what);

/// Symmetric-safe decomposition (tridiagonalization + implicit QL). Eigenvalues
/// within -1e-10 * max(1, lambda_max) of zero are floored to zero.
EigenDecomposition hermitian_eig(const ComplexMatrix& a);

/// Hermitian square root of a positive semidefinite matrix.
HermitianMatrix hermitian_sqrt(const ComplexMatrix& a);

/// Hermitian inverse square root of a positive definite matrix.
HermitianMatrix hermitian_inv_sqrt(const ComplexMatrix& a);

/// Solves A X = B for Hermitian positive definite A.
ComplexMatrix hpd_solve(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix hpd_inverse(const ComplexMatrix& a);

RealVector positive_part(const RealVector& x);

/// Column-stacking vectorization.
ComplexVector vec(const ComplexMatrix& a);
ComplexMatrix unvec(const ComplexVector& v, Eigen::Index rows, Eigen::Index cols);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix block_diag(const std::vector<ComplexMatrix>& blocks);

/// Rectangular identity: ones on the main diagonal, zeros elsewhere.
ComplexMatrix truncated_identity(Eigen::Index rows, Eigen::Index cols);

inline double real_trace(const ComplexMatrix& a) { return a.trace().real(); }

/// Scale-aware Frobenius distance ||a - b|| / max(||b||, 1e-300) falling back to
/// absolute distance when b is zero.
double relative_distance(const ComplexMatrix& a, const ComplexMatrix& b);

bool all_finite(const ComplexMatrix& a);

}  // namespace afrelay
