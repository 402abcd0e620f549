#include "afrelay/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace afrelay {

double hermitian_defect(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  const double norm = a.norm();
  const double diff = (a - a.adjoint()).norm();
  return norm > 0.0 ? diff / norm : diff;
}

bool is_hermitian(const ComplexMatrix& a, double tol) { return hermitian_defect(a) <= tol; }

void require_hermitian(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw InvalidInput(std::string(what) + ": matrix is not square");
  }
  if (!is_hermitian(a)) {
    throw InvalidInput(std::string(what) + ": matrix is not Hermitian (defect " +
                       std::to_string(hermitian_defect(a)) + ")");
  }
}

EigenDecomposition hermitian_eig(const ComplexMatrix& a) {
  require_hermitian(a, "hermitian_eig");
  const Eigen::Index n = a.rows();
  EigenDecomposition out;
  if (n == 0) return out;

  const ComplexMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("hermitian_eig: eigen solver did not converge");
  }
  // Solver output is ascending; a stable descending sort keeps ties in output order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::reverse(order.begin(), order.end());
  const RealVector& raw = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return raw(i) > raw(j); });

  out.vectors.resize(n, n);
  out.values.resize(n);
  const double clip = kPsdTolerance * std::max(1.0, raw.maxCoeff());
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    double v = raw(src);
    if (v < 0.0 && v >= -clip) v = 0.0;
    out.values(k) = v;
    out.vectors.col(k) = solver.eigenvectors().col(src);
  }
  return out;
}

namespace {

EigenDecomposition psd_eig(const ComplexMatrix& a, const char* what) {
  EigenDecomposition eig = hermitian_eig(a);
  if (eig.values.size() > 0 && eig.values.minCoeff() < 0.0) {
    throw InvalidInput(std::string(what) + ": matrix is indefinite (min eigenvalue " +
                       std::to_string(eig.values.minCoeff()) + ")");
  }
  return eig;
}

}  // namespace

HermitianMatrix hermitian_sqrt(const ComplexMatrix& a) {
  const EigenDecomposition eig = psd_eig(a, "hermitian_sqrt");
  const RealVector root = eig.values.cwiseSqrt();
  HermitianMatrix s = eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
  return 0.5 * (s + s.adjoint());
}

HermitianMatrix hermitian_inv_sqrt(const ComplexMatrix& a) {
  const EigenDecomposition eig = psd_eig(a, "hermitian_inv_sqrt");
  if (eig.values.size() > 0 && eig.values.minCoeff() <= 0.0) {
    throw InvalidInput("hermitian_inv_sqrt: matrix is singular");
  }
  const RealVector inv_root = eig.values.cwiseSqrt().cwiseInverse();
  HermitianMatrix s = eig.vectors * inv_root.asDiagonal() * eig.vectors.adjoint();
  return 0.5 * (s + s.adjoint());
}

ComplexMatrix hpd_solve(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw InvalidInput("hpd_solve: dimension mismatch");
  }
  const ComplexMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::LLT<ComplexMatrix> llt(sym);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  Eigen::LDLT<ComplexMatrix> ldlt(sym);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-300) {
    throw InvalidInput("hpd_solve: matrix is singular or not positive definite");
  }
  return ldlt.solve(b);
}

ComplexMatrix hpd_inverse(const ComplexMatrix& a) {
  ComplexMatrix inv = hpd_solve(a, ComplexMatrix::Identity(a.rows(), a.cols()));
  return 0.5 * (inv + inv.adjoint());
}

RealVector positive_part(const RealVector& x) { return x.cwiseMax(0.0); }

ComplexVector vec(const ComplexMatrix& a) {
  return Eigen::Map<const ComplexVector>(a.data(), a.size());
}

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw InvalidInput("unvec: length does not match shape");
  return Eigen::Map<const ComplexMatrix>(v.data(), rows, cols);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix block_diag(const std::vector<ComplexMatrix>& blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  ComplexMatrix out = ComplexMatrix::Zero(rows, cols);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

ComplexMatrix truncated_identity(Eigen::Index rows, Eigen::Index cols) {
  return ComplexMatrix::Identity(rows, cols);
}

double relative_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  const double diff = (a - b).norm();
  const double scale = b.norm();
  return scale > 0.0 ? diff / scale : diff;
}

bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a.data()[i].real()) || !std::isfinite(a.data()[i].imag())) return false;
  }
  return true;
}

}  // namespace afrelay
