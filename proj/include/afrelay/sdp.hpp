#pragma once

#include <iosfwd>
#include <vector>

#include "afrelay/linalg.hpp"

namespace afrelay {

/// Affine matrix inequality F_0 + sum_i x_i F_i >= 0 over real symmetric
/// matrices. `coefficients` has one entry per decision variable.
struct LmiBlock {
  RealMatrix constant;
  std::vector<RealMatrix> coefficients;

  Eigen::Index dim() const { return constant.rows(); }
};

/// a . x == b
struct LinearEquality {
  RealVector a;
  double b = 0.0;
};

/// Dense LMI-form semidefinite program:
///   minimize c . x  subject to  every block's F_0 + sum_i x_i F_i >= 0
///   and every equality a . x == b.
/// Complex decision variables are realified by the caller.
struct SdpProblem {
  RealVector objective;
  std::vector<LmiBlock> blocks;
  std::vector<LinearEquality> equalities;

  Eigen::Index num_variables() const { return objective.size(); }
  /// Throws InvalidInput on inconsistent sizes or non-symmetric matrices.
  void validate() const;
};

enum class SdpStatus { optimal, infeasible, numerical_failure };

const char* to_string(SdpStatus status);

struct SdpIterate {
  int iteration = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double complementarity = 0.0;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::numerical_failure;
  RealVector x;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// |primal - dual| / (1 + |primal|) at the returned iterate.
  double duality_gap = 0.0;
  int iterations = 0;
  std::vector<RealMatrix> dual_blocks;
  std::vector<SdpIterate> history;
};

struct SdpSettings {
  double gap_tol = 1e-7;
  int max_iter = 100;
  /// Relative primal and dual residual tolerance.
  double feasibility_tol = 1e-9;
  /// Dual residual accepted for the best gap-closed, primal-feasible iterate
  /// when the method stalls before reaching feasibility_tol.
  double stall_dual_tol = 1e-6;
  /// Fraction-to-boundary factor applied to the maximal step.
  double step_fraction = 0.98;
};

/// Infeasible-start primal-dual interior-point method with the HKM search
/// direction and a Mehrotra predictor-corrector.
SdpSolution solve_sdp(const SdpProblem& problem, const SdpSettings& settings = {});
SdpSolution solve_sdp(const SdpProblem& problem, double gap_tol, int max_iter);

/// Smallest eigenvalue of each block's F_0 + sum_i x_i F_i.
std::vector<double> lmi_min_eigenvalues(const SdpProblem& problem, const RealVector& x);

/// Real affine scalar constant + coefficients . x
struct AffineScalar {
  double constant = 0.0;
  RealVector coefficients;
};

/// Realified Schur-complement block for ||M v||^2 <= s(x):
///   [[ I, M v ], [ (M v)^H, s(x) ]] >= 0.
/// The complex vector v occupies the decision vector as real parts at
/// x[offset, offset + m) followed by imaginary parts at x[offset + m, offset + 2m),
/// where m = quad_factor.cols(). The block is real symmetric of size 2r + 1 with
/// r = quad_factor.rows().
LmiBlock schur_lmi(const ComplexMatrix& quad_factor, Eigen::Index offset, const AffineScalar& rhs);

/// [[Re A, -Im A], [Im A, Re A]]: PSD iff the Hermitian A is PSD.
RealMatrix realify(const ComplexMatrix& a);

/// Realified block for the complex LMI C_0 + sum_i x_i C_i >= 0.
LmiBlock complex_lmi(const ComplexMatrix& constant, const std::vector<ComplexMatrix>& coefficients);

/// Real parameterization of a d x d Hermitian matrix: d diagonal entries, then
/// (Re, Im) of each strictly-upper entry in row-major order. Returns the d*d
/// basis matrices E_k such that X = sum_k p_k E_k.
std::vector<ComplexMatrix> hermitian_basis(Eigen::Index d);
ComplexMatrix hermitian_from_params(const RealVector& x, Eigen::Index offset, Eigen::Index d);

/// Plain-text sparse dump for cross-checking with external solvers.
///
///   afrelay-sdp 1
///   variables <n>
///   blocks <N> <d_1> ... <d_N>
///   equalities <p>
///   objective <c_1> ... <c_n>
///   <matrix> <block> <i> <j> <value>      one line per upper-triangle nonzero
///   eq <k> <a_1> ... <a_n> <b>            one line per equality
///
/// `matrix` 0 is F_0, `matrix` i is the coefficient of x_i; block, i, j are 1-based.
void write_sdp_text(std::ostream& out, const SdpProblem& problem);
SdpProblem read_sdp_text(std::istream& in);

}  // namespace afrelay
