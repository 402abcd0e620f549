#pragma once

#include <vector>

#include "afrelay/linalg.hpp"
#include "afrelay/sdp.hpp"

// Building blocks shared by the downlink and uplink designers. Both directions
// are the same linear chain
//
//   s --precoder--> H1 --(+ n1)--> relay W --> H2 --(+ n2)--> equalizer --> s_hat
//
// with a block-diagonal equalizer in the downlink and a block-diagonal
// precoder in the uplink.

namespace afrelay {

/// H1 S S^H H1^H + R1: covariance of the relay input.
HermitianMatrix relay_input_covariance(const ComplexMatrix& h1, const ComplexMatrix& precoder,
                                       const HermitianMatrix& relay_noise);

/// Sum MSE E||E y - s||^2 of the chain for unit-covariance symbols.
double chain_mse(const ComplexMatrix& equalizer, const ComplexMatrix& forwarding,
                 const ComplexMatrix& precoder, const ComplexMatrix& h1, const ComplexMatrix& h2,
                 const HermitianMatrix& relay_noise, const HermitianMatrix& destination_noise);

/// Wiener receiver A^H C^{-1} for effective channel A and received covariance C.
ComplexMatrix lmmse_receiver(const ComplexMatrix& effective, const HermitianMatrix& covariance);

/// Relay matrix as a function of the KKT multiplier,
///   W(lambda) = (Gram + lambda I)^{-1} Cross Cov^{-1},
/// and its transmit power f(lambda) = Tr(W Cov W^H), which is non-increasing.
class RelayPowerMap {
 public:
  /// gram: N_R x N_R PSD, cross: N_R x N_in, cov: N_in x N_in positive definite.
  RelayPowerMap(const ComplexMatrix& gram, const ComplexMatrix& cross, const HermitianMatrix& cov);

  ComplexMatrix forwarding(double lambda) const;
  double power(double lambda) const;
  /// sqrt(Tr(Cross Cov^{-1} Cross^H) / budget): f(bound) <= budget.
  double lambda_bound(double budget) const;
  /// Regularizer used in place of lambda = 0 when Gram is singular.
  double lambda_floor() const { return lambda_floor_; }
  bool trivial() const { return weights_.maxCoeff() <= 0.0; }

 private:
  ComplexMatrix basis_;   // eigenvectors of Gram
  RealVector gains_;      // eigenvalues of Gram (descending)
  RealVector weights_;    // diag(U^H Cross Cov^{-1} Cross^H U)
  ComplexMatrix projected_;  // U^H Cross Cov^{-1}
  double lambda_floor_ = 0.0;
};

struct RelayMultiplier {
  double lambda = 0.0;
  ComplexMatrix forwarding;
  double power = 0.0;
  double bound = 0.0;
  int bisection_steps = 0;
  bool active = false;
};

/// lambda = 0 when f(0) <= budget, otherwise the bisection root of
/// f(lambda) = budget on [0, bound] approached from the feasible side with
/// relative residual tolerance `rel_tol`.
RelayMultiplier solve_relay_multiplier(const RelayPowerMap& map, double budget, double rel_tol = 1e-10,
                                       int max_halvings = 200);

/// Solution of  min sum_i w_i / (1 + p_i g_i)  s.t.  sum_i p_i = budget, p_i >= 0:
///   p_i = ( sqrt(w_i / (mu g_i)) - 1 / g_i )^+.
/// Modes with w_i <= 1e-12 w_max or g_i <= 1e-12 g_max receive no power.
struct WaterFilling {
  RealVector powers;
  double mu = 0.0;
  int active_modes = 0;
};
WaterFilling mse_water_filling(const RealVector& weights, const RealVector& gains, double budget);

/// Convex quadratic program over a complex vector v:
///   minimize ||Q_0 v||^2 - 2 Re(g^T v)  s.t.  ||Q_l v||^2 <= b_l.
/// Realified into the epigraph SDP over x = (t, Re v, Im v) with one
/// Schur-complement block per quadratic.
struct QuadraticConstraint {
  ComplexMatrix factor;
  double bound = 0.0;
};
SdpProblem quadratic_program_sdp(const ComplexMatrix& objective_factor, const ComplexVector& linear,
                                 const std::vector<QuadraticConstraint>& constraints);
/// Reads v back out of x = (t, Re v, Im v).
ComplexVector complex_block(const RealVector& x, Eigen::Index size);

/// U_L diag(sqrt(p)) for the eigen-aligned water-filling precoder over the
/// channel Gram matrix `gain` (N x N) with mode weights `weights` (descending).
ComplexMatrix water_filling_precoder(const HermitianMatrix& gain, const RealVector& weights, double budget,
                                     int streams, double* mu = nullptr);

/// Point-to-point LMMSE precoder for y = H x + n with unit mode weights.
ComplexMatrix point_to_point_precoder(const ComplexMatrix& h, const HermitianMatrix& noise, double budget,
                                      int streams);

}  // namespace afrelay
