#include "afrelay/two_hop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace afrelay {

HermitianMatrix relay_input_covariance(const ComplexMatrix& h1, const ComplexMatrix& precoder,
                                       const HermitianMatrix& relay_noise) {
  const ComplexMatrix hs = h1 * precoder;
  HermitianMatrix r = hs * hs.adjoint() + relay_noise;
  return 0.5 * (r + r.adjoint());
}

double chain_mse(const ComplexMatrix& equalizer, const ComplexMatrix& forwarding,
                 const ComplexMatrix& precoder, const ComplexMatrix& h1, const ComplexMatrix& h2,
                 const HermitianMatrix& relay_noise, const HermitianMatrix& destination_noise) {
  if (equalizer.cols() != h2.rows() || h2.cols() != forwarding.rows() || forwarding.cols() != h1.rows() ||
      h1.cols() != precoder.rows() || equalizer.rows() != precoder.cols()) {
    throw InvalidInput("chain_mse: dimension mismatch");
  }
  const HermitianMatrix r = relay_input_covariance(h1, precoder, relay_noise);
  const ComplexMatrix eh = equalizer * h2 * forwarding;  // L x N_R
  const ComplexMatrix signal = eh * h1 * precoder;        // L x L
  const double quad = real_trace(eh * r * eh.adjoint()) +
                      real_trace(equalizer * destination_noise * equalizer.adjoint());
  return quad - 2.0 * signal.trace().real() + static_cast<double>(precoder.cols());
}

ComplexMatrix lmmse_receiver(const ComplexMatrix& effective, const HermitianMatrix& covariance) {
  return hpd_solve(covariance, effective).adjoint();
}

// ---- relay KKT ------------------------------------------------------------------

RelayPowerMap::RelayPowerMap(const ComplexMatrix& gram, const ComplexMatrix& cross, const HermitianMatrix& cov) {
  if (gram.rows() != gram.cols() || cross.rows() != gram.rows() || cov.rows() != cross.cols() ||
      cov.cols() != cov.rows()) {
    throw InvalidInput("RelayPowerMap: dimension mismatch");
  }
  const EigenDecomposition eig = hermitian_eig(0.5 * (gram + gram.adjoint()));
  basis_ = eig.vectors;
  gains_ = eig.values.cwiseMax(0.0);
  const ComplexMatrix cross_cov_inv = hpd_solve(cov, cross.adjoint()).adjoint();  // Cross Cov^{-1}
  projected_ = basis_.adjoint() * cross_cov_inv;
  // Null modes of the Gram matrix carry no cross term in exact arithmetic; drop the roundoff.
  const double gmax = gains_.size() > 0 ? gains_.maxCoeff() : 0.0;
  const double pnorm = projected_.norm();
  for (Eigen::Index i = 0; i < gains_.size(); ++i) {
    if (gains_(i) <= 1e-12 * gmax && projected_.row(i).norm() <= 1e-8 * pnorm) {
      gains_(i) = 0.0;
      projected_.row(i).setZero();
    }
  }
  const ComplexMatrix k = projected_ * cov * projected_.adjoint();
  weights_ = k.diagonal().real().cwiseMax(0.0);
  const double n = static_cast<double>(gram.rows());
  lambda_floor_ = 1e-12 * gains_.sum() / n;
}

ComplexMatrix RelayPowerMap::forwarding(double lambda) const {
  if (lambda < 0.0) throw InvalidInput("RelayPowerMap: negative multiplier");
  const double scale = std::max(1.0, gains_.size() > 0 ? gains_.maxCoeff() : 1.0);
  RealVector inv(gains_.size());
  for (Eigen::Index i = 0; i < gains_.size(); ++i) {
    const double d = gains_(i) + lambda;
    if (d <= 1e-14 * scale) {
      if (projected_.row(i).norm() == 0.0) {
        inv(i) = 0.0;
        continue;
      }
      throw InvalidInput("RelayPowerMap: Gram + lambda I is singular at lambda = " + std::to_string(lambda));
    }
    inv(i) = 1.0 / d;
  }
  return basis_ * inv.asDiagonal() * projected_;
}

double RelayPowerMap::power(double lambda) const {
  double f = 0.0;
  for (Eigen::Index i = 0; i < gains_.size(); ++i) {
    if (weights_(i) == 0.0) continue;
    const double d = gains_(i) + lambda;
    if (d <= 0.0) return std::numeric_limits<double>::infinity();
    f += weights_(i) / (d * d);
  }
  return f;
}

double RelayPowerMap::lambda_bound(double budget) const { return std::sqrt(weights_.sum() / budget); }

RelayMultiplier solve_relay_multiplier(const RelayPowerMap& map, double budget, double rel_tol,
                                       int max_halvings) {
  if (!(budget > 0.0)) throw InvalidInput("solve_relay_multiplier: budget must be positive");
  RelayMultiplier out;
  out.bound = map.lambda_bound(budget);
  if (map.trivial()) {
    out.forwarding = map.forwarding(std::max(map.lambda_floor(), 1.0));
    out.forwarding.setZero();
    return out;
  }
  // lambda = 0 branch, regularized when the Gram matrix is singular.
  double start = 0.0;
  double f_start = map.power(0.0);
  if (!std::isfinite(f_start)) {
    start = map.lambda_floor();
    f_start = map.power(start);
  }
  if (f_start <= budget) {
    out.lambda = 0.0;
    out.forwarding = map.forwarding(start);
    out.power = f_start;
    return out;
  }
  double lo = start;
  double hi = out.bound;
  if (map.power(hi) > budget * (1.0 + 1e-12)) {
    throw NumericalFailure("solve_relay_multiplier: bracket failure, f(" + std::to_string(hi) +
                           ") = " + std::to_string(map.power(hi)) + " > budget " + std::to_string(budget));
  }
  int steps = 0;
  while (steps < max_halvings && budget - map.power(hi) > rel_tol * budget) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (map.power(mid) > budget) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++steps;
  }
  out.lambda = hi;
  out.active = true;
  out.bisection_steps = steps;
  out.forwarding = map.forwarding(hi);
  out.power = map.power(hi);
  return out;
}

// ---- water-filling ----------------------------------------------------------------

WaterFilling mse_water_filling(const RealVector& weights, const RealVector& gains, double budget) {
  if (weights.size() != gains.size()) throw InvalidInput("mse_water_filling: length mismatch");
  WaterFilling out;
  out.powers = RealVector::Zero(weights.size());
  if (weights.size() == 0 || !(budget > 0.0)) return out;
  const double w_max = weights.maxCoeff();
  const double g_max = gains.maxCoeff();
  if (!(w_max > 0.0) || !(g_max > 0.0)) return out;

  std::vector<Eigen::Index> modes;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) > 1e-12 * w_max && gains(i) > 1e-12 * g_max) modes.push_back(i);
  }
  // Mode i switches on once the water level 1/sqrt(mu) exceeds 1/sqrt(w_i g_i).
  std::stable_sort(modes.begin(), modes.end(), [&](Eigen::Index a, Eigen::Index b) {
    return weights(a) * gains(a) > weights(b) * gains(b);
  });
  double sum_a = 0.0;
  double sum_b = 0.0;
  double level = 0.0;
  std::size_t active = 0;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const Eigen::Index i = modes[k];
    sum_a += std::sqrt(weights(i) / gains(i));
    sum_b += 1.0 / gains(i);
    level = (budget + sum_b) / sum_a;
    active = k + 1;
    if (k + 1 == modes.size()) break;
    const Eigen::Index next = modes[k + 1];
    if (level <= 1.0 / std::sqrt(weights(next) * gains(next))) break;
  }
  for (std::size_t k = 0; k < active; ++k) {
    const Eigen::Index i = modes[k];
    out.powers(i) = std::max(0.0, level * std::sqrt(weights(i) / gains(i)) - 1.0 / gains(i));
  }
  out.mu = 1.0 / (level * level);
  out.active_modes = static_cast<int>(active);
  return out;
}

ComplexMatrix water_filling_precoder(const HermitianMatrix& gain, const RealVector& weights, double budget,
                                     int streams, double* mu) {
  if (streams > gain.rows()) throw InvalidInput("water_filling_precoder: more streams than modes");
  const EigenDecomposition eig = hermitian_eig(gain);
  RealVector w = RealVector::Zero(streams);
  const Eigen::Index nw = std::min<Eigen::Index>(streams, weights.size());
  w.head(nw) = weights.head(nw).cwiseMax(0.0);
  const RealVector g = eig.values.head(streams).cwiseMax(0.0);
  const WaterFilling wf = mse_water_filling(w, g, budget);
  if (mu != nullptr) *mu = wf.mu;
  return eig.vectors.leftCols(streams) * wf.powers.cwiseSqrt().asDiagonal();
}

ComplexMatrix point_to_point_precoder(const ComplexMatrix& h, const HermitianMatrix& noise, double budget,
                                      int streams) {
  const ComplexMatrix gain = h.adjoint() * hpd_solve(noise, h);
  return water_filling_precoder(0.5 * (gain + gain.adjoint()), RealVector::Ones(streams), budget, streams);
}

// ---- quadratic program as SDP --------------------------------------------------

SdpProblem quadratic_program_sdp(const ComplexMatrix& objective_factor, const ComplexVector& linear,
                                 const std::vector<QuadraticConstraint>& constraints) {
  const Eigen::Index m = objective_factor.cols();
  if (linear.size() != m) throw InvalidInput("quadratic_program_sdp: linear term length mismatch");
  const Eigen::Index n = 1 + 2 * m;
  SdpProblem p;
  p.objective = RealVector::Zero(n);
  p.objective(0) = 1.0;

  AffineScalar epigraph;
  epigraph.coefficients = RealVector::Zero(n);
  epigraph.coefficients(0) = 1.0;
  epigraph.coefficients.segment(1, m) = 2.0 * linear.real();
  epigraph.coefficients.segment(1 + m, m) = -2.0 * linear.imag();
  p.blocks.push_back(schur_lmi(objective_factor, 1, epigraph));

  for (const auto& con : constraints) {
    if (con.factor.cols() != m) throw InvalidInput("quadratic_program_sdp: constraint factor width mismatch");
    AffineScalar rhs;
    rhs.constant = con.bound;
    rhs.coefficients = RealVector::Zero(n);
    p.blocks.push_back(schur_lmi(con.factor, 1, rhs));
  }
  return p;
}

ComplexVector complex_block(const RealVector& x, Eigen::Index size) {
  if (x.size() < 1 + 2 * size) throw InvalidInput("complex_block: decision vector too short");
  ComplexVector v(size);
  for (Eigen::Index j = 0; j < size; ++j) v(j) = Complex(x(1 + j), x(1 + size + j));
  return v;
}

}  // namespace afrelay
