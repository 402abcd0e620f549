#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <limits>
#include <sstream>

#include "afrelay/channel.hpp"
#include "afrelay/downlink.hpp"
#include "afrelay/sdp.hpp"
#include "afrelay/two_hop.hpp"
#include "oracles.hpp"

using namespace afrelay;

namespace {

LmiBlock scalar_block(double f0, std::vector<double> f) {
  LmiBlock b;
  b.constant = RealMatrix::Constant(1, 1, f0);
  for (double v : f) b.coefficients.push_back(RealMatrix::Constant(1, 1, v));
  return b;
}

// Duality is only meaningful between feasible points; infeasible-start
// iterates are checked once both residuals are small.
void check_history(const SdpSolution& s) {
  for (const auto& h : s.history) {
    if (h.primal_infeasibility <= 1e-9 && h.dual_infeasibility <= 1e-9) {
      CHECK(h.primal_objective >= h.dual_objective - 1e-9 * (1.0 + std::abs(h.primal_objective)));
    }
  }
}

SdpProblem random_qp(std::uint64_t seed, int m) {
  auto rng = oracle::stream(seed);
  const ComplexMatrix q0 = oracle::gaussian(rng, m + 1, m);
  const ComplexVector g = oracle::gaussian(rng, m, 1);
  const ComplexMatrix q1 = oracle::gaussian(rng, m, m);
  return quadratic_program_sdp(q0, g, {{ComplexMatrix::Identity(m, m), 0.5}, {q1, 2.0}});
}

}  // namespace

TEST_CASE("2x2 determinant condition") {
  SdpProblem p;
  p.objective = RealVector::Ones(1);
  LmiBlock b;
  b.constant = RealMatrix::Zero(2, 2);
  b.constant(0, 1) = b.constant(1, 0) = 1.0;
  b.coefficients = {RealMatrix::Identity(2, 2)};
  p.blocks.push_back(b);
  const SdpSolution s = solve_sdp(p);
  REQUIRE(s.status == SdpStatus::optimal);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.duality_gap <= 1e-7);
  check_history(s);
}

TEST_CASE("scalar bound through a diagonal block") {
  SdpProblem p;
  p.objective = RealVector::Ones(1);
  LmiBlock b;
  b.constant = -3.0 * RealMatrix::Identity(2, 2);
  b.coefficients = {RealMatrix::Identity(2, 2)};
  p.blocks.push_back(b);
  const SdpSolution s = solve_sdp(p, 1e-7, 100);
  REQUIRE(s.status == SdpStatus::optimal);
  CHECK(s.x(0) == doctest::Approx(3.0).epsilon(1e-6));
  for (double e : lmi_min_eigenvalues(p, s.x)) CHECK(e >= -1e-7);
}

TEST_CASE("contradictory bounds are reported infeasible") {
  SdpProblem p;
  p.objective = RealVector::Ones(1);
  p.blocks = {scalar_block(-1.0, {1.0}), scalar_block(0.0, {-1.0})};
  const SdpSolution s = solve_sdp(p);
  CHECK(s.status == SdpStatus::infeasible);
}

TEST_CASE("iteration cap gives numerical failure") {
  const SdpProblem p = random_qp(3, 4);
  SdpSettings st;
  st.max_iter = 1;
  CHECK(solve_sdp(p, st).status == SdpStatus::numerical_failure);
}

TEST_CASE("equality constraints") {
  // min x0 + 2 x1  s.t. x0 >= 0, x1 >= 0, x0 + x1 = 1
  SdpProblem p;
  p.objective = RealVector(2);
  p.objective << 1.0, 2.0;
  p.blocks = {scalar_block(0.0, {1.0, 0.0}), scalar_block(0.0, {0.0, 1.0})};
  p.equalities = {{RealVector::Ones(2), 1.0}};
  const SdpSolution s = solve_sdp(p);
  REQUIRE(s.status == SdpStatus::optimal);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(s.x(1)) < 1e-6);
}

TEST_CASE("optimal solutions are feasible with a closed gap") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SdpProblem p = random_qp(100 + seed, 3 + static_cast<int>(seed % 4));
    const SdpSolution s = solve_sdp(p);
    REQUIRE(s.status == SdpStatus::optimal);
    CHECK(s.duality_gap <= 1e-7);
    for (double e : lmi_min_eigenvalues(p, s.x)) CHECK(e >= -1e-7);
    check_history(s);
  }
}

TEST_CASE("objective scaling leaves the argmin unchanged") {
  // argmin accuracy tracks the stopping gap, so solve tighter than the default
  SdpSettings tight;
  tight.gap_tol = 2e-11;
  tight.feasibility_tol = 1e-10;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = oracle::stream(700 + seed);
    const int n = 4, d = 6;
    SdpProblem p;
    p.objective = RealVector(n);
    for (int i = 0; i < n; ++i) p.objective(i) = rng.standard_normal();
    LmiBlock b;
    b.constant = RealMatrix::Identity(d, d);
    for (int i = 0; i < n; ++i) {
      RealMatrix a(d, d);
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) a(r, c) = rng.standard_normal();
      }
      b.coefficients.push_back(0.5 * (a + a.transpose()));
    }
    p.blocks = {b};
    const SdpSolution s1 = solve_sdp(p, tight);
    p.objective *= 10.0;
    const SdpSolution s2 = solve_sdp(p, tight);
    REQUIRE(s1.status == SdpStatus::optimal);
    REQUIRE(s2.status == SdpStatus::optimal);
    CHECK((s1.x - s2.x).norm() <= 1e-6 * std::max(1.0, s1.x.norm()));
    CHECK(s2.primal_objective == doctest::Approx(10.0 * s1.primal_objective).epsilon(1e-8));
  }
}

TEST_CASE("QP optimum is not improved by feasible perturbations") {
  const int m = 4;
  auto rng = oracle::stream(301);
  const ComplexMatrix q0 = oracle::gaussian(rng, m + 1, m);
  const ComplexVector g = oracle::gaussian(rng, m, 1);
  const ComplexMatrix q1 = oracle::gaussian(rng, m, m);
  const SdpSolution s = solve_sdp(quadratic_program_sdp(q0, g, {{ComplexMatrix::Identity(m, m), 0.5}, {q1, 2.0}}));
  REQUIRE(s.status == SdpStatus::optimal);
  const ComplexVector v = complex_block(s.x, m);
  auto f = [&](const ComplexVector& w) { return (q0 * w).squaredNorm() - 2.0 * (g.transpose() * w)(0).real(); };
  CHECK(f(v) == doctest::Approx(s.x(0)).epsilon(1e-6));
  auto prng = oracle::stream(302);
  for (int i = 0; i < 2000; ++i) {
    const ComplexVector w = v + 1e-3 * prng.complex_gaussian(m, 1);
    if (w.squaredNorm() <= 0.5 && (q1 * w).squaredNorm() <= 2.0) CHECK(f(w) >= f(v) - 1e-7);
  }
}

TEST_CASE("schur block: |x|^2 <= t") {
  const ComplexMatrix one = ComplexMatrix::Ones(1, 1);
  AffineScalar rhs;
  rhs.coefficients = RealVector::Zero(3);
  rhs.coefficients(0) = 1.0;  // s(x) = t = x[0]
  const LmiBlock b = schur_lmi(one, 1, rhs);
  CHECK(b.dim() == 3);
  SdpProblem p;
  p.objective = RealVector::Zero(3);
  p.blocks = {b};
  auto min_eig = [&](double t, double re, double im) {
    RealVector x(3);
    x << t, re, im;
    return lmi_min_eigenvalues(p, x).front();
  };
  CHECK(min_eig(4.0, 2.0, 0.0) >= -1e-12);
  CHECK(min_eig(3.9, 2.0, 0.0) < 0.0);
  CHECK(min_eig(5.0, 2.0, 0.0) > 0.0);
}

TEST_CASE("schur block: zero factor reduces to s >= 0") {
  AffineScalar rhs;
  rhs.constant = -1.0;
  rhs.coefficients = RealVector::Zero(3);
  rhs.coefficients(0) = 1.0;
  const LmiBlock b = schur_lmi(ComplexMatrix::Zero(2, 1), 1, rhs);
  SdpProblem p;
  p.objective = RealVector::Zero(3);
  p.blocks = {b};
  for (double t : {0.5, 0.99, 1.01, 2.0}) {
    RealVector x(3);
    x << t, 7.0, -3.0;
    CHECK((lmi_min_eigenvalues(p, x).front() >= -1e-12) == (t >= 1.0));
  }
}

TEST_CASE("schur block agrees with direct quadratic evaluation") {
  auto rng = oracle::stream(401);
  const ComplexMatrix m = oracle::gaussian(rng, 3, 2);
  AffineScalar rhs;
  rhs.constant = 2.0;
  rhs.coefficients = RealVector::Zero(5);
  rhs.coefficients(0) = 0.5;
  SdpProblem p;
  p.objective = RealVector::Zero(5);
  p.blocks = {schur_lmi(m, 1, rhs)};
  int agree = 0;
  for (int i = 0; i < 100; ++i) {
    RealVector x(5);
    for (int k = 0; k < 5; ++k) x(k) = 2.0 * rng.standard_normal();
    ComplexVector v(2);
    v << Complex(x(1), x(3)), Complex(x(2), x(4));
    const double slack = 2.0 + 0.5 * x(0) - (m * v).squaredNorm();
    const double e = lmi_min_eigenvalues(p, x).front();
    if (std::abs(slack) < 1e-9) continue;
    agree += (e >= 0.0) == (slack >= 0.0);
  }
  CHECK(agree >= 99);
  CHECK_THROWS_AS(schur_lmi(m, 4, rhs), InvalidInput);
}

TEST_CASE("complex LMI realification") {
  auto rng = oracle::stream(402);
  const ComplexMatrix b = oracle::gaussian(rng, 3, 3);
  const ComplexMatrix a = b * b.adjoint();
  const RealMatrix r = realify(a);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(r);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  ComplexMatrix ind = a;
  ind(0, 0) -= 100.0;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es2(realify(ind));
  CHECK(es2.eigenvalues().minCoeff() < 0.0);

  const auto basis = hermitian_basis(3);
  CHECK(basis.size() == 9);
  RealVector x = RealVector::Zero(9);
  for (std::size_t k = 0; k < 9; ++k) x(static_cast<Eigen::Index>(k)) = (a.adjoint() * basis[k]).trace().real() /
                                                                         (basis[k].adjoint() * basis[k]).trace().real();
  CHECK(relative_distance(hermitian_from_params(x, 0, 3), a) < 1e-12);
}

TEST_CASE("precoder SDP pattern on a scalar system matches a grid search") {
  SystemDims dims;
  dims.n_base = dims.n_relay = 1;
  dims.users = {{1, 1}};
  auto rng = oracle::stream(501);
  ChannelSet ch;
  ch.first_hop = {oracle::gaussian(rng, 1, 1)};
  ch.second_hop = {oracle::gaussian(rng, 1, 1)};
  NoiseModel nm;
  nm.relay = 0.05 * ComplexMatrix::Identity(1, 1);
  nm.destination = {0.02 * ComplexMatrix::Identity(1, 1)};
  const ComplexMatrix w = 0.6 * oracle::gaussian(rng, 1, 1);
  const ComplexMatrix g = oracle::gaussian(rng, 1, 1);
  const double ps = 1.0, pr = 0.8;
  const PrecoderSdp sdp = build_precoder_sdp(w, {g}, ch, nm, dims, ps, pr);
  const SdpSolution s = solve_sdp(sdp.problem);
  REQUIRE(s.status == SdpStatus::optimal);
  const ComplexMatrix t = sdp.extract(s.x);

  auto mse = [&](double re, double im) {
    ComplexMatrix tt(1, 1);
    tt(0, 0) = Complex(re, im);
    const double relay = std::norm(w(0, 0)) * (std::norm(ch.first_hop[0](0, 0) * tt(0, 0)) + 0.05);
    if (std::norm(tt(0, 0)) > ps || relay > pr) return std::numeric_limits<double>::infinity();
    return oracle::chain_mse(g, w, tt, ch.first_hop[0], ch.second_hop[0], nm.relay, nm.destination[0]);
  };
  const double grid = oracle::grid_min_2d(mse, -1.0, 1.0, -1.0, 1.0, 1e-3);
  const double sdp_value = s.x(0) + sdp.constant;
  CHECK(std::abs(sdp_value - grid) <= 1e-4);
  CHECK(std::abs(mse(t(0, 0).real(), t(0, 0).imag()) - sdp_value) <= 1e-6);
}

TEST_CASE("text dump round trips") {
  const SdpProblem p = random_qp(601, 2);
  std::stringstream ss;
  write_sdp_text(ss, p);
  const SdpProblem q = read_sdp_text(ss);
  REQUIRE(q.blocks.size() == p.blocks.size());
  CHECK((q.objective - p.objective).norm() == 0.0);
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    CHECK((q.blocks[b].constant - p.blocks[b].constant).norm() == 0.0);
    for (std::size_t i = 0; i < p.blocks[b].coefficients.size(); ++i) {
      CHECK((q.blocks[b].coefficients[i] - p.blocks[b].coefficients[i]).norm() == 0.0);
    }
  }
  const SdpSolution a = solve_sdp(p);
  const SdpSolution b = solve_sdp(q);
  CHECK(a.primal_objective == b.primal_objective);
}

TEST_CASE("validation rejects inconsistent problems") {
  SdpProblem p;
  p.objective = RealVector::Ones(2);
  p.blocks = {scalar_block(0.0, {1.0})};
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  SdpProblem q;
  q.objective = RealVector::Ones(1);
  LmiBlock b;
  b.constant = RealMatrix::Zero(2, 2);
  b.constant(0, 1) = 1.0;
  b.coefficients = {RealMatrix::Identity(2, 2)};
  q.blocks = {b};
  CHECK_THROWS_AS(q.validate(), InvalidInput);
}
