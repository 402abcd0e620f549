#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "afrelay/downlink.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace afrelay;

namespace {

double oracle_mse(const std::vector<ComplexMatrix>& g, const ComplexMatrix& w, const ComplexMatrix& t,
                  const Scenario& s) {
  return oracle::chain_mse(block_diag(g), w, t, s.channels.first_hop.front(), s.channels.stacked_user_channels(),
                           s.noise.relay, s.noise.stacked_destination());
}

double relay_power(const ComplexMatrix& w, const ComplexMatrix& t, const Scenario& s) {
  const ComplexMatrix& h = s.channels.first_hop.front();
  return (w * (h * t * t.adjoint() * h.adjoint() + s.noise.relay) * w.adjoint()).trace().real();
}

std::vector<ComplexMatrix> random_equalizers(afrelay::RandomStream& rng, const SystemDims& dims) {
  std::vector<ComplexMatrix> g;
  for (const auto& u : dims.users) g.push_back(oracle::gaussian(rng, u.streams, u.n_mobile));
  return g;
}

// max over (alpha, beta) >= 0 of the Lagrangian dual of the precoder problem
// min ||C T - I||^2 s.t. ||T||^2 <= ps, ||A T||^2 <= room, by nested golden section.
double precoder_dual(const ComplexMatrix& c, const ComplexMatrix& a, double ps, double room) {
  const Eigen::Index n = c.cols();
  auto lagrangian = [&](double alpha, double beta) {
    const ComplexMatrix k = c.adjoint() * c + alpha * ComplexMatrix::Identity(n, n) + beta * a.adjoint() * a;
    const ComplexMatrix t = oracle::inverse(k) * c.adjoint();
    return (c * t - ComplexMatrix::Identity(c.rows(), c.rows())).squaredNorm() +
           alpha * (t.squaredNorm() - ps) + beta * ((a * t).squaredNorm() - room);
  };
  auto inner = [&](double alpha) {
    const double beta = oracle::golden_section([&](double b) { return -lagrangian(alpha, b); }, 0.0, 100.0);
    return lagrangian(alpha, beta);
  };
  const double alpha = oracle::golden_section([&](double x) { return -inner(x); }, 0.0, 100.0);
  return inner(alpha);
}

}  // namespace

TEST_CASE("received covariance") {
  const Scenario s = fixture::standard(Direction::downlink, 0);
  CHECK(received_covariance(ComplexMatrix::Zero(4, 4), s.channels, s.noise) == s.noise.relay);

  const Scenario one = fixture::scalar(Direction::downlink, 1.0, 1.0, 1.0, 1.0);
  CHECK(received_covariance(ComplexMatrix::Ones(1, 1), one.channels, one.noise)(0, 0).real() ==
        doctest::Approx(2.0));

  auto rng = oracle::stream(20);
  const ComplexMatrix t = oracle::gaussian(rng, 4, 4);
  const HermitianMatrix r = received_covariance(t, s.channels, s.noise);
  CHECK(hermitian_defect(r) <= 1e-12);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(r);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> en(s.noise.relay);
  CHECK(es.eigenvalues().minCoeff() >= en.eigenvalues().minCoeff() - 1e-9);
}

TEST_CASE("sum MSE special cases") {
  const Scenario s = fixture::standard(Direction::downlink, 1);
  auto rng = oracle::stream(21);
  const ComplexMatrix w = oracle::gaussian(rng, 4, 4);
  const ComplexMatrix t = oracle::gaussian(rng, 4, 4);
  const std::vector<ComplexMatrix> zero{ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2)};
  CHECK(mse_downlink(zero, w, t, s.channels, s.noise) == doctest::Approx(4.0));

  const Complex h1(0.3, -1.1), h2(0.7, 0.4), wv(1.5, 0.2), tv(0.6, -0.8);
  const Scenario q = fixture::scalar(Direction::downlink, h1, h2, 0.0, 0.0);
  const std::vector<ComplexMatrix> g{ComplexMatrix::Constant(1, 1, 1.0 / (h2 * wv * h1 * tv))};
  CHECK(std::abs(mse_downlink(g, ComplexMatrix::Constant(1, 1, wv), ComplexMatrix::Constant(1, 1, tv), q.channels,
                              q.noise)) < 1e-14);
}

TEST_CASE("sum MSE matches the term-by-term oracle and a symbol simulation") {
  const Scenario s = fixture::standard(Direction::downlink, 2);
  auto rng = oracle::stream(22);
  const auto g = random_equalizers(rng, s.dims);
  const ComplexMatrix w = 0.5 * oracle::gaussian(rng, 4, 4);
  const ComplexMatrix t = 0.5 * oracle::gaussian(rng, 4, 4);
  const double analytic = mse_downlink(g, w, t, s.channels, s.noise);
  CHECK(analytic == doctest::Approx(oracle_mse(g, w, t, s)).epsilon(1e-12));

  // Gaussian symbols and noise, 10^5 vectors
  const int n = 100000;
  auto sim = oracle::stream(23);
  const ComplexMatrix sym = sim.complex_gaussian(4, n);
  const ComplexMatrix n1 = oracle::sqrtm(s.noise.relay) * sim.complex_gaussian(4, n);
  const ComplexMatrix n2 = oracle::sqrtm(s.noise.stacked_destination()) * sim.complex_gaussian(4, n);
  const ComplexMatrix y = s.channels.stacked_user_channels() * w * (s.channels.first_hop[0] * t * sym + n1) + n2;
  const double empirical = (block_diag(g) * y - sym).squaredNorm() / n;
  CHECK(std::abs(empirical - analytic) <= 0.01 * analytic);
}

TEST_CASE("equalizer closed form") {
  const Scenario q = fixture::scalar(Direction::downlink, 1.0, 1.0, 1.0, 1.0);
  const auto g = update_equalizers(ComplexMatrix::Ones(1, 1), ComplexMatrix::Ones(1, 1), q.channels, q.noise, q.dims);
  CHECK(g[0](0, 0).real() == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(g[0](0, 0).imag()) < 1e-15);

  const Scenario s = fixture::standard(Direction::downlink, 3);
  auto rng = oracle::stream(24);
  const ComplexMatrix t = oracle::gaussian(rng, 4, 4);
  const auto g0 = update_equalizers(ComplexMatrix::Zero(4, 4), t, s.channels, s.noise, s.dims);
  for (const auto& gk : g0) CHECK(gk.norm() == 0.0);
}

TEST_CASE("equalizer is a minimizer in G") {
  const Scenario s = fixture::standard(Direction::downlink, 4);
  auto rng = oracle::stream(25);
  const ComplexMatrix w = 0.5 * oracle::gaussian(rng, 4, 4);
  const ComplexMatrix t = 0.5 * oracle::gaussian(rng, 4, 4);
  const auto g = update_equalizers(w, t, s.channels, s.noise, s.dims);
  REQUIRE(g.size() == 2);
  CHECK(g[0].rows() == 2);
  CHECK(g[0].cols() == 2);
  const double best = oracle_mse(g, w, t, s);
  for (int i = 0; i < 100; ++i) {
    auto d = random_equalizers(rng, s.dims);
    double norm = 0.0;
    for (const auto& dk : d) norm += dk.squaredNorm();
    for (auto& dk : d) dk *= 1e-3 / std::sqrt(norm);
    std::vector<ComplexMatrix> gp = g;
    for (std::size_t k = 0; k < gp.size(); ++k) gp[k] += d[k];
    CHECK(oracle_mse(gp, w, t, s) >= best);
  }
  // stationarity: central differences along random block-diagonal directions
  const double scale = std::max(1.0, best);
  for (int i = 0; i < 20; ++i) {
    const auto d = random_equalizers(rng, s.dims);
    const ComplexMatrix dir = block_diag(d) / block_diag(d).norm();
    auto f = [&](const ComplexMatrix& x) {
      return oracle::chain_mse(x, w, t, s.channels.first_hop[0], s.channels.stacked_user_channels(), s.noise.relay,
                               s.noise.stacked_destination());
    };
    CHECK(std::abs(oracle::directional_derivative(f, block_diag(g), dir)) <= 1e-6 * scale);
  }
}

TEST_CASE("relay map: power function") {
  const Scenario s = fixture::standard(Direction::downlink, 5);
  auto rng = oracle::stream(26);
  const ComplexMatrix t = 0.5 * oracle::gaussian(rng, 4, 4);
  const std::vector<ComplexMatrix> zero{ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2)};
  const RelayEvaluation z = relay_mse_power(0.3, zero, t, s.channels, s.noise);
  CHECK(z.forwarding.norm() == 0.0);
  CHECK(z.power == 0.0);

  const auto g = random_equalizers(rng, s.dims);
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) {
    const double lambda = 0.01 * std::pow(2.0, i);
    const RelayEvaluation e = relay_mse_power(lambda, g, t, s.channels, s.noise);
    CHECK(e.power < prev);
    CHECK(e.power == doctest::Approx(relay_power(e.forwarding, t, s)).epsilon(1e-12));
    prev = e.power;
  }
}

TEST_CASE("relay map: scalar closed form") {
  const Complex h1(0.8, -0.3), h2(-0.4, 1.2), gv(0.9, 0.1), tv(0.7, 0.5);
  const double ne = 0.2;
  const Scenario q = fixture::scalar(Direction::downlink, h1, h2, ne, 0.1);
  for (double lambda : {0.05, 0.5, 3.0}) {
    const RelayEvaluation e = relay_mse_power(lambda, {ComplexMatrix::Constant(1, 1, gv)},
                                              ComplexMatrix::Constant(1, 1, tv), q.channels, q.noise);
    const double r = std::norm(h1 * tv) + ne;
    const Complex w = std::conj(gv * h2) * std::conj(h1 * tv) / ((std::norm(gv * h2) + lambda) * r);
    CHECK(std::abs(e.forwarding(0, 0) - w) <= 1e-10 * std::abs(w));
    CHECK(std::abs(e.power - std::norm(w) * r) <= 1e-10 * e.power);
  }
}

TEST_CASE("relay multiplier") {
  const Scenario s = fixture::standard(Direction::downlink, 6);
  auto rng = oracle::stream(27);
  const ComplexMatrix t = 0.5 * oracle::gaussian(rng, 4, 4);
  const auto g = random_equalizers(rng, s.dims);

  const RelayMultiplier big = solve_relay_multiplier(g, t, s.channels, s.noise, 1e9);
  CHECK(big.lambda == 0.0);
  CHECK_FALSE(big.active);

  const std::vector<ComplexMatrix> zero{ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2)};
  const RelayMultiplier none = solve_relay_multiplier(zero, t, s.channels, s.noise, 1.0);
  CHECK(none.lambda == 0.0);
  CHECK(none.forwarding.norm() == 0.0);

  for (double pr : {1e-4, 1e-2, 1.0}) {
    const RelayMultiplier m = solve_relay_multiplier(g, t, s.channels, s.noise, pr);
    REQUIRE(m.active);
    const ComplexMatrix& h = s.channels.first_hop[0];
    const ComplexMatrix rr = h * t * t.adjoint() * h.adjoint() + s.noise.relay;
    const ComplexMatrix e = (h * t * block_diag(g) * s.channels.stacked_user_channels()).adjoint();
    const double bound = std::sqrt((e * oracle::inverse(rr) * e.adjoint()).trace().real() / pr);
    CHECK(m.lambda > 0.0);
    CHECK(m.lambda <= bound);
    const double p = relay_power(m.forwarding, t, s);
    CHECK(std::abs(p - pr) <= 1e-8 * pr);
    CHECK(p <= pr * (1.0 + 1e-12));
    CHECK(std::abs(m.lambda * (p - pr)) <= 1e-6 * pr);
  }
}

TEST_CASE("precoder SDP: zero relay and equalizers") {
  const Scenario s = fixture::standard(Direction::downlink, 7);
  const std::vector<ComplexMatrix> zero{ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2)};
  const PrecoderSdp p = build_precoder_sdp(ComplexMatrix::Zero(4, 4), zero, s.channels, s.noise, s.dims, 1.0, 1.0);
  const SdpSolution sol = solve_sdp(p.problem);
  REQUIRE(sol.status == SdpStatus::optimal);
  CHECK(std::abs(sol.x(0)) < 1e-6);
  CHECK(p.extract(sol.x).norm() < 1e-4);
}

TEST_CASE("precoder SDP: scalar golden-section oracle") {
  for (std::uint64_t i = 0; i < 10; ++i) {
    auto rng = oracle::stream(28, i);
    const Complex h1 = rng.complex_normal(), h2 = rng.complex_normal();
    const double pr = 0.3 + rng.uniform();
    const Scenario q = fixture::scalar(Direction::downlink, h1, h2, 0.05, 0.02, 1.0, pr);
    const Complex wv = 0.8 * rng.complex_normal(), gv = rng.complex_normal();
    if (std::norm(wv) * 0.05 >= pr) continue;
    const ComplexMatrix w = ComplexMatrix::Constant(1, 1, wv);
    const std::vector<ComplexMatrix> g{ComplexMatrix::Constant(1, 1, gv)};
    const PrecoderSdp p = build_precoder_sdp(w, g, q.channels, q.noise, q.dims, 1.0, pr);
    const SdpSolution sol = solve_sdp(p.problem);
    REQUIRE(sol.status == SdpStatus::optimal);

    // Optimal phase aligns a t with the positive real axis; search the magnitude.
    const Complex a = gv * h2 * wv * h1;
    const double tmax = std::min(1.0, std::sqrt((pr / std::norm(wv) - 0.05) / std::norm(h1)));
    auto mse = [&](double m) {
      const ComplexMatrix t = ComplexMatrix::Constant(1, 1, m * std::conj(a) / std::abs(a));
      return oracle_mse(g, w, t, q);
    };
    const double m = oracle::golden_section(mse, 0.0, tmax);
    CHECK(std::abs(sol.x(0) + p.constant - mse(m)) <= 1e-5);
    const ComplexMatrix t = p.extract(sol.x);
    CHECK(std::norm(t(0, 0)) <= 1.0 + 1e-6);
    CHECK(relay_power(w, t, q) <= pr + 1e-6);
  }
}

TEST_CASE("precoder SDP: dual oracle on 3x3 instances") {
  SystemDims dims;
  dims.n_base = dims.n_relay = 3;
  dims.users = {{3, 3}};
  for (std::uint64_t i = 0; i < 5; ++i) {
    const Scenario s = fixture::with_dims(dims, 30, i, 20.0, 20.0);
    auto rng = oracle::stream(29, i);
    const ComplexMatrix w = 0.4 * oracle::gaussian(rng, 3, 3);
    const std::vector<ComplexMatrix> g{oracle::gaussian(rng, 3, 3)};
    const double pr = 0.5;
    const double room = pr - (w * s.noise.relay * w.adjoint()).trace().real();
    REQUIRE(room > 0.0);
    const PrecoderSdp p = build_precoder_sdp(w, g, s.channels, s.noise, s.dims, 1.0, pr);
    const SdpSolution sol = solve_sdp(p.problem);
    REQUIRE(sol.status == SdpStatus::optimal);
    const ComplexMatrix t = p.extract(sol.x);
    CHECK(t.squaredNorm() <= 1.0 + 1e-6);
    CHECK(relay_power(w, t, s) <= pr + 1e-6);

    const ComplexMatrix c = g[0] * s.channels.second_hop[0] * w * s.channels.first_hop[0];
    const ComplexMatrix a = w * s.channels.first_hop[0];
    const double noise_terms = oracle_mse(g, w, ComplexMatrix::Zero(3, 3), s) - 3.0;
    const double dual = precoder_dual(c, a, 1.0, room) + noise_terms;
    const double primal = oracle_mse(g, w, t, s);
    CHECK(std::abs(primal - dual) <= 1e-4);
    CHECK(std::abs(sol.x(0) + p.constant - primal) <= 1e-6);
  }
}

TEST_CASE("identity initialization saturates both budgets") {
  const Scenario s = fixture::standard(Direction::downlink, 8);
  const DownlinkDesign d = identity_init(s);
  CHECK(d.precoder.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(relay_power(d.forwarding, d.precoder, s) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("separate LMMSE initialization") {
  int better = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const Scenario s = fixture::standard(Direction::downlink, i);
    const DownlinkDesign sep = separate_lmmse_init(s);
    const DownlinkDesign id = identity_init(s);
    CHECK(sep.precoder.squaredNorm() <= 1.0 + 1e-6);
    CHECK(relay_power(sep.forwarding, sep.precoder, s) <= 1.0 + 1e-6);
    better += oracle_mse(sep.equalizers, sep.forwarding, sep.precoder, s) <=
              oracle_mse(id.equalizers, id.forwarding, id.precoder, s);
  }
  CHECK(better >= 80);
}

TEST_CASE("separate LMMSE initialization: scalar case uses the full source budget") {
  const Scenario q = fixture::scalar(Direction::downlink, Complex(0.5, 0.5), Complex(1.0, -0.2), 0.1, 0.1, 2.0, 1.0);
  const DownlinkDesign d = separate_lmmse_init(q);
  CHECK(std::norm(d.precoder(0, 0)) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(relay_power(d.forwarding, d.precoder, q) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("separate LMMSE initialization: low-noise precoder spans the top first-hop modes") {
  SystemDims dims;
  dims.users = {{2, 2}};
  const Scenario s = fixture::with_dims(dims, 31, 0, 120.0, 120.0);
  const DownlinkDesign d = separate_lmmse_init(s);
  Eigen::JacobiSVD<ComplexMatrix> svd(s.channels.first_hop[0], Eigen::ComputeFullV);
  const ComplexMatrix tail = svd.matrixV().rightCols(2);
  CHECK((tail.adjoint() * d.precoder).norm() <= 1e-8 * d.precoder.norm());
  Eigen::JacobiSVD<ComplexMatrix> ts(d.precoder);
  CHECK(ts.singularValues()(1) > 0.1 * ts.singularValues()(0));
}

TEST_CASE("Algorithm 1: zero iterations returns the start") {
  const Scenario s = fixture::standard(Direction::downlink, 9);
  DownlinkOptions o;
  o.max_iter = 0;
  const DownlinkResult r = run_algorithm1(s, o);
  const DownlinkDesign id = identity_init(s);
  CHECK(r.design.precoder == id.precoder);
  CHECK(r.design.forwarding == id.forwarding);
  CHECK_FALSE(r.trace.converged);
  CHECK(r.trace.iterations == 0);
  CHECK(r.trace.mse.size() == 1);
}

TEST_CASE("Algorithm 1: monotone, feasible, block-diagonal equalizer") {
  for (std::uint64_t i = 0; i < 5; ++i) {
    for (auto init : {DownlinkInit::identity, DownlinkInit::separate_lmmse}) {
      const Scenario s = fixture::standard(Direction::downlink, 100 + i);
      DownlinkOptions o;
      o.init = init;
      const DownlinkResult r = run_algorithm1(s, o);
      for (std::size_t k = 1; k < r.trace.mse.size(); ++k) {
        CHECK(r.trace.mse[k] <= r.trace.mse[k - 1] + 1e-9 * (1.0 + r.trace.mse[k - 1]));
      }
      CHECK(r.trace.note.empty());
      CHECK(r.trace.mse.back() == doctest::Approx(mse_downlink(r.design, s)).epsilon(1e-12));
      CHECK(r.design.precoder.squaredNorm() <= 1.0 + 1e-6);
      CHECK(relay_power(r.design.forwarding, r.design.precoder, s) <= 1.0 + 1e-6);
      REQUIRE(r.design.equalizers.size() == 2);
      CHECK(r.design.stacked_equalizer().block(0, 2, 2, 2).norm() == 0.0);
      CHECK(r.trace.converged == (r.trace.iterations < o.max_iter ||
                                  std::abs(r.trace.mse[r.trace.mse.size() - 2] - r.trace.mse.back()) <= o.threshold));
    }
  }
}

TEST_CASE("Algorithm 1: solver failure keeps the best design and a note") {
  const Scenario s = fixture::standard(Direction::downlink, 10);
  DownlinkOptions o;
  o.sdp.max_iter = 1;
  const DownlinkResult r = run_algorithm1(s, o);
  CHECK_FALSE(r.trace.converged);
  CHECK_FALSE(r.trace.note.empty());
  CHECK(r.trace.mse.back() <= r.trace.mse.front());
  CHECK(r.trace.mse.back() == doctest::Approx(mse_downlink(r.design, s)).epsilon(1e-12));
}

TEST_CASE("Algorithm 1: fixed precoder variant leaves T untouched") {
  const Scenario s = fixture::standard(Direction::downlink, 11);
  DownlinkOptions o;
  o.optimize_precoder = false;
  const DownlinkResult r = run_algorithm1(s, o);
  CHECK(r.design.precoder == identity_init(s).precoder);
}

TEST_CASE("input validation") {
  const Scenario s = fixture::standard(Direction::downlink, 12);
  DownlinkOptions o;
  o.threshold = 0.0;
  CHECK_THROWS_AS(run_algorithm1(s, o), InvalidInput);
}
