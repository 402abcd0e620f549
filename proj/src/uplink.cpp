#include "afrelay/uplink.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace afrelay {

namespace {

void require_uplink(const ChannelSet& channels) {
  if (channels.direction != Direction::uplink || channels.second_hop.size() != 1) {
    throw InvalidInput("uplink design needs an uplink channel set");
  }
}

const ComplexMatrix& relay_to_base(const ChannelSet& channels) {
  require_uplink(channels);
  return channels.second_hop.front();
}

const HermitianMatrix& base_noise(const NoiseModel& noise) {
  if (noise.destination.size() != 1) throw InvalidInput("uplink noise model needs one base-station covariance");
  return noise.destination.front();
}

Eigen::Index total_streams(const std::vector<ComplexMatrix>& precoders) {
  Eigen::Index l = 0;
  for (const auto& p : precoders) l += p.cols();
  return l;
}

// R_n^{-1/2} H_MR P
ComplexMatrix whitened_first_hop(const std::vector<ComplexMatrix>& precoders, const ChannelSet& channels,
                                 const NoiseModel& noise) {
  require_uplink(channels);
  return hermitian_inv_sqrt(noise.relay) * channels.stacked_user_channels() * block_diag(precoders);
}

HermitianMatrix hermitian_part(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

// Projects onto the PSD cone and scales into the trace budget.
HermitianMatrix clean_covariance(const HermitianMatrix& q, double budget) {
  const EigenDecomposition eig = hermitian_eig(hermitian_part(q));
  const RealVector lam = eig.values.cwiseMax(0.0);
  HermitianMatrix out = eig.vectors * lam.asDiagonal() * eig.vectors.adjoint();
  const double tr = lam.sum();
  if (tr > budget) out *= budget / tr;
  return hermitian_part(out);
}

std::vector<ComplexMatrix> enforce_user_budgets(std::vector<ComplexMatrix> p, const std::vector<double>& budgets) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double tr = p[k].squaredNorm();
    if (tr > budgets[k]) p[k] *= std::sqrt(budgets[k] / tr);
  }
  return p;
}

}  // namespace

HermitianMatrix relay_received_covariance(const std::vector<ComplexMatrix>& precoders, const ChannelSet& channels,
                                          const NoiseModel& noise) {
  require_uplink(channels);
  return relay_input_covariance(channels.stacked_user_channels(), block_diag(precoders), noise.relay);
}

double uplink_relay_power(const ComplexMatrix& forwarding, const std::vector<ComplexMatrix>& precoders,
                          const ChannelSet& channels, const NoiseModel& noise) {
  return real_trace(forwarding * relay_received_covariance(precoders, channels, noise) * forwarding.adjoint());
}

double mse_uplink(const ComplexMatrix& equalizer, const ComplexMatrix& forwarding,
                  const std::vector<ComplexMatrix>& precoders, const ChannelSet& channels, const NoiseModel& noise) {
  return chain_mse(equalizer, forwarding, block_diag(precoders), channels.stacked_user_channels(),
                   relay_to_base(channels), noise.relay, base_noise(noise));
}

double mse_uplink(const UplinkDesign& design, const Scenario& scenario) {
  return mse_uplink(design.equalizer, design.forwarding, design.precoders, scenario.channels, scenario.noise);
}

ComplexMatrix equalizer_b(const ComplexMatrix& forwarding, const std::vector<ComplexMatrix>& precoders,
                          const ChannelSet& channels, const NoiseModel& noise) {
  const ComplexMatrix& h_rb = relay_to_base(channels);
  const ComplexMatrix hf = h_rb * forwarding;
  const ComplexMatrix effective = hf * channels.stacked_user_channels() * block_diag(precoders);
  const HermitianMatrix cov =
      hermitian_part(hf * relay_received_covariance(precoders, channels, noise) * hf.adjoint() + base_noise(noise));
  return lmmse_receiver(effective, cov);
}

HermitianMatrix xi_matrix(const std::vector<ComplexMatrix>& precoders, const ChannelSet& channels,
                          const NoiseModel& noise) {
  const ComplexMatrix g = whitened_first_hop(precoders, channels, noise);
  return hermitian_part(g * g.adjoint()) + ComplexMatrix::Identity(g.rows(), g.rows());
}

HermitianMatrix m_matrix(const ChannelSet& channels, const NoiseModel& noise) {
  const ComplexMatrix& h_rb = relay_to_base(channels);
  return hermitian_part(h_rb.adjoint() * hpd_solve(base_noise(noise), h_rb));
}

HermitianMatrix theta_matrix(const std::vector<ComplexMatrix>& precoders, const ChannelSet& channels,
                             const NoiseModel& noise) {
  const ComplexMatrix g = whitened_first_hop(precoders, channels, noise);
  const ComplexMatrix y = hermitian_inv_sqrt(xi_matrix(precoders, channels, noise)) * g;
  return hermitian_part(y * y.adjoint());
}

HermitianMatrix pi_matrix(const ComplexMatrix& f_tilde, const ChannelSet& channels, const NoiseModel& noise) {
  const ComplexMatrix c = relay_to_base(channels) * f_tilde;
  const HermitianMatrix cov = hermitian_part(c * c.adjoint() + base_noise(noise));
  return hermitian_part(c.adjoint() * hpd_solve(cov, c));
}

ComplexMatrix forwarding_from_tilde(const ComplexMatrix& f_tilde, const std::vector<ComplexMatrix>& precoders,
                                    const ChannelSet& channels, const NoiseModel& noise) {
  return f_tilde * hermitian_inv_sqrt(xi_matrix(precoders, channels, noise)) * hermitian_inv_sqrt(noise.relay);
}

ComplexMatrix tilde_from_forwarding(const ComplexMatrix& forwarding, const std::vector<ComplexMatrix>& precoders,
                                    const ChannelSet& channels, const NoiseModel& noise) {
  return forwarding * hermitian_sqrt(noise.relay) * hermitian_sqrt(xi_matrix(precoders, channels, noise));
}

double mse_uplink_optimal_b(const ComplexMatrix& forwarding, const std::vector<ComplexMatrix>& precoders,
                            const ChannelSet& channels, const NoiseModel& noise) {
  const ComplexMatrix hf = relay_to_base(channels) * forwarding;
  const ComplexMatrix a = hf * channels.stacked_user_channels() * block_diag(precoders);
  const HermitianMatrix c =
      hermitian_part(hf * relay_received_covariance(precoders, channels, noise) * hf.adjoint() + base_noise(noise));
  return static_cast<double>(a.cols()) - real_trace(a.adjoint() * hpd_solve(c, a));
}

double mse_uplink_tilde(const ComplexMatrix& f_tilde, const std::vector<ComplexMatrix>& precoders,
                        const ChannelSet& channels, const NoiseModel& noise) {
  const ComplexMatrix c = relay_to_base(channels) * f_tilde;
  const ComplexMatrix y =
      hermitian_inv_sqrt(xi_matrix(precoders, channels, noise)) * whitened_first_hop(precoders, channels, noise);
  const ComplexMatrix a = c * y;
  const HermitianMatrix cov = hermitian_part(c * c.adjoint() + base_noise(noise));
  return static_cast<double>(y.cols()) - real_trace(a.adjoint() * hpd_solve(cov, a));
}

double mse_uplink_inversion(const ComplexMatrix& f_tilde, const std::vector<ComplexMatrix>& precoders,
                            const ChannelSet& channels, const NoiseModel& noise) {
  const HermitianMatrix theta = theta_matrix(precoders, channels, noise);
  const Eigen::Index nr = f_tilde.cols();
  const HermitianMatrix inner =
      hermitian_part(f_tilde.adjoint() * m_matrix(channels, noise) * f_tilde) + ComplexMatrix::Identity(nr, nr);
  const ComplexMatrix g = whitened_first_hop(precoders, channels, noise);
  const HermitianMatrix second = hermitian_part(g.adjoint() * g) + ComplexMatrix::Identity(g.cols(), g.cols());
  return real_trace(hpd_solve(inner, theta)) + real_trace(hpd_inverse(second));
}

double mse_uplink_projected(const ComplexMatrix& f_tilde, const std::vector<ComplexMatrix>& precoders,
                            const ChannelSet& channels, const NoiseModel& noise) {
  const HermitianMatrix pi = pi_matrix(f_tilde, channels, noise);
  const HermitianMatrix xi = xi_matrix(precoders, channels, noise);
  const ComplexMatrix eye = ComplexMatrix::Identity(xi.rows(), xi.rows());
  return static_cast<double>(total_streams(precoders)) - real_trace(pi * (eye - hpd_inverse(xi)));
}

double mse_uplink_split(const ComplexMatrix& f_tilde, const std::vector<ComplexMatrix>& precoders,
                        const ChannelSet& channels, const NoiseModel& noise) {
  const HermitianMatrix pi = pi_matrix(f_tilde, channels, noise);
  const HermitianMatrix xi = xi_matrix(precoders, channels, noise);
  return real_trace(hpd_solve(xi, pi)) + static_cast<double>(total_streams(precoders)) - real_trace(pi);
}

ForwardingSolution forwarding_closed_form(const std::vector<ComplexMatrix>& precoders, const ChannelSet& channels,
                                          const NoiseModel& noise, double relay_budget, int streams) {
  const ComplexMatrix& h_rb = relay_to_base(channels);
  const Eigen::Index n_relay = h_rb.cols();
  if (streams < 1 || streams > std::min<Eigen::Index>(n_relay, h_rb.rows())) {
    throw InvalidInput("forwarding_closed_form: stream count exceeds min(N_B, N_R)");
  }
  if (!(relay_budget > 0.0)) throw InvalidInput("forwarding_closed_form: relay budget must be positive");
  const EigenDecomposition theta = hermitian_eig(theta_matrix(precoders, channels, noise));
  const EigenDecomposition m = hermitian_eig(m_matrix(channels, noise));
  const WaterFilling wf =
      mse_water_filling(theta.values.head(streams).cwiseMax(0.0), m.values.head(streams).cwiseMax(0.0), relay_budget);
  ForwardingSolution out;
  out.f_tilde = m.vectors.leftCols(streams) * wf.powers.cwiseSqrt().asDiagonal() *
                theta.vectors.leftCols(streams).adjoint();
  out.forwarding = forwarding_from_tilde(out.f_tilde, precoders, channels, noise);
  out.mu_f = wf.mu;
  return out;
}

double covariance_objective(const HermitianMatrix& pi, const std::vector<HermitianMatrix>& q,
                            const ChannelSet& channels, const NoiseModel& noise) {
  require_uplink(channels);
  const HermitianMatrix rn = hermitian_inv_sqrt(noise.relay);
  HermitianMatrix sum = ComplexMatrix::Zero(rn.rows(), rn.rows());
  for (std::size_t k = 0; k < q.size(); ++k) {
    sum += channels.first_hop[k] * q[k] * channels.first_hop[k].adjoint();
  }
  const HermitianMatrix inner = hermitian_part(rn * sum * rn) + ComplexMatrix::Identity(rn.rows(), rn.rows());
  return real_trace(hpd_solve(inner, pi));
}

PrecoderCovariances precoder_sdp_uplink(const HermitianMatrix& pi, const ChannelSet& channels,
                                        const NoiseModel& noise, const std::vector<double>& budgets,
                                        const SdpSettings& settings) {
  require_uplink(channels);
  require_hermitian(pi, "precoder_sdp_uplink: Pi");
  const auto users = channels.first_hop.size();
  if (budgets.size() != users) throw InvalidInput("precoder_sdp_uplink: one budget per user required");
  const Eigen::Index nr = pi.rows();
  const HermitianMatrix rn = hermitian_inv_sqrt(noise.relay);

  std::vector<Eigen::Index> offset{nr * nr};
  for (std::size_t k = 0; k < users; ++k) {
    const Eigen::Index d = channels.first_hop[k].cols();
    offset.push_back(offset.back() + d * d);
  }
  const Eigen::Index n = offset.back();
  const ComplexMatrix zero_big = ComplexMatrix::Zero(2 * nr, 2 * nr);

  SdpProblem prob;
  prob.objective = RealVector::Zero(n);
  prob.objective.head(nr).setOnes();  // Tr(X): diagonal parameters come first

  // [[X, Pi^{1/2}], [Pi^{1/2}, R_n^{-1/2} sum_k H_k Q_k H_k^H R_n^{-1/2} + I]]
  ComplexMatrix big0 = zero_big;
  const HermitianMatrix pi_half = hermitian_sqrt(hermitian_part(pi));
  big0.topRightCorner(nr, nr) = pi_half;
  big0.bottomLeftCorner(nr, nr) = pi_half;
  big0.bottomRightCorner(nr, nr).setIdentity();
  std::vector<ComplexMatrix> big(static_cast<std::size_t>(n), zero_big);
  const auto basis_x = hermitian_basis(nr);
  for (Eigen::Index i = 0; i < nr * nr; ++i) big[static_cast<std::size_t>(i)].topLeftCorner(nr, nr) = basis_x[static_cast<std::size_t>(i)];
  for (std::size_t k = 0; k < users; ++k) {
    const ComplexMatrix& h = channels.first_hop[k];
    const Eigen::Index d = h.cols();
    const ComplexMatrix wh = rn * h;
    const auto basis_q = hermitian_basis(d);
    for (Eigen::Index j = 0; j < d * d; ++j) {
      big[static_cast<std::size_t>(offset[k] + j)].bottomRightCorner(nr, nr) =
          wh * basis_q[static_cast<std::size_t>(j)] * wh.adjoint();
    }
  }
  prob.blocks.push_back(complex_lmi(big0, big));

  for (std::size_t k = 0; k < users; ++k) {
    const Eigen::Index d = channels.first_hop[k].cols();
    const auto basis_q = hermitian_basis(d);
    std::vector<ComplexMatrix> coeff(static_cast<std::size_t>(n), ComplexMatrix::Zero(d, d));
    for (Eigen::Index j = 0; j < d * d; ++j) coeff[static_cast<std::size_t>(offset[k] + j)] = basis_q[static_cast<std::size_t>(j)];
    prob.blocks.push_back(complex_lmi(ComplexMatrix::Zero(d, d), coeff));

    LmiBlock trace;
    trace.constant = RealMatrix::Constant(1, 1, budgets[k]);
    trace.coefficients.assign(static_cast<std::size_t>(n), RealMatrix::Zero(1, 1));
    for (Eigen::Index j = 0; j < d; ++j) trace.coefficients[static_cast<std::size_t>(offset[k] + j)](0, 0) = -1.0;
    prob.blocks.push_back(std::move(trace));
  }

  const SdpSolution sol = solve_sdp(prob, settings);
  PrecoderCovariances out;
  out.status = sol.status;
  for (std::size_t k = 0; k < users; ++k) {
    const Eigen::Index d = channels.first_hop[k].cols();
    out.q.push_back(clean_covariance(hermitian_from_params(sol.x, offset[k], d), budgets[k]));
  }
  out.objective = covariance_objective(pi, out.q, channels, noise);
  return out;
}

ComplexMatrix extract_precoder(const HermitianMatrix& q, int streams) {
  const Eigen::Index nm = q.rows();
  ComplexMatrix p = ComplexMatrix::Zero(nm, streams);
  if (nm <= streams) {
    p.leftCols(nm) = hermitian_sqrt(hermitian_part(q));
    return p;
  }
  const EigenDecomposition eig = hermitian_eig(hermitian_part(q));
  p = eig.vectors.leftCols(streams) * eig.values.head(streams).cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return p;
}

ComplexMatrix closed_form_precoder(const HermitianMatrix& pi, const ComplexMatrix& h_mr, const HermitianMatrix& r_n,
                                   double budget, int streams, double* mu) {
  if (streams < 1 || streams > h_mr.cols() || streams > pi.rows()) {
    throw InvalidInput("closed_form_precoder: stream count exceeds antenna count");
  }
  const HermitianMatrix gain = hermitian_part(h_mr.adjoint() * hpd_solve(r_n, h_mr));
  const EigenDecomposition pe = hermitian_eig(hermitian_part(pi));
  return water_filling_precoder(gain, pe.values.head(streams).cwiseMax(0.0), budget, streams, mu);
}

ComplexMatrix closed_form_precoder_single_user(const ComplexMatrix& f_tilde, const ChannelSet& channels,
                                               const NoiseModel& noise, double budget, int streams, double* mu) {
  require_uplink(channels);
  if (channels.first_hop.size() != 1) throw InvalidInput("closed_form_precoder_single_user: K must be 1");
  return closed_form_precoder(pi_matrix(f_tilde, channels, noise), channels.first_hop.front(), noise.relay, budget,
                              streams, mu);
}

UplinkDesign uplink_identity_init(const Scenario& s) {
  require_uplink(s.channels);
  UplinkDesign d;
  for (int k = 0; k < s.dims.num_users(); ++k) {
    const Eigen::Index nm = s.channels.first_hop[static_cast<std::size_t>(k)].cols();
    const Eigen::Index lk = s.dims.users[static_cast<std::size_t>(k)].streams;
    d.precoders.push_back(std::sqrt(s.budget.source[static_cast<std::size_t>(k)] /
                                    static_cast<double>(std::min(nm, lk))) *
                          truncated_identity(nm, lk));
  }
  const double rx = real_trace(relay_received_covariance(d.precoders, s.channels, s.noise));
  const Eigen::Index nr = s.dims.n_relay;
  d.forwarding = std::sqrt(s.budget.relay / rx) * ComplexMatrix::Identity(nr, nr);
  d.equalizer = equalizer_b(d.forwarding, d.precoders, s.channels, s.noise);
  return d;
}

UplinkResult run_algorithm2(const Scenario& s, const UplinkOptions& options) {
  if (!(options.threshold > 0.0)) throw InvalidInput("run_algorithm2: threshold must be positive");
  if (options.max_iter < 0) throw InvalidInput("run_algorithm2: max_iter must be non-negative");
  bool relaxed = false;
  for (int k = 0; k < s.dims.num_users(); ++k) {
    if (s.dims.users[static_cast<std::size_t>(k)].n_mobile > s.dims.users[static_cast<std::size_t>(k)].streams) {
      relaxed = true;
    }
  }
  const int streams = s.dims.total_streams();
  UplinkResult res;
  UplinkDesign& d = res.design;
  d = uplink_identity_init(s);
  ComplexMatrix f_tilde = tilde_from_forwarding(d.forwarding, d.precoders, s.channels, s.noise);
  double mse = mse_uplink_tilde(f_tilde, d.precoders, s.channels, s.noise);
  res.trace.mse.push_back(mse);

  for (int it = 0; it < options.max_iter; ++it) {
    const double before = mse;

    const ForwardingSolution fs = forwarding_closed_form(d.precoders, s.channels, s.noise, s.budget.relay, streams);
    double candidate = mse_uplink_tilde(fs.f_tilde, d.precoders, s.channels, s.noise);
    if (relaxed || candidate <= mse) {
      f_tilde = fs.f_tilde;
      d.mu_f = fs.mu_f;
      mse = candidate;
    }

    const HermitianMatrix pi = pi_matrix(f_tilde, s.channels, s.noise);
    const PrecoderCovariances cov = precoder_sdp_uplink(pi, s.channels, s.noise, s.budget.source, options.sdp);
    if (cov.status != SdpStatus::optimal) {
      res.trace.note = std::string("covariance SDP: ") + to_string(cov.status);
      res.trace.mse.push_back(mse);
      res.trace.iterations = it + 1;
      break;
    }
    std::vector<ComplexMatrix> p;
    std::vector<HermitianMatrix> q_used;
    for (int k = 0; k < s.dims.num_users(); ++k) {
      p.push_back(extract_precoder(cov.q[static_cast<std::size_t>(k)], s.dims.users[static_cast<std::size_t>(k)].streams));
      q_used.push_back(p.back() * p.back().adjoint());
    }
    p = enforce_user_budgets(std::move(p), s.budget.source);
    res.trace.relaxation_gap.push_back(covariance_objective(pi, q_used, s.channels, s.noise) - cov.objective);
    candidate = mse_uplink_tilde(f_tilde, p, s.channels, s.noise);
    if (relaxed || candidate <= mse) {
      d.precoders = std::move(p);
      mse = candidate;
    }

    res.trace.mse.push_back(mse);
    res.trace.iterations = it + 1;
    if (std::abs(before - mse) <= options.threshold) {
      res.trace.converged = true;
      break;
    }
  }
  if (res.trace.iterations > 0 || !res.trace.note.empty()) {
    d.forwarding = forwarding_from_tilde(f_tilde, d.precoders, s.channels, s.noise);
  }
  d.equalizer = equalizer_b(d.forwarding, d.precoders, s.channels, s.noise);
  return res;
}

RelayPowerMap uplink_relay_map(const ComplexMatrix& equalizer, const std::vector<ComplexMatrix>& precoders,
                               const ChannelSet& channels, const NoiseModel& noise) {
  const ComplexMatrix bh = equalizer * relay_to_base(channels);  // L x N_R
  const ComplexMatrix cross = (channels.stacked_user_channels() * block_diag(precoders) * bh).adjoint();
  return RelayPowerMap(bh.adjoint() * bh, cross, relay_received_covariance(precoders, channels, noise));
}

std::vector<ComplexMatrix> UplinkPrecoderSdp::extract(const RealVector& x) const {
  const Eigen::Index m = offsets.empty() ? 0 : offsets.back() + rows.back() * cols.back();
  const ComplexVector v = complex_block(x, m);
  std::vector<ComplexMatrix> out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.push_back(unvec(v.segment(offsets[k], rows[k] * cols[k]), rows[k], cols[k]));
  }
  return out;
}

UplinkPrecoderSdp build_uplink_precoder_sdp(const ComplexMatrix& equalizer, const ComplexMatrix& forwarding,
                                            const Scenario& s) {
  require_uplink(s.channels);
  const ComplexMatrix& h_rb = relay_to_base(s.channels);
  const ComplexMatrix bhf = equalizer * h_rb * forwarding;  // L x N_R
  UplinkPrecoderSdp out;
  Eigen::Index m = 0;
  Eigen::Index stream_off = 0;
  std::vector<ComplexMatrix> obj_blocks;
  std::vector<ComplexMatrix> relay_blocks;
  ComplexVector linear(0);
  for (int k = 0; k < s.dims.num_users(); ++k) {
    const ComplexMatrix& h = s.channels.first_hop[static_cast<std::size_t>(k)];
    const Eigen::Index lk = s.dims.users[static_cast<std::size_t>(k)].streams;
    out.offsets.push_back(m);
    out.rows.push_back(h.cols());
    out.cols.push_back(lk);
    m += h.cols() * lk;
    const ComplexMatrix a = bhf * h;  // L x N_M,k
    const ComplexMatrix eye = ComplexMatrix::Identity(lk, lk);
    obj_blocks.push_back(kron(eye, a));
    relay_blocks.push_back(kron(eye, forwarding * h));
    const ComplexMatrix dk_t = a.middleRows(stream_off, lk).transpose();
    const ComplexVector g = vec(dk_t);
    ComplexVector grown(linear.size() + g.size());
    grown << linear, g;
    linear = grown;
    stream_off += lk;
  }
  std::vector<QuadraticConstraint> cons;
  for (int k = 0; k < s.dims.num_users(); ++k) {
    const Eigen::Index sz = out.rows[static_cast<std::size_t>(k)] * out.cols[static_cast<std::size_t>(k)];
    ComplexMatrix sel = ComplexMatrix::Zero(sz, m);
    sel.middleCols(out.offsets[static_cast<std::size_t>(k)], sz).setIdentity();
    cons.push_back({sel, s.budget.source[static_cast<std::size_t>(k)]});
  }
  const double relay_noise_power = real_trace(forwarding * s.noise.relay * forwarding.adjoint());
  cons.push_back({block_diag(relay_blocks), s.budget.relay - relay_noise_power});
  out.problem = quadratic_program_sdp(block_diag(obj_blocks), linear, cons);
  const ComplexMatrix bhf_n = bhf;
  out.constant = real_trace(bhf_n * s.noise.relay * bhf_n.adjoint()) +
                 real_trace(equalizer * base_noise(s.noise) * equalizer.adjoint()) + static_cast<double>(stream_off);
  return out;
}

UplinkResult run_algorithm1_uplink(const Scenario& s, const UplinkOptions& options) {
  return run_algorithm1_uplink(s, uplink_identity_init(s), options);
}

UplinkResult run_algorithm1_uplink(const Scenario& s, UplinkDesign start, const UplinkOptions& options) {
  if (!(options.threshold > 0.0)) throw InvalidInput("run_algorithm1_uplink: threshold must be positive");
  if (options.max_iter < 0) throw InvalidInput("run_algorithm1_uplink: max_iter must be non-negative");
  UplinkResult res;
  res.design = std::move(start);
  UplinkDesign& d = res.design;
  double mse = mse_uplink(d, s);
  res.trace.mse.push_back(mse);

  for (int it = 0; it < options.max_iter; ++it) {
    const double before = mse;

    try {
      const RelayMultiplier relay =
          solve_relay_multiplier(uplink_relay_map(d.equalizer, d.precoders, s.channels, s.noise), s.budget.relay);
      const double candidate = mse_uplink(d.equalizer, relay.forwarding, d.precoders, s.channels, s.noise);
      if (candidate <= mse) {
        d.forwarding = relay.forwarding;
        d.lambda = relay.lambda;
        mse = candidate;
      }
    } catch (const NumericalFailure& e) {
      res.trace.note = std::string("relay step: ") + e.what();
      res.trace.mse.push_back(mse);
      res.trace.iterations = it + 1;
      break;
    }

    const UplinkPrecoderSdp sdp = build_uplink_precoder_sdp(d.equalizer, d.forwarding, s);
    const SdpSolution sol = solve_sdp(sdp.problem, options.sdp);
    if (sol.status != SdpStatus::optimal) {
      res.trace.note = std::string("precoder SDP: ") + to_string(sol.status);
      const ComplexMatrix b = equalizer_b(d.forwarding, d.precoders, s.channels, s.noise);
      const double candidate = mse_uplink(b, d.forwarding, d.precoders, s.channels, s.noise);
      if (candidate <= mse) {
        d.equalizer = b;
        mse = candidate;
      }
      res.trace.mse.push_back(mse);
      res.trace.iterations = it + 1;
      break;
    }
    std::vector<ComplexMatrix> p = enforce_user_budgets(sdp.extract(sol.x), s.budget.source);
    {
      const ComplexMatrix fh = d.forwarding * s.channels.stacked_user_channels() * block_diag(p);
      const double signal = fh.squaredNorm();
      const double room = s.budget.relay - real_trace(d.forwarding * s.noise.relay * d.forwarding.adjoint());
      if (signal > room && signal > 0.0) {
        const double scale = std::sqrt(std::max(room, 0.0) / signal);
        for (auto& pk : p) pk *= scale;
      }
    }
    double candidate = mse_uplink(d.equalizer, d.forwarding, p, s.channels, s.noise);
    if (candidate <= mse) {
      d.precoders = std::move(p);
      mse = candidate;
    }

    const ComplexMatrix b = equalizer_b(d.forwarding, d.precoders, s.channels, s.noise);
    candidate = mse_uplink(b, d.forwarding, d.precoders, s.channels, s.noise);
    if (candidate <= mse) {
      d.equalizer = b;
      mse = candidate;
    }

    res.trace.mse.push_back(mse);
    res.trace.iterations = it + 1;
    if (std::abs(before - mse) <= options.threshold) {
      res.trace.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace afrelay
