#include "afrelay/downlink.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace afrelay {

namespace {

const ComplexMatrix& base_to_relay(const ChannelSet& channels) {
  if (channels.direction != Direction::downlink || channels.first_hop.size() != 1) {
    throw InvalidInput("downlink design needs a downlink channel set");
  }
  return channels.first_hop.front();
}

std::vector<Eigen::Index> stream_offsets(const SystemDims& dims) {
  std::vector<Eigen::Index> off{0};
  for (const auto& u : dims.users) off.push_back(off.back() + u.streams);
  return off;
}

ComplexMatrix scaled_identity_precoder(Eigen::Index rows, Eigen::Index streams, double budget) {
  return std::sqrt(budget / static_cast<double>(std::min(rows, streams))) * truncated_identity(rows, streams);
}

// Scales T down (never up) until both power constraints hold exactly.
ComplexMatrix enforce_precoder_budgets(ComplexMatrix t, const ComplexMatrix& forwarding, const Scenario& s) {
  const double ps = s.budget.source.front();
  double scale = 1.0;
  const double tp = t.squaredNorm();
  if (tp > ps) scale = std::min(scale, std::sqrt(ps / tp));
  const ComplexMatrix wh = forwarding * base_to_relay(s.channels);
  const double signal = (wh * t).squaredNorm();
  const double room = s.budget.relay - real_trace(forwarding * s.noise.relay * forwarding.adjoint());
  if (signal > 0.0 && signal > room) scale = std::min(scale, std::sqrt(std::max(room, 0.0) / signal));
  if (scale < 1.0) t *= scale;
  return t;
}

}  // namespace

HermitianMatrix received_covariance(const ComplexMatrix& precoder, const ChannelSet& channels,
                                    const NoiseModel& noise) {
  return relay_input_covariance(base_to_relay(channels), precoder, noise.relay);
}

double mse_downlink(const std::vector<ComplexMatrix>& equalizers, const ComplexMatrix& forwarding,
                    const ComplexMatrix& precoder, const ChannelSet& channels, const NoiseModel& noise) {
  return chain_mse(block_diag(equalizers), forwarding, precoder, base_to_relay(channels),
                   channels.stacked_user_channels(), noise.relay, noise.stacked_destination());
}

double mse_downlink(const DownlinkDesign& design, const Scenario& scenario) {
  return mse_downlink(design.equalizers, design.forwarding, design.precoder, scenario.channels, scenario.noise);
}

double downlink_relay_power(const ComplexMatrix& forwarding, const ComplexMatrix& precoder,
                            const ChannelSet& channels, const NoiseModel& noise) {
  return real_trace(forwarding * received_covariance(precoder, channels, noise) * forwarding.adjoint());
}

std::vector<ComplexMatrix> update_equalizers(const ComplexMatrix& forwarding, const ComplexMatrix& precoder,
                                             const ChannelSet& channels, const NoiseModel& noise,
                                             const SystemDims& dims) {
  const ComplexMatrix& h_br = base_to_relay(channels);
  const HermitianMatrix r_r = received_covariance(precoder, channels, noise);
  const ComplexMatrix relay_out = forwarding * r_r * forwarding.adjoint();
  const auto off = stream_offsets(dims);
  if (precoder.cols() != off.back()) throw InvalidInput("update_equalizers: precoder width != total streams");
  std::vector<ComplexMatrix> g;
  for (int k = 0; k < dims.num_users(); ++k) {
    const ComplexMatrix& h = channels.second_hop[k];
    const ComplexMatrix effective = h * forwarding * h_br * precoder.middleCols(off[k], dims.users[k].streams);
    HermitianMatrix cov = h * relay_out * h.adjoint() + noise.destination[k];
    cov = 0.5 * (cov + cov.adjoint());
    g.push_back(lmmse_receiver(effective, cov));
  }
  return g;
}

RelayPowerMap downlink_relay_map(const std::vector<ComplexMatrix>& equalizers, const ComplexMatrix& precoder,
                                 const ChannelSet& channels, const NoiseModel& noise) {
  const ComplexMatrix gh = block_diag(equalizers) * channels.stacked_user_channels();  // L x N_R
  const ComplexMatrix cross = (base_to_relay(channels) * precoder * gh).adjoint();
  return RelayPowerMap(gh.adjoint() * gh, cross, received_covariance(precoder, channels, noise));
}

RelayEvaluation relay_mse_power(double lambda, const std::vector<ComplexMatrix>& equalizers,
                                const ComplexMatrix& precoder, const ChannelSet& channels,
                                const NoiseModel& noise) {
  const RelayPowerMap map = downlink_relay_map(equalizers, precoder, channels, noise);
  RelayEvaluation out;
  out.forwarding = map.forwarding(lambda);
  out.power = downlink_relay_power(out.forwarding, precoder, channels, noise);
  return out;
}

RelayMultiplier solve_relay_multiplier(const std::vector<ComplexMatrix>& equalizers,
                                       const ComplexMatrix& precoder, const ChannelSet& channels,
                                       const NoiseModel& noise, double relay_budget) {
  return solve_relay_multiplier(downlink_relay_map(equalizers, precoder, channels, noise), relay_budget);
}

ComplexMatrix PrecoderSdp::extract(const RealVector& x) const { return unvec(complex_block(x, rows * cols), rows, cols); }

PrecoderSdp build_precoder_sdp(const ComplexMatrix& forwarding, const std::vector<ComplexMatrix>& equalizers,
                               const ChannelSet& channels, const NoiseModel& noise, const SystemDims& dims,
                               double source_budget, double relay_budget) {
  const ComplexMatrix& h_br = base_to_relay(channels);
  const ComplexMatrix g = block_diag(equalizers);
  const ComplexMatrix gh = g * channels.stacked_user_channels();
  const Eigen::Index streams = dims.total_streams();
  if (g.rows() != streams) throw InvalidInput("build_precoder_sdp: equalizer rows != total streams");

  // MSE(T) = ||C T||_F^2 - 2 Re Tr(C T) + constant with C = G H_RM W H_BR.
  const ComplexMatrix c = gh * forwarding * h_br;  // L x N_B
  const ComplexMatrix eye = ComplexMatrix::Identity(streams, streams);
  const ComplexMatrix wh = forwarding * h_br;

  PrecoderSdp out;
  out.rows = h_br.cols();
  out.cols = streams;
  const ComplexMatrix ct = c.transpose();
  const ComplexVector linear = vec(ct);
  const double relay_noise_power = real_trace(forwarding * noise.relay * forwarding.adjoint());
  out.problem = quadratic_program_sdp(
      kron(eye, c), linear,
      {{ComplexMatrix::Identity(out.rows * streams, out.rows * streams), source_budget},
       {kron(eye, wh), relay_budget - relay_noise_power}});
  const ComplexMatrix ghw = gh * forwarding;
  out.constant = real_trace(ghw * noise.relay * ghw.adjoint()) +
                 real_trace(g * noise.stacked_destination() * g.adjoint()) + static_cast<double>(streams);
  return out;
}

DownlinkDesign identity_init(const Scenario& s) {
  const ComplexMatrix& h_br = base_to_relay(s.channels);
  const int streams = s.dims.total_streams();
  DownlinkDesign d;
  d.precoder = scaled_identity_precoder(h_br.cols(), streams, s.budget.source.front());
  const double rr = real_trace(received_covariance(d.precoder, s.channels, s.noise));
  d.forwarding = std::sqrt(s.budget.relay / rr) * ComplexMatrix::Identity(h_br.rows(), h_br.rows());
  d.equalizers = update_equalizers(d.forwarding, d.precoder, s.channels, s.noise, s.dims);
  return d;
}

DownlinkDesign separate_lmmse_init(const Scenario& s) {
  try {
    const ComplexMatrix& h_br = base_to_relay(s.channels);
    const int streams = s.dims.total_streams();
    const Eigen::Index n_relay = h_br.rows();
    DownlinkDesign d;
    d.precoder = point_to_point_precoder(h_br, s.noise.relay, s.budget.source.front(), streams);
    const HermitianMatrix r_r = received_covariance(d.precoder, s.channels, s.noise);
    const ComplexMatrix w1 = lmmse_receiver(h_br * d.precoder, r_r);  // L x N_R

    // Second hop seen as a multiuser broadcast of L unit-power streams.
    ChannelSet hop2 = s.channels;
    hop2.first_hop = {ComplexMatrix::Identity(streams, streams)};
    NoiseModel noise2 = s.noise;
    noise2.relay = ComplexMatrix::Zero(streams, streams);
    const ComplexMatrix unit = ComplexMatrix::Identity(streams, streams);
    const ComplexMatrix h_rm = s.channels.stacked_user_channels();
    ComplexMatrix w2 = std::sqrt(s.budget.relay / static_cast<double>(std::min<Eigen::Index>(n_relay, streams))) *
                       truncated_identity(n_relay, streams);
    for (int inner = 0; inner < 5; ++inner) {
      const auto g = update_equalizers(w2, unit, hop2, noise2, s.dims);
      const ComplexMatrix gh = block_diag(g) * h_rm;
      const RelayPowerMap map(gh.adjoint() * gh, gh.adjoint(), unit);
      w2 = solve_relay_multiplier(map, s.budget.relay).forwarding;
    }
    d.forwarding = w2 * w1;
    const double p = downlink_relay_power(d.forwarding, d.precoder, s.channels, s.noise);
    if (!(p > 0.0) || !std::isfinite(p)) throw NumericalFailure("separate_lmmse_init: zero relay matrix");
    d.forwarding *= std::sqrt(s.budget.relay / p);
    d.equalizers = update_equalizers(d.forwarding, d.precoder, s.channels, s.noise, s.dims);
    if (!std::isfinite(mse_downlink(d, s))) throw NumericalFailure("separate_lmmse_init: non-finite MSE");
    return d;
  } catch (const std::exception&) {
    return identity_init(s);
  }
}

DownlinkResult run_algorithm1(const Scenario& scenario, const DownlinkOptions& options) {
  DownlinkDesign start =
      options.init == DownlinkInit::identity ? identity_init(scenario) : separate_lmmse_init(scenario);
  return run_algorithm1(scenario, std::move(start), options);
}

DownlinkResult run_algorithm1(const Scenario& s, DownlinkDesign start, const DownlinkOptions& options) {
  if (!(options.threshold > 0.0)) throw InvalidInput("run_algorithm1: threshold must be positive");
  if (options.max_iter < 0) throw InvalidInput("run_algorithm1: max_iter must be non-negative");
  DownlinkResult res;
  res.design = std::move(start);
  DownlinkDesign& d = res.design;
  double mse = mse_downlink(d, s);
  res.trace.mse.push_back(mse);

  for (int it = 0; it < options.max_iter; ++it) {
    const double before = mse;

    // Relay step.
    try {
      const RelayMultiplier relay = solve_relay_multiplier(d.equalizers, d.precoder, s.channels, s.noise,
                                                           s.budget.relay);
      const double candidate = mse_downlink(d.equalizers, relay.forwarding, d.precoder, s.channels, s.noise);
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

    // Precoder step.
    if (options.optimize_precoder) {
      const PrecoderSdp sdp = build_precoder_sdp(d.forwarding, d.equalizers, s.channels, s.noise, s.dims,
                                                 s.budget.source.front(), s.budget.relay);
      const SdpSolution sol = solve_sdp(sdp.problem, options.sdp);
      if (sol.status != SdpStatus::optimal) {
        res.trace.note = std::string("precoder SDP: ") + to_string(sol.status);
        const auto g = update_equalizers(d.forwarding, d.precoder, s.channels, s.noise, s.dims);
        const double candidate = mse_downlink(g, d.forwarding, d.precoder, s.channels, s.noise);
        if (candidate <= mse) {
          d.equalizers = g;
          mse = candidate;
        }
        res.trace.mse.push_back(mse);
        res.trace.iterations = it + 1;
        break;
      }
      const ComplexMatrix t = enforce_precoder_budgets(sdp.extract(sol.x), d.forwarding, s);
      const double candidate = mse_downlink(d.equalizers, d.forwarding, t, s.channels, s.noise);
      if (candidate <= mse) {
        d.precoder = t;
        mse = candidate;
      }
    }

    // Equalizer step.
    const auto g = update_equalizers(d.forwarding, d.precoder, s.channels, s.noise, s.dims);
    const double candidate = mse_downlink(g, d.forwarding, d.precoder, s.channels, s.noise);
    if (candidate <= mse) {
      d.equalizers = g;
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
