#include "afrelay/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "afrelay/baselines.hpp"
#include "afrelay/rng.hpp"

namespace afrelay {

Complex qpsk_modulate(int b0, int b1) {
  if ((b0 != 0 && b0 != 1) || (b1 != 0 && b1 != 1)) throw InvalidInput("qpsk_modulate: bits must be 0 or 1");
  return Complex(1.0 - 2.0 * b0, 1.0 - 2.0 * b1) * (1.0 / std::numbers::sqrt2);
}

std::pair<int, int> qpsk_detect(Complex symbol) {
  return {symbol.real() < 0.0 ? 1 : 0, symbol.imag() < 0.0 ? 1 : 0};
}

double LinearChain::analytic_mse() const {
  return chain_mse(equalizer, forwarding, precoder, h1, h2, relay_noise, destination_noise);
}

LinearChain make_chain(const DownlinkDesign& d, const Scenario& s) {
  return {d.precoder,
          s.channels.first_hop.front(),
          s.noise.relay,
          d.forwarding,
          s.channels.stacked_user_channels(),
          s.noise.stacked_destination(),
          d.stacked_equalizer()};
}

LinearChain make_chain(const UplinkDesign& d, const Scenario& s) {
  return {d.stacked_precoder(),
          s.channels.stacked_user_channels(),
          s.noise.relay,
          d.forwarding,
          s.channels.second_hop.front(),
          s.noise.destination.front(),
          d.equalizer};
}

std::vector<std::string> known_algorithms(Direction direction) {
  if (direction == Direction::downlink) {
    return {"algorithm1", "algorithm1_separate", "fixed_precoder", "separate_lmmse", "direct_af", "per_hop"};
  }
  return {"algorithm2", "algorithm1_uplink", "separate_lmmse", "direct_af", "per_hop", "no_source_precoder"};
}

bool is_iterative(const std::string& a) {
  return a == "algorithm1" || a == "algorithm1_separate" || a == "fixed_precoder" || a == "algorithm2" ||
         a == "algorithm1_uplink";
}

Designer make_designer(const std::string& algorithm, Direction direction) {
  const auto known = known_algorithms(direction);
  if (std::find(known.begin(), known.end(), algorithm) == known.end()) {
    throw InvalidInput("unknown " + std::string(to_string(direction)) + " algorithm '" + algorithm + "'");
  }
  if (direction == Direction::downlink) {
    if (algorithm == "algorithm1" || algorithm == "algorithm1_separate" || algorithm == "fixed_precoder") {
      return [algorithm](const Scenario& s, const ExperimentConfig& c) {
        DownlinkOptions o;
        o.threshold = c.threshold;
        o.max_iter = c.max_iter;
        o.init = algorithm == "algorithm1_separate" ? DownlinkInit::separate_lmmse : DownlinkInit::identity;
        o.optimize_precoder = algorithm != "fixed_precoder";
        const DownlinkResult r = run_algorithm1(s, o);
        return DesignOutcome{make_chain(r.design, s), r.trace};
      };
    }
    const BaselineKind kind = parse_baseline(algorithm);
    return [kind](const Scenario& s, const ExperimentConfig&) {
      const DownlinkDesign d = design_downlink_baseline(kind, s);
      DesignOutcome out{make_chain(d, s), {}};
      out.trace.mse.push_back(out.chain.analytic_mse());
      out.trace.converged = true;
      return out;
    };
  }
  if (algorithm == "algorithm2" || algorithm == "algorithm1_uplink") {
    return [algorithm](const Scenario& s, const ExperimentConfig& c) {
      UplinkOptions o;
      o.threshold = c.threshold;
      o.max_iter = c.max_iter;
      const UplinkResult r = algorithm == "algorithm2" ? run_algorithm2(s, o) : run_algorithm1_uplink(s, o);
      return DesignOutcome{make_chain(r.design, s), r.trace};
    };
  }
  const BaselineKind kind = parse_baseline(algorithm);
  return [kind](const Scenario& s, const ExperimentConfig&) {
    const UplinkDesign d = design_uplink_baseline(kind, s);
    DesignOutcome out{make_chain(d, s), {}};
    out.trace.mse.push_back(out.chain.analytic_mse());
    out.trace.converged = true;
    return out;
  };
}

LinkStatistics simulate_link(const LinearChain& c, int symbols, std::uint64_t seed, std::uint64_t trial_index) {
  if (symbols < 2) throw InvalidInput("simulate_link: need at least two symbols per stream");
  const Eigen::Index l = c.precoder.cols();
  RandomStream sym_rng(seed, trial_index, StreamTag::symbols);
  RandomStream noise_rng(seed, trial_index, StreamTag::noise);

  std::vector<int> bits0(static_cast<std::size_t>(l * symbols));
  std::vector<int> bits1(bits0.size());
  ComplexMatrix s(l, symbols);
  for (Eigen::Index n = 0; n < symbols; ++n) {
    for (Eigen::Index i = 0; i < l; ++i) {
      const std::uint64_t r = sym_rng.next_u64();
      const auto idx = static_cast<std::size_t>(n * l + i);
      bits0[idx] = static_cast<int>(r >> 63);
      bits1[idx] = static_cast<int>((r >> 62) & 1U);
      s(i, n) = qpsk_modulate(bits0[idx], bits1[idx]);
    }
  }
  const ComplexMatrix x = c.precoder * s;
  const ComplexMatrix n1 = hermitian_sqrt(c.relay_noise) * noise_rng.complex_gaussian(c.h1.rows(), symbols);
  const ComplexMatrix n2 = hermitian_sqrt(c.destination_noise) * noise_rng.complex_gaussian(c.h2.rows(), symbols);
  const ComplexMatrix y = c.h2 * (c.forwarding * (c.h1 * x + n1)) + n2;
  const ComplexMatrix s_hat = c.equalizer * y;

  LinkStatistics out;
  const RealVector err = (s_hat - s).colwise().squaredNorm().transpose();
  const double nsym = static_cast<double>(symbols);
  out.empirical_mse = err.mean();
  const double var = (err.array() - out.empirical_mse).square().sum() / (nsym - 1.0);
  out.standard_error = std::sqrt(var / nsym);
  out.stream_ser.assign(static_cast<std::size_t>(l), 0.0);
  for (Eigen::Index n = 0; n < symbols; ++n) {
    for (Eigen::Index i = 0; i < l; ++i) {
      const auto idx = static_cast<std::size_t>(n * l + i);
      const auto [d0, d1] = qpsk_detect(s_hat(i, n));
      if (d0 != bits0[idx] || d1 != bits1[idx]) out.stream_ser[static_cast<std::size_t>(i)] += 1.0;
    }
  }
  double ser = 0.0;
  for (auto& v : out.stream_ser) {
    v /= nsym;
    ser += v;
  }
  out.mean_ser = l > 0 ? ser / static_cast<double>(l) : 0.0;
  out.transmit_power = x.squaredNorm() / nsym;
  return out;
}

TrialResult run_trial(const Designer& designer, const ExperimentConfig& config, const SweepPoint& point,
                      std::uint64_t trial_index) {
  TrialResult r;
  r.trial_index = trial_index;
  try {
    const ChannelSet ch = sample_rayleigh(config.dims, config.seed, trial_index);
    const Scenario s = make_scenario(config.dims, ch, point.first_hop_snr_db, point.second_hop_snr_db);
    const DesignOutcome d = designer(s, config);
    r.analytic_mse = d.chain.analytic_mse();
    r.iterations = d.trace.iterations;
    r.converged = d.trace.converged;
    r.trace = d.trace.mse;
    r.note = d.trace.note;
    if (!d.trace.note.empty() || !std::isfinite(r.analytic_mse)) {
      r.flagged = true;
      if (r.note.empty()) r.note = "non-finite MSE";
      return r;
    }
    const LinkStatistics link = simulate_link(d.chain, config.symbols_per_stream, config.seed, trial_index);
    r.empirical_mse = link.empirical_mse;
    r.standard_error = link.standard_error;
    r.mean_ser = link.mean_ser;
  } catch (const std::exception& e) {
    r.flagged = true;
    r.note = e.what();
  }
  return r;
}

AggregateResult aggregate(std::vector<TrialResult> results) {
  std::sort(results.begin(), results.end(),
            [](const TrialResult& a, const TrialResult& b) { return a.trial_index < b.trial_index; });
  AggregateResult out;
  std::size_t longest = 0;
  for (const auto& r : results) {
    if (r.flagged) {
      ++out.trials_flagged;
      continue;
    }
    ++out.trials_ok;
    out.mean_mse_analytic += r.analytic_mse;
    out.mean_mse_empirical += r.empirical_mse;
    out.mean_ser += r.mean_ser;
    out.mean_iters += r.iterations;
    longest = std::max(longest, r.trace.size());
  }
  if (out.trials_ok == 0) {
    throw EmptyAggregate("aggregate: all " + std::to_string(out.trials_flagged) + " trials were flagged");
  }
  const double n = out.trials_ok;
  out.mean_mse_analytic /= n;
  out.mean_mse_empirical /= n;
  out.mean_ser /= n;
  out.mean_iters /= n;
  out.mean_trace.assign(longest, 0.0);
  for (const auto& r : results) {
    if (r.flagged || r.trace.empty()) continue;
    for (std::size_t i = 0; i < longest; ++i) out.mean_trace[i] += r.trace[std::min(i, r.trace.size() - 1)];
  }
  for (auto& v : out.mean_trace) v /= n;
  return out;
}

std::vector<TrialResult> run_trials(const std::string& algorithm, const ExperimentConfig& config,
                                    const SweepPoint& point, int jobs) {
  const Designer designer = make_designer(algorithm, config.dims.direction);
  const auto total = static_cast<std::size_t>(std::max(config.trials, 0));
  std::vector<TrialResult> results(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < total; i = next++) {
      results[i] = run_trial(designer, config, point, i);
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

}  // namespace afrelay
