#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "afrelay/channel.hpp"
#include "afrelay/downlink.hpp"
#include "afrelay/uplink.hpp"

namespace afrelay {

/// Gray map: bits (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2).
Complex qpsk_modulate(int b0, int b1);
/// Nearest constellation point, returned as (b0, b1).
std::pair<int, int> qpsk_detect(Complex symbol);

struct SweepPoint {
  double first_hop_snr_db = 20.0;
  double second_hop_snr_db = 20.0;
};

struct ExperimentConfig {
  SystemDims dims;
  std::vector<SweepPoint> sweep;
  int symbols_per_stream = 10000;
  int trials = 500;
  std::uint64_t seed = 1;
  std::vector<std::string> algorithms;
  double threshold = 1e-4;
  int max_iter = 100;
};

/// Designer-independent view of a finished design: the generic chain
/// s -> S -> H1 -> (+n1) -> W -> H2 -> (+n2) -> E.
struct LinearChain {
  ComplexMatrix precoder;
  ComplexMatrix h1;
  HermitianMatrix relay_noise;
  ComplexMatrix forwarding;
  ComplexMatrix h2;
  HermitianMatrix destination_noise;
  ComplexMatrix equalizer;

  double analytic_mse() const;
};
LinearChain make_chain(const DownlinkDesign& design, const Scenario& scenario);
LinearChain make_chain(const UplinkDesign& design, const Scenario& scenario);

struct DesignOutcome {
  LinearChain chain;
  IterationTrace trace;
};

using Designer = std::function<DesignOutcome(const Scenario&, const ExperimentConfig&)>;

/// Algorithm ids accepted for a direction, in canonical order.
std::vector<std::string> known_algorithms(Direction direction);
/// true for ids whose designers iterate (and therefore produce a trace).
bool is_iterative(const std::string& algorithm);
Designer make_designer(const std::string& algorithm, Direction direction);

struct LinkStatistics {
  double empirical_mse = 0.0;
  /// Standard error of empirical_mse (per-symbol-vector sample sd / sqrt(N)).
  double standard_error = 0.0;
  std::vector<double> stream_ser;
  double mean_ser = 0.0;
  /// Trace of the sample covariance of the transmitted vectors.
  double transmit_power = 0.0;
};
/// QPSK transmission of `symbols` vectors through the chain.
LinkStatistics simulate_link(const LinearChain& chain, int symbols, std::uint64_t seed, std::uint64_t trial_index);

struct TrialResult {
  std::uint64_t trial_index = 0;
  double analytic_mse = 0.0;
  double empirical_mse = 0.0;
  double standard_error = 0.0;
  double mean_ser = 0.0;
  int iterations = 0;
  bool converged = false;
  bool flagged = false;
  std::string note;
  std::vector<double> trace;
};

TrialResult run_trial(const Designer& designer, const ExperimentConfig& config, const SweepPoint& point,
                      std::uint64_t trial_index);

class EmptyAggregate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AggregateResult {
  double mean_mse_analytic = 0.0;
  double mean_mse_empirical = 0.0;
  double mean_ser = 0.0;
  double mean_iters = 0.0;
  int trials_ok = 0;
  int trials_flagged = 0;
  /// Per-iteration mean of unflagged traces, shorter traces padded with their final value.
  std::vector<double> mean_trace;
};

/// Means over unflagged trials; independent of input order.
AggregateResult aggregate(std::vector<TrialResult> results);

/// Trials 0..config.trials-1 on `jobs` worker threads, sorted by trial index.
std::vector<TrialResult> run_trials(const std::string& algorithm, const ExperimentConfig& config,
                                    const SweepPoint& point, int jobs);

}  // namespace afrelay
