#pragma once

#include <string>
#include <vector>

#include "afrelay/channel.hpp"
#include "afrelay/sdp.hpp"
#include "afrelay/two_hop.hpp"

namespace afrelay {

/// Downlink triple (T, W, {G_k}).
struct DownlinkDesign {
  ComplexMatrix precoder;                 // T, N_B x L
  ComplexMatrix forwarding;               // W, N_R x N_R
  std::vector<ComplexMatrix> equalizers;  // G_k, L_k x N_M,k
  double lambda = 0.0;

  ComplexMatrix stacked_equalizer() const { return block_diag(equalizers); }
};

/// MSE after initialization followed by one entry per completed iteration.
struct IterationTrace {
  std::vector<double> mse;
  int iterations = 0;
  bool converged = false;
  std::string note;
  /// Relaxed uplink regime (N_M,k > L_k) only: objective at the extracted
  /// precoders minus the relaxed SDP objective, one entry per iteration.
  std::vector<double> relaxation_gap;
};

enum class DownlinkInit { identity, separate_lmmse };

struct DownlinkOptions {
  DownlinkInit init = DownlinkInit::identity;
  double threshold = 1e-4;
  int max_iter = 100;
  /// false keeps T at its initial value (fixed-precoder variant).
  bool optimize_precoder = true;
  SdpSettings sdp;
};

struct DownlinkResult {
  DownlinkDesign design;
  IterationTrace trace;
};

/// R_r = H_BR T T^H H_BR^H + R_eta.
HermitianMatrix received_covariance(const ComplexMatrix& precoder, const ChannelSet& channels,
                                    const NoiseModel& noise);

double mse_downlink(const std::vector<ComplexMatrix>& equalizers, const ComplexMatrix& forwarding,
                    const ComplexMatrix& precoder, const ChannelSet& channels, const NoiseModel& noise);
double mse_downlink(const DownlinkDesign& design, const Scenario& scenario);

/// Per-user Wiener equalizers for fixed (W, T).
std::vector<ComplexMatrix> update_equalizers(const ComplexMatrix& forwarding, const ComplexMatrix& precoder,
                                             const ChannelSet& channels, const NoiseModel& noise,
                                             const SystemDims& dims);

/// f(lambda) machinery of the relay subproblem for fixed (G, T).
RelayPowerMap downlink_relay_map(const std::vector<ComplexMatrix>& equalizers, const ComplexMatrix& precoder,
                                 const ChannelSet& channels, const NoiseModel& noise);

struct RelayEvaluation {
  ComplexMatrix forwarding;
  double power = 0.0;
};
/// W(lambda) and Tr(W R_r W^H). Throws InvalidInput when lambda = 0 and the
/// Gram matrix is singular.
RelayEvaluation relay_mse_power(double lambda, const std::vector<ComplexMatrix>& equalizers,
                                const ComplexMatrix& precoder, const ChannelSet& channels,
                                const NoiseModel& noise);

RelayMultiplier solve_relay_multiplier(const std::vector<ComplexMatrix>& equalizers,
                                       const ComplexMatrix& precoder, const ChannelSet& channels,
                                       const NoiseModel& noise, double relay_budget);

/// Epigraph SDP over x = (t, Re vec T, Im vec T). The sum MSE at T equals
/// t* + constant at the optimum.
struct PrecoderSdp {
  SdpProblem problem;
  double constant = 0.0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  ComplexMatrix extract(const RealVector& x) const;
};
PrecoderSdp build_precoder_sdp(const ComplexMatrix& forwarding, const std::vector<ComplexMatrix>& equalizers,
                               const ChannelSet& channels, const NoiseModel& noise, const SystemDims& dims,
                               double source_budget, double relay_budget);

/// Scaled identities saturating both budgets, then Wiener equalizers.
DownlinkDesign identity_init(const Scenario& scenario);
/// Point-to-point first hop, short alternation on the second hop, W = W_2 W_1.
DownlinkDesign separate_lmmse_init(const Scenario& scenario);

DownlinkResult run_algorithm1(const Scenario& scenario, const DownlinkOptions& options = {});
/// Same loop started from a caller-supplied design.
DownlinkResult run_algorithm1(const Scenario& scenario, DownlinkDesign start, const DownlinkOptions& options);

/// Relay output power Tr(W R_r W^H).
double downlink_relay_power(const ComplexMatrix& forwarding, const ComplexMatrix& precoder,
                            const ChannelSet& channels, const NoiseModel& noise);

}  // namespace afrelay
