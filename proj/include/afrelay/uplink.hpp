#pragma once

#include <vector>

#include "afrelay/channel.hpp"
#include "afrelay/downlink.hpp"
#include "afrelay/sdp.hpp"
#include "afrelay/two_hop.hpp"

namespace afrelay {

/// Uplink triple ({P_k}, F, B).
struct UplinkDesign {
  std::vector<ComplexMatrix> precoders;  // P_k, N_M,k x L_k
  ComplexMatrix forwarding;              // F, N_R x N_R
  ComplexMatrix equalizer;               // B, L x N_B
  double mu_f = 0.0;                     // water-filling multiplier of the F~ step
  double lambda = 0.0;                   // KKT multiplier of the relay step (Algorithm-1 variant)

  ComplexMatrix stacked_precoder() const { return block_diag(precoders); }
};

struct UplinkOptions {
  double threshold = 1e-4;
  int max_iter = 100;
  SdpSettings sdp;
};

struct UplinkResult {
  UplinkDesign design;
  IterationTrace trace;
};

/// H_MR P P^H H_MR^H + R_n.
HermitianMatrix relay_received_covariance(const std::vector<ComplexMatrix>& precoders, const ChannelSet& channels,
                                          const NoiseModel& noise);
double uplink_relay_power(const ComplexMatrix& forwarding, const std::vector<ComplexMatrix>& precoders,
                          const ChannelSet& channels, const NoiseModel& noise);

/// Sum MSE for an arbitrary equalizer B.
double mse_uplink(const ComplexMatrix& equalizer, const ComplexMatrix& forwarding,
                  const std::vector<ComplexMatrix>& precoders, const ChannelSet& channels, const NoiseModel& noise);
double mse_uplink(const UplinkDesign& design, const Scenario& scenario);

/// Wiener equalizer at the base station.
ComplexMatrix equalizer_b(const ComplexMatrix& forwarding, const std::vector<ComplexMatrix>& precoders,
                          const ChannelSet& channels, const NoiseModel& noise);

/// Xi = R_n^{-1/2} H_MR P P^H H_MR^H R_n^{-1/2} + I.
HermitianMatrix xi_matrix(const std::vector<ComplexMatrix>& precoders, const ChannelSet& channels,
                          const NoiseModel& noise);
/// M = H_RB^H R_xi^{-1} H_RB.
HermitianMatrix m_matrix(const ChannelSet& channels, const NoiseModel& noise);
/// Theta = (Xi^{-1/2} R_n^{-1/2} H_MR P)(.)^H.
HermitianMatrix theta_matrix(const std::vector<ComplexMatrix>& precoders, const ChannelSet& channels,
                             const NoiseModel& noise);
/// Pi = (H_RB F~)^H (H_RB F~ F~^H H_RB^H + R_xi)^{-1} (H_RB F~).
HermitianMatrix pi_matrix(const ComplexMatrix& f_tilde, const ChannelSet& channels, const NoiseModel& noise);

/// F = F~ Xi^{-1/2} R_n^{-1/2} and its inverse map.
ComplexMatrix forwarding_from_tilde(const ComplexMatrix& f_tilde, const std::vector<ComplexMatrix>& precoders,
                                    const ChannelSet& channels, const NoiseModel& noise);
ComplexMatrix tilde_from_forwarding(const ComplexMatrix& forwarding, const std::vector<ComplexMatrix>& precoders,
                                    const ChannelSet& channels, const NoiseModel& noise);

/// Equivalent forms of the MSE with the Wiener B substituted.
/// L - Tr(A^H C^{-1} A) in terms of (F, P).
double mse_uplink_optimal_b(const ComplexMatrix& forwarding, const std::vector<ComplexMatrix>& precoders,
                            const ChannelSet& channels, const NoiseModel& noise);
/// Same in terms of (F~, P).
double mse_uplink_tilde(const ComplexMatrix& f_tilde, const std::vector<ComplexMatrix>& precoders,
                        const ChannelSet& channels, const NoiseModel& noise);
/// Tr(Theta (F~^H M F~ + I)^{-1}) + Tr((P^H H_MR^H R_n^{-1} H_MR P + I)^{-1}).
double mse_uplink_inversion(const ComplexMatrix& f_tilde, const std::vector<ComplexMatrix>& precoders,
                            const ChannelSet& channels, const NoiseModel& noise);
/// L - Tr(Pi (I - Xi^{-1})).
double mse_uplink_projected(const ComplexMatrix& f_tilde, const std::vector<ComplexMatrix>& precoders,
                            const ChannelSet& channels, const NoiseModel& noise);
/// Tr(Pi Xi^{-1}) + L - Tr(Pi).
double mse_uplink_split(const ComplexMatrix& f_tilde, const std::vector<ComplexMatrix>& precoders,
                        const ChannelSet& channels, const NoiseModel& noise);

struct ForwardingSolution {
  ComplexMatrix f_tilde;
  ComplexMatrix forwarding;
  double mu_f = 0.0;
};
/// Water-filling F~ over the top-L modes of Theta and M; exact relay budget
/// whenever F~ != 0.
ForwardingSolution forwarding_closed_form(const std::vector<ComplexMatrix>& precoders, const ChannelSet& channels,
                                          const NoiseModel& noise, double relay_budget, int streams);

struct PrecoderCovariances {
  std::vector<HermitianMatrix> q;
  /// Optimal Tr(X) = Tr(Pi (R_n^{-1/2} sum_k H_k Q_k H_k^H R_n^{-1/2} + I)^{-1}).
  double objective = 0.0;
  SdpStatus status = SdpStatus::numerical_failure;
};
/// Covariance SDP for fixed Pi, with per-user trace budgets.
PrecoderCovariances precoder_sdp_uplink(const HermitianMatrix& pi, const ChannelSet& channels,
                                        const NoiseModel& noise, const std::vector<double>& budgets,
                                        const SdpSettings& settings = {});
/// Tr(Pi (R_n^{-1/2} sum_k H_k Q_k H_k^H R_n^{-1/2} + I)^{-1}).
double covariance_objective(const HermitianMatrix& pi, const std::vector<HermitianMatrix>& q,
                            const ChannelSet& channels, const NoiseModel& noise);

/// P_k from Q_k: [Q^{1/2}, 0] when N_M,k <= L_k, otherwise the leading L_k
/// columns of U Lambda^{1/2}.
ComplexMatrix extract_precoder(const HermitianMatrix& q, int streams);

/// Water-filling precoder for one user given Pi.
ComplexMatrix closed_form_precoder(const HermitianMatrix& pi, const ComplexMatrix& h_mr, const HermitianMatrix& r_n,
                                   double budget, int streams, double* mu = nullptr);
ComplexMatrix closed_form_precoder_single_user(const ComplexMatrix& f_tilde, const ChannelSet& channels,
                                               const NoiseModel& noise, double budget, int streams,
                                               double* mu = nullptr);

/// Scaled truncated identities saturating every budget, Wiener B.
UplinkDesign uplink_identity_init(const Scenario& scenario);

/// Alternates F~ (closed form) and Q_k (SDP).
UplinkResult run_algorithm2(const Scenario& scenario, const UplinkOptions& options = {});
/// Alternates B, F (KKT + bisection) and P (SDP over the block-diagonal P).
UplinkResult run_algorithm1_uplink(const Scenario& scenario, const UplinkOptions& options = {});
UplinkResult run_algorithm1_uplink(const Scenario& scenario, UplinkDesign start, const UplinkOptions& options);

/// Relay multiplier step of the Algorithm-1 variant for fixed (B, P).
RelayPowerMap uplink_relay_map(const ComplexMatrix& equalizer, const std::vector<ComplexMatrix>& precoders,
                               const ChannelSet& channels, const NoiseModel& noise);

/// Epigraph SDP over x = (t, Re p, Im p) with p = [vec P_1; ...; vec P_K].
struct UplinkPrecoderSdp {
  SdpProblem problem;
  double constant = 0.0;
  std::vector<Eigen::Index> offsets;  // start of vec P_k inside p
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;

  std::vector<ComplexMatrix> extract(const RealVector& x) const;
};
UplinkPrecoderSdp build_uplink_precoder_sdp(const ComplexMatrix& equalizer, const ComplexMatrix& forwarding,
                                            const Scenario& scenario);

}  // namespace afrelay
