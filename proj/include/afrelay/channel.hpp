#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "afrelay/linalg.hpp"

namespace afrelay {

enum class Direction { downlink, uplink };

const char* to_string(Direction d);
Direction parse_direction(const std::string& text);

struct UserDims {
  int n_mobile = 2;
  int streams = 2;
};

/// Antenna and stream counts of one relay cell.
struct SystemDims {
  int n_base = 4;
  int n_relay = 4;
  std::vector<UserDims> users{{2, 2}, {2, 2}};
  Direction direction = Direction::downlink;

  int num_users() const { return static_cast<int>(users.size()); }
  int total_streams() const;
  /// Throws InvalidInput when a count is below one.
  void validate() const;
  /// Additionally requires total streams <= min(n_base, n_relay).
  void validate_stream_budget() const;
};

/// One channel realization under the convention output = H * input.
///
/// Downlink: first_hop = {H_BR (N_R x N_B)}, second_hop = {H_RM,k (N_M,k x N_R)}.
/// Uplink:   first_hop = {H_MR,k (N_R x N_M,k)}, second_hop = {H_RB (N_B x N_R)}.
struct ChannelSet {
  Direction direction = Direction::downlink;
  std::vector<ComplexMatrix> first_hop;
  std::vector<ComplexMatrix> second_hop;

  /// Throws InvalidInput when shapes disagree with dims.
  void check(const SystemDims& dims) const;
  /// Downlink: rows of all H_RM,k stacked. Uplink: [H_MR,1 ... H_MR,K].
  ComplexMatrix stacked_user_channels() const;
};

/// Downlink: relay = R_eta, destination = {R_v,k}. Uplink: relay = R_n,
/// destination = {R_xi}.
struct NoiseModel {
  HermitianMatrix relay;
  std::vector<HermitianMatrix> destination;

  /// Block-diagonal destination covariance (R_v in the downlink).
  HermitianMatrix stacked_destination() const;
};

/// Downlink uses source[0] = P_s; uplink uses source[k] = P_s,k.
struct PowerBudget {
  std::vector<double> source;
  double relay = 1.0;

  double total_source() const;
  void validate() const;
};

/// One full problem instance handed to the designers.
struct Scenario {
  SystemDims dims;
  ChannelSet channels;
  NoiseModel noise;
  PowerBudget budget;
};

ChannelSet sample_rayleigh(const SystemDims& dims, std::uint64_t seed, std::uint64_t trial_index = 0);

/// sigma^2 I with sigma^2 = power / 10^(snr_db / 10).
HermitianMatrix snr_to_noise(double snr_db, double power, int dim);

/// Unit-power scenario at the given hop SNRs. Downlink: P_s = P_r = 1,
/// R_eta from first_hop_snr_db, R_v,k from second_hop_snr_db. Uplink:
/// P_s,k = 1/K (so sum P_s,k = 1), P_r = 1, R_n and R_xi likewise.
Scenario make_scenario(const SystemDims& dims, const ChannelSet& channels, double first_hop_snr_db,
                       double second_hop_snr_db);

/// Text format for regression fixtures:
///
///   afrelay-channels 1
///   direction <downlink|uplink>
///   first_hop <count>
///   <rows> <cols>
///   <re> <im>          rows*cols lines, row-major
///   ...
///   second_hop <count>
///   ...
void write_channels(std::ostream& out, const ChannelSet& channels);
ChannelSet read_channels(std::istream& in);

void write_matrix(std::ostream& out, const ComplexMatrix& m);
ComplexMatrix read_matrix(std::istream& in);

}  // namespace afrelay
