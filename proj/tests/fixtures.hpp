#pragma once

#include "afrelay/channel.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace afrelay;

inline SystemDims standard_dims(Direction d) {
  SystemDims s;
  s.direction = d;
  return s;
}

inline Scenario standard(Direction d, std::uint64_t trial, double snr1 = 20.0, double snr2 = 20.0) {
  const SystemDims dims = standard_dims(d);
  return make_scenario(dims, sample_rayleigh(dims, 1, trial), snr1, snr2);
}

inline Scenario with_dims(SystemDims dims, std::uint64_t seed, std::uint64_t trial, double snr1, double snr2) {
  return make_scenario(dims, sample_rayleigh(dims, seed, trial), snr1, snr2);
}

/// One-antenna, one-stream chain with given scalars.
inline Scenario scalar(Direction d, Complex h1, Complex h2, double relay_noise, double dest_noise, double ps = 1.0,
                       double pr = 1.0) {
  Scenario s;
  s.dims.n_base = s.dims.n_relay = 1;
  s.dims.users = {{1, 1}};
  s.dims.direction = d;
  s.channels.direction = d;
  s.channels.first_hop = {ComplexMatrix::Constant(1, 1, h1)};
  s.channels.second_hop = {ComplexMatrix::Constant(1, 1, h2)};
  s.noise.relay = ComplexMatrix::Constant(1, 1, relay_noise);
  s.noise.destination = {ComplexMatrix::Constant(1, 1, dest_noise)};
  s.budget.source = {ps};
  s.budget.relay = pr;
  return s;
}

}  // namespace fixture
