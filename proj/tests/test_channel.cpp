#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "afrelay/channel.hpp"
#include "afrelay/rng.hpp"

using namespace afrelay;

namespace {
SystemDims standard_dims(Direction d) {
  SystemDims s;
  s.direction = d;
  return s;
}
}  // namespace

TEST_CASE("sampling is deterministic and shaped by the dims") {
  const SystemDims dims = standard_dims(Direction::downlink);
  const ChannelSet a = sample_rayleigh(dims, 7, 3);
  const ChannelSet b = sample_rayleigh(dims, 7, 3);
  CHECK(a.first_hop.front() == b.first_hop.front());
  CHECK(a.second_hop[1] == b.second_hop[1]);
  CHECK(a.first_hop.front().rows() == 4);
  CHECK(a.first_hop.front().cols() == 4);
  REQUIRE(a.second_hop.size() == 2);
  CHECK(a.second_hop[0].rows() == 2);
  CHECK(a.second_hop[0].cols() == 4);
  CHECK_NOTHROW(a.check(dims));

  const ChannelSet c = sample_rayleigh(dims, 7, 4);
  CHECK(c.first_hop.front() != a.first_hop.front());
  const ChannelSet d = sample_rayleigh(dims, 8, 3);
  CHECK(d.first_hop.front() != a.first_hop.front());
}

TEST_CASE("uplink shapes follow output = H input") {
  SystemDims dims = standard_dims(Direction::uplink);
  dims.users = {{3, 1}, {2, 2}};
  dims.n_base = 5;
  const ChannelSet ch = sample_rayleigh(dims, 1);
  CHECK(ch.first_hop[0].rows() == 4);
  CHECK(ch.first_hop[0].cols() == 3);
  CHECK(ch.first_hop[1].cols() == 2);
  CHECK(ch.second_hop.front().rows() == 5);
  CHECK(ch.second_hop.front().cols() == 4);
  CHECK(ch.stacked_user_channels().cols() == 5);
}

TEST_CASE("entries have unit variance and split evenly between real and imaginary parts") {
  SystemDims dims;
  dims.n_base = 50;
  dims.n_relay = 50;
  dims.users = {{4, 1}};
  const ChannelSet ch = sample_rayleigh(dims, 2);
  const ComplexMatrix& h = ch.first_hop.front();  // 2500 entries
  const auto n = static_cast<double>(h.size());
  double m2 = 0.0, m4 = 0.0, re2 = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const double a = std::norm(h(i));
    m2 += a;
    m4 += a * a;
    re2 += h(i).real() * h(i).real();
  }
  m2 /= n;
  m4 /= n;
  re2 /= n;
  const double sd = std::sqrt((m4 - m2 * m2) / n);
  CHECK(std::abs(m2 - 1.0) < 3.0 * sd);
  CHECK(std::abs(re2 - 0.5) < 0.05);

  // 10^4 entries through the stream directly
  RandomStream rng(5, 0, StreamTag::channel);
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double a = std::norm(rng.complex_normal());
    s += a;
    s2 += a * a;
  }
  const double mean = s / 1e4;
  CHECK(std::abs(mean - 1.0) < 3.0 * std::sqrt((s2 / 1e4 - mean * mean) / 1e4));
}

TEST_CASE("streams with different tags are independent") {
  RandomStream a(1, 0, StreamTag::symbols);
  RandomStream b(1, 0, StreamTag::noise);
  CHECK(a.next_u64() != b.next_u64());
  RandomStream u(9);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("snr to noise") {
  CHECK((snr_to_noise(0.0, 1.0, 3) - ComplexMatrix::Identity(3, 3)).norm() < 1e-15);
  CHECK((snr_to_noise(20.0, 1.0, 2) - 0.01 * ComplexMatrix::Identity(2, 2)).norm() < 1e-15);
  CHECK((snr_to_noise(10.0, 2.0, 2) - 0.2 * ComplexMatrix::Identity(2, 2)).norm() < 1e-15);
  double prev = snr_to_noise(-10.0, 1.0, 1)(0, 0).real();
  for (double snr = -9.0; snr <= 40.0; snr += 1.0) {
    const double v = snr_to_noise(snr, 1.0, 1)(0, 0).real();
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("scenario budgets and noise") {
  const SystemDims up = standard_dims(Direction::uplink);
  const Scenario s = make_scenario(up, sample_rayleigh(up, 1), 20.0, 10.0);
  REQUIRE(s.budget.source.size() == 2);
  CHECK(s.budget.source[0] == doctest::Approx(0.5));
  CHECK(s.budget.total_source() == doctest::Approx(1.0));
  CHECK(s.budget.relay == doctest::Approx(1.0));
  CHECK(s.noise.relay(0, 0).real() == doctest::Approx(0.01));
  CHECK(s.noise.destination.front()(0, 0).real() == doctest::Approx(0.1));

  const SystemDims down = standard_dims(Direction::downlink);
  const Scenario d = make_scenario(down, sample_rayleigh(down, 1), 30.0, 20.0);
  CHECK(d.noise.stacked_destination().rows() == 4);
  CHECK(d.noise.relay(0, 0).real() == doctest::Approx(0.001));
}

TEST_CASE("dims validation") {
  SystemDims d;
  d.n_relay = 0;
  CHECK_THROWS_AS(d.validate(), InvalidInput);
  SystemDims e;
  e.users = {{2, 3}, {2, 2}};
  CHECK_THROWS_AS(e.validate_stream_budget(), InvalidInput);
  CHECK(e.total_streams() == 5);
  CHECK(parse_direction("uplink") == Direction::uplink);
  CHECK_THROWS_AS(parse_direction("sideways"), InvalidInput);
}

TEST_CASE("channel text format round trips") {
  const SystemDims dims = standard_dims(Direction::uplink);
  const ChannelSet ch = sample_rayleigh(dims, 4);
  std::stringstream ss;
  write_channels(ss, ch);
  const ChannelSet back = read_channels(ss);
  CHECK(back.direction == Direction::uplink);
  REQUIRE(back.first_hop.size() == 2);
  CHECK(back.first_hop[1] == ch.first_hop[1]);
  CHECK(back.second_hop[0] == ch.second_hop[0]);

  std::stringstream bad("afrelay-channels 2\n");
  CHECK_THROWS_AS(read_channels(bad), InvalidInput);
}
