#include "afrelay/channel.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "afrelay/rng.hpp"

namespace afrelay {

// ---- RandomStream -----------------------------------------------------------

std::uint64_t RandomStream::splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t trial_index, StreamTag tag) {
  std::uint64_t key = splitmix64(seed);
  key = splitmix64(key ^ trial_index);
  key = splitmix64(key ^ static_cast<std::uint64_t>(tag));
  engine_.seed(key);
}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::standard_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Complex RandomStream::complex_normal(double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = standard_normal();
  const double im = standard_normal();
  return {s * re, s * im};
}

ComplexMatrix RandomStream::complex_gaussian(Eigen::Index rows, Eigen::Index cols, double variance) {
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = complex_normal(variance);
  }
  return m;
}

// ---- dimensions ---------------------------------------------------------------

const char* to_string(Direction d) { return d == Direction::downlink ? "downlink" : "uplink"; }

Direction parse_direction(const std::string& text) {
  if (text == "downlink") return Direction::downlink;
  if (text == "uplink") return Direction::uplink;
  throw InvalidInput("unknown direction '" + text + "'");
}

int SystemDims::total_streams() const {
  int l = 0;
  for (const auto& u : users) l += u.streams;
  return l;
}

void SystemDims::validate() const {
  if (n_base < 1) throw InvalidInput("n_base must be >= 1");
  if (n_relay < 1) throw InvalidInput("n_relay must be >= 1");
  if (users.empty()) throw InvalidInput("at least one user is required");
  for (std::size_t k = 0; k < users.size(); ++k) {
    if (users[k].n_mobile < 1) throw InvalidInput("user " + std::to_string(k) + ": n_mobile must be >= 1");
    if (users[k].streams < 1) throw InvalidInput("user " + std::to_string(k) + ": streams must be >= 1");
  }
}

void SystemDims::validate_stream_budget() const {
  validate();
  const int l = total_streams();
  if (l > n_base || l > n_relay) {
    throw InvalidInput("total streams " + std::to_string(l) + " exceed min(n_base, n_relay)");
  }
}

// ---- channels -----------------------------------------------------------------

void ChannelSet::check(const SystemDims& dims) const {
  auto expect = [](const ComplexMatrix& m, int r, int c, const std::string& what) {
    if (m.rows() != r || m.cols() != c) {
      throw InvalidInput(what + ": expected " + std::to_string(r) + "x" + std::to_string(c) + ", got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
  };
  if (direction != dims.direction) throw InvalidInput("channel direction does not match dims");
  const auto k = static_cast<std::size_t>(dims.num_users());
  if (direction == Direction::downlink) {
    if (first_hop.size() != 1 || second_hop.size() != k) throw InvalidInput("downlink channel count mismatch");
    expect(first_hop[0], dims.n_relay, dims.n_base, "H_BR");
    for (std::size_t u = 0; u < k; ++u) expect(second_hop[u], dims.users[u].n_mobile, dims.n_relay, "H_RM,k");
  } else {
    if (first_hop.size() != k || second_hop.size() != 1) throw InvalidInput("uplink channel count mismatch");
    for (std::size_t u = 0; u < k; ++u) expect(first_hop[u], dims.n_relay, dims.users[u].n_mobile, "H_MR,k");
    expect(second_hop[0], dims.n_base, dims.n_relay, "H_RB");
  }
}

ComplexMatrix ChannelSet::stacked_user_channels() const {
  if (direction == Direction::downlink) {
    Eigen::Index rows = 0;
    for (const auto& h : second_hop) rows += h.rows();
    ComplexMatrix out(rows, second_hop.empty() ? 0 : second_hop[0].cols());
    Eigen::Index r = 0;
    for (const auto& h : second_hop) {
      out.middleRows(r, h.rows()) = h;
      r += h.rows();
    }
    return out;
  }
  Eigen::Index cols = 0;
  for (const auto& h : first_hop) cols += h.cols();
  ComplexMatrix out(first_hop.empty() ? 0 : first_hop[0].rows(), cols);
  Eigen::Index c = 0;
  for (const auto& h : first_hop) {
    out.middleCols(c, h.cols()) = h;
    c += h.cols();
  }
  return out;
}

HermitianMatrix NoiseModel::stacked_destination() const { return block_diag(destination); }

double PowerBudget::total_source() const {
  double s = 0.0;
  for (double p : source) s += p;
  return s;
}

void PowerBudget::validate() const {
  if (source.empty()) throw InvalidInput("power budget: no source power given");
  for (double p : source) {
    if (!(p > 0.0)) throw InvalidInput("power budget: source power must be positive");
  }
  if (!(relay > 0.0)) throw InvalidInput("power budget: relay power must be positive");
}

ChannelSet sample_rayleigh(const SystemDims& dims, std::uint64_t seed, std::uint64_t trial_index) {
  dims.validate();
  RandomStream rng(seed, trial_index, StreamTag::channel);
  ChannelSet ch;
  ch.direction = dims.direction;
  if (dims.direction == Direction::downlink) {
    ch.first_hop.push_back(rng.complex_gaussian(dims.n_relay, dims.n_base));
    for (const auto& u : dims.users) ch.second_hop.push_back(rng.complex_gaussian(u.n_mobile, dims.n_relay));
  } else {
    for (const auto& u : dims.users) ch.first_hop.push_back(rng.complex_gaussian(dims.n_relay, u.n_mobile));
    ch.second_hop.push_back(rng.complex_gaussian(dims.n_base, dims.n_relay));
  }
  return ch;
}

HermitianMatrix snr_to_noise(double snr_db, double power, int dim) {
  if (!(power > 0.0)) throw InvalidInput("snr_to_noise: power must be positive");
  const double variance = power / std::pow(10.0, snr_db / 10.0);
  return variance * HermitianMatrix::Identity(dim, dim);
}

Scenario make_scenario(const SystemDims& dims, const ChannelSet& channels, double first_hop_snr_db,
                       double second_hop_snr_db) {
  channels.check(dims);
  Scenario sc;
  sc.dims = dims;
  sc.channels = channels;
  sc.budget.relay = 1.0;
  if (dims.direction == Direction::downlink) {
    sc.budget.source = {1.0};
    sc.noise.relay = snr_to_noise(first_hop_snr_db, 1.0, dims.n_relay);
    for (const auto& u : dims.users) {
      sc.noise.destination.push_back(snr_to_noise(second_hop_snr_db, sc.budget.relay, u.n_mobile));
    }
  } else {
    const double per_user = 1.0 / dims.num_users();
    sc.budget.source.assign(static_cast<std::size_t>(dims.num_users()), per_user);
    sc.noise.relay = snr_to_noise(first_hop_snr_db, 1.0, dims.n_relay);
    sc.noise.destination.push_back(snr_to_noise(second_hop_snr_db, sc.budget.relay, dims.n_base));
  }
  return sc;
}

// ---- text I/O -----------------------------------------------------------------

void write_matrix(std::ostream& out, const ComplexMatrix& m) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(17);
  s << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) s << m(i, j).real() << ' ' << m(i, j).imag() << '\n';
  }
  out << s.str();
}

ComplexMatrix read_matrix(std::istream& in) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) throw InvalidInput("read_matrix: bad header");
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double re = 0.0;
      double im = 0.0;
      if (!(in >> re >> im)) throw InvalidInput("read_matrix: truncated entries");
      m(i, j) = {re, im};
    }
  }
  return m;
}

void write_channels(std::ostream& out, const ChannelSet& channels) {
  out << "afrelay-channels 1\n";
  out << "direction " << to_string(channels.direction) << '\n';
  out << "first_hop " << channels.first_hop.size() << '\n';
  for (const auto& m : channels.first_hop) write_matrix(out, m);
  out << "second_hop " << channels.second_hop.size() << '\n';
  for (const auto& m : channels.second_hop) write_matrix(out, m);
}

ChannelSet read_channels(std::istream& in) {
  const std::locale old = in.imbue(std::locale::classic());
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "afrelay-channels" || version != 1) {
    throw InvalidInput("read_channels: bad header");
  }
  ChannelSet ch;
  std::string dir;
  if (!(in >> word >> dir) || word != "direction") throw InvalidInput("read_channels: missing direction");
  ch.direction = parse_direction(dir);
  for (auto* list : {&ch.first_hop, &ch.second_hop}) {
    std::size_t count = 0;
    if (!(in >> word >> count)) throw InvalidInput("read_channels: missing hop header");
    const char* expected = list == &ch.first_hop ? "first_hop" : "second_hop";
    if (word != expected) throw InvalidInput(std::string("read_channels: expected ") + expected);
    for (std::size_t i = 0; i < count; ++i) list->push_back(read_matrix(in));
  }
  in.imbue(old);
  return ch;
}

}  // namespace afrelay
