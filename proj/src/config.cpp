#include "afrelay/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace afrelay {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

// Parse state kept separately from the config: per-user lists may arrive
// before num_users.
struct Pending {
  ConfigFile file;
  int num_users = 2;
  std::vector<int> n_mobile{2};
  std::vector<int> streams{2};
  int n_mobile_line = 0;
  int streams_line = 0;
  std::vector<double> first;
  std::vector<double> second;
  bool first_given = false;
  bool second_given = false;
};

long long parse_int(const std::string& v, const std::string& key, int line) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, x);
  if (v.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'", line);
  }
  return x;
}

double parse_real(const std::string& v, const std::string& key, int line) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, x);
  if (v.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(x)) {
    throw ConfigError("'" + key + "' expects a real number, got '" + v + "'", line);
  }
  return x;
}

int parse_count(const std::string& v, const std::string& key, int line) {
  const long long x = parse_int(v, key, line);
  if (x < -1000000000LL || x > 1000000000LL) throw ConfigError("'" + key + "' is out of range", line);
  return static_cast<int>(x);
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key, int line) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back(parse_count(item, key, line));
  return out;
}

std::vector<double> parse_real_list(const std::string& v, const std::string& key, int line) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_real(item, key, line));
  return out;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& sections() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> table{
      {"system", {"direction", "n_base", "n_relay", "num_users", "n_mobile", "streams"}},
      {"sweep", {"first_hop_snr_db", "second_hop_snr_db"}},
      {"run", {"symbols_per_stream", "trials", "seed", "algorithms", "threshold", "max_iter"}},
  };
  return table;
}

std::string section_of(const std::string& key) {
  for (const auto& [sec, keys] : sections()) {
    if (std::find(keys.begin(), keys.end(), key) != keys.end()) return sec;
  }
  return {};
}

void assign(Pending& p, const std::string& section, const std::string& key, const std::string& value, int line) {
  const std::string owner = section_of(key);
  if (owner.empty()) throw ConfigError("unknown key '" + key + "'", line);
  if (!section.empty() && owner != section) {
    throw ConfigError("key '" + key + "' belongs in [" + owner + "], not [" + section + "]", line);
  }
  ExperimentConfig& c = p.file.experiment;
  if (key == "direction") {
    try {
      c.dims.direction = parse_direction(value);
    } catch (const std::exception& e) {
      throw ConfigError(e.what(), line);
    }
    p.file.direction_given = true;
  } else if (key == "n_base") {
    c.dims.n_base = parse_count(value, key, line);
  } else if (key == "n_relay") {
    c.dims.n_relay = parse_count(value, key, line);
  } else if (key == "num_users") {
    p.num_users = parse_count(value, key, line);
  } else if (key == "n_mobile") {
    p.n_mobile = parse_int_list(value, key, line);
    p.n_mobile_line = line;
  } else if (key == "streams") {
    p.streams = parse_int_list(value, key, line);
    p.streams_line = line;
  } else if (key == "first_hop_snr_db") {
    p.first = parse_real_list(value, key, line);
    p.first_given = true;
  } else if (key == "second_hop_snr_db") {
    p.second = parse_real_list(value, key, line);
    p.second_given = true;
  } else if (key == "symbols_per_stream") {
    c.symbols_per_stream = parse_count(value, key, line);
  } else if (key == "trials") {
    c.trials = parse_count(value, key, line);
  } else if (key == "seed") {
    const long long s = parse_int(value, key, line);
    if (s < 0) throw ConfigError("'seed' must be non-negative", line);
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "algorithms") {
    c.algorithms.clear();
    for (const auto& a : split_list(value)) {
      if (a.empty()) throw ConfigError("empty entry in 'algorithms'", line);
      c.algorithms.push_back(a);
    }
    p.file.algorithms_given = true;
  } else if (key == "threshold") {
    c.threshold = parse_real(value, key, line);
  } else if (key == "max_iter") {
    c.max_iter = parse_count(value, key, line);
  }
}

std::vector<int> broadcast(const std::vector<int>& v, int k, const char* key, int line) {
  if (v.size() == 1) return std::vector<int>(static_cast<std::size_t>(std::max(k, 0)), v.front());
  if (static_cast<int>(v.size()) != k) {
    throw ConfigError(std::string("'") + key + "' lists " + std::to_string(v.size()) + " values for " +
                      std::to_string(k) + " users",
                      line);
  }
  return v;
}

void finish(Pending& p) {
  ExperimentConfig& c = p.file.experiment;
  if (p.num_users < 1) throw ConfigError("num_users must be at least 1");
  const auto nm = broadcast(p.n_mobile, p.num_users, "n_mobile", p.n_mobile_line);
  const auto ls = broadcast(p.streams, p.num_users, "streams", p.streams_line);
  c.dims.users.clear();
  for (int k = 0; k < p.num_users; ++k) c.dims.users.push_back({nm[k], ls[k]});

  p.file.sweep_given = p.first_given || p.second_given;
  const auto defaults = default_sweep(c.dims.direction);
  if (!p.first_given) {
    p.first.clear();
    for (const auto& pt : defaults) {
      if (std::find(p.first.begin(), p.first.end(), pt.first_hop_snr_db) == p.first.end()) {
        p.first.push_back(pt.first_hop_snr_db);
      }
    }
  }
  if (!p.second_given) {
    p.second.clear();
    for (const auto& pt : defaults) {
      if (std::find(p.second.begin(), p.second.end(), pt.second_hop_snr_db) == p.second.end()) {
        p.second.push_back(pt.second_hop_snr_db);
      }
    }
  }
  c.sweep.clear();
  for (double a : p.first) {
    for (double b : p.second) c.sweep.push_back({a, b});
  }
  validate(c);
}

Pending parse_into(const std::string& text) {
  Pending p;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s.erase(hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header '" + s + "'", line);
      section = trim(s.substr(1, s.size() - 2));
      const auto& table = sections();
      if (std::none_of(table.begin(), table.end(), [&](const auto& e) { return e.first == section; })) {
        throw ConfigError("unknown section [" + section + "]", line);
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + s + "'", line);
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError("missing key before '='", line);
    assign(p, section, key, trim(s.substr(eq + 1)), line);
  }
  return p;
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

std::vector<SweepPoint> default_sweep(Direction direction) {
  std::vector<SweepPoint> out;
  for (double snr : {0.0, 10.0, 20.0, 30.0}) {
    out.push_back(direction == Direction::downlink ? SweepPoint{snr, 20.0} : SweepPoint{20.0, snr});
  }
  return out;
}

void validate(const ExperimentConfig& c) {
  try {
    c.dims.validate();
    c.dims.validate_stream_budget();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (c.sweep.empty()) throw ConfigError("sweep is empty");
  if (c.symbols_per_stream < 2) throw ConfigError("symbols_per_stream must be at least 2");
  if (c.trials < 1) throw ConfigError("trials must be at least 1");
  if (!(c.threshold > 0.0)) throw ConfigError("threshold must be positive");
  if (c.max_iter < 1) throw ConfigError("max_iter must be at least 1");
}

ConfigFile parse_config(const std::string& text) {
  Pending p = parse_into(text);
  finish(p);
  return p.file;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(ConfigFile& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  std::string section;
  if (const auto dot = key.find('.'); dot != std::string::npos) {
    section = key.substr(0, dot);
    key = key.substr(dot + 1);
  }

  // Rebuild the pending state from the current config, apply, re-finish.
  Pending p;
  p.file = config;
  const ExperimentConfig& c = config.experiment;
  p.num_users = c.dims.num_users();
  p.n_mobile.clear();
  p.streams.clear();
  for (const auto& u : c.dims.users) {
    p.n_mobile.push_back(u.n_mobile);
    p.streams.push_back(u.streams);
  }
  for (const auto& pt : c.sweep) {
    if (std::find(p.first.begin(), p.first.end(), pt.first_hop_snr_db) == p.first.end()) {
      p.first.push_back(pt.first_hop_snr_db);
    }
    if (std::find(p.second.begin(), p.second.end(), pt.second_hop_snr_db) == p.second.end()) {
      p.second.push_back(pt.second_hop_snr_db);
    }
  }
  // An untouched default sweep follows a direction change.
  p.first_given = p.second_given = config.sweep_given;
  if (!section.empty() && std::none_of(sections().begin(), sections().end(),
                                       [&](const auto& e) { return e.first == section; })) {
    throw ConfigError("unknown section '" + section + "' in override '" + assignment + "'");
  }
  if (key == "num_users") {
    // per-user lists of the old length cannot be broadcast unless uniform
    const bool uniform_m = std::adjacent_find(p.n_mobile.begin(), p.n_mobile.end(), std::not_equal_to<>()) ==
                           p.n_mobile.end();
    const bool uniform_s =
        std::adjacent_find(p.streams.begin(), p.streams.end(), std::not_equal_to<>()) == p.streams.end();
    if (uniform_m && !p.n_mobile.empty()) p.n_mobile.resize(1);
    if (uniform_s && !p.streams.empty()) p.streams.resize(1);
  }
  try {
    assign(p, section, key, value, 0);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("override '") + assignment + "': " + e.what());
  }
  finish(p);
  p.file.sweep_given = config.sweep_given || p.first_given || p.second_given;
  config = p.file;
}

}  // namespace afrelay
