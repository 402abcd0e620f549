#include "afrelay/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <system_error>

#include "afrelay/baselines.hpp"

namespace afrelay {

namespace {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Row {
  std::string algorithm;
  SweepPoint point;
  AggregateResult agg;
};

std::vector<std::string> default_algorithms(Subcommand c, Direction d) {
  switch (c) {
    case Subcommand::downlink_sweep:
      return {"algorithm1", "fixed_precoder", "separate_lmmse", "direct_af", "per_hop"};
    case Subcommand::uplink_sweep:
      return {"algorithm2", "algorithm1_uplink", "separate_lmmse", "direct_af", "per_hop", "no_source_precoder"};
    case Subcommand::convergence:
      if (d == Direction::downlink) return {"algorithm1", "algorithm1_separate"};
      return {"algorithm2", "algorithm1_uplink"};
    case Subcommand::compare_baselines:
    case Subcommand::selftest:
      break;
  }
  return known_algorithms(d);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string results_csv(const std::vector<Row>& rows) {
  std::string s =
      "algorithm,snr1_db,snr2_db,mean_mse_analytic,mean_mse_empirical,mean_ser,mean_iters,trials_ok,"
      "trials_flagged\n";
  for (const auto& r : rows) {
    s += r.algorithm + ',' + format_real(r.point.first_hop_snr_db) + ',' + format_real(r.point.second_hop_snr_db) +
         ',' + format_real(r.agg.mean_mse_analytic) + ',' + format_real(r.agg.mean_mse_empirical) + ',' +
         format_real(r.agg.mean_ser) + ',' + format_real(r.agg.mean_iters) + ',' + std::to_string(r.agg.trials_ok) +
         ',' + std::to_string(r.agg.trials_flagged) + '\n';
  }
  return s;
}

std::string trace_csv(const std::vector<double>& trace) {
  std::string s = "iteration,mse\n";
  for (std::size_t i = 0; i < trace.size(); ++i) s += std::to_string(i) + ',' + format_real(trace[i]) + '\n';
  return s;
}

std::string metadata(const CliCommand& cmd, const ExperimentConfig& c, const std::vector<std::string>& flagged) {
  std::ostringstream m;
  m.imbue(std::locale::classic());
  m << "command: " << to_string(cmd.subcommand) << '\n';
  m << "direction: " << to_string(c.dims.direction) << '\n';
  m << "n_base: " << c.dims.n_base << '\n' << "n_relay: " << c.dims.n_relay << '\n';
  m << "users:";
  for (const auto& u : c.dims.users) m << ' ' << u.n_mobile << 'x' << u.streams;
  m << '\n';
  m << "seed: " << c.seed << '\n' << "trials: " << c.trials << '\n';
  m << "symbols_per_stream: " << c.symbols_per_stream << '\n';
  m << "threshold: " << format_real(c.threshold) << '\n' << "max_iter: " << c.max_iter << '\n';
  m << "power: unit source and relay budgets (uplink: 1/K per user); noise sigma^2 = 10^(-snr_db/10)\n";
  m << "normalization:\n";
  for (const auto& a : c.algorithms) {
    m << "  " << a << ": ";
    if (is_iterative(a)) {
      m << "iterative design; relay power met by its multiplier, source power by the precoder constraint";
      if (a == "fixed_precoder") m << "; precoder fixed at sqrt(P_s/L) times a truncated identity";
    } else {
      m << normalization_note(parse_baseline(a));
    }
    m << '\n';
  }
  m << "flagged_trials:";
  if (flagged.empty()) m << " none";
  m << '\n';
  for (const auto& f : flagged) m << "  " << f << '\n';
  return m.str();
}

template <class F>
bool check(std::ostream& log, const std::string& name, F&& body) {
  std::string why;
  bool ok = false;
  try {
    ok = body(why);
  } catch (const std::exception& e) {
    why = std::string("exception: ") + e.what();
  }
  log << (ok ? "ok   " : "FAIL ") << name;
  if (!ok && !why.empty()) log << ": " << why;
  log << '\n';
  return ok;
}

}  // namespace

const char* to_string(Subcommand c) {
  switch (c) {
    case Subcommand::downlink_sweep:
      return "downlink-sweep";
    case Subcommand::uplink_sweep:
      return "uplink-sweep";
    case Subcommand::convergence:
      return "convergence";
    case Subcommand::compare_baselines:
      return "compare-baselines";
    case Subcommand::selftest:
      return "selftest";
  }
  return "?";
}

Subcommand parse_subcommand(const std::string& text) {
  for (auto c : {Subcommand::downlink_sweep, Subcommand::uplink_sweep, Subcommand::convergence,
                 Subcommand::compare_baselines, Subcommand::selftest}) {
    if (text == to_string(c)) return c;
  }
  throw InvalidInput("unknown subcommand '" + text + "'");
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

ExperimentConfig resolve_config(const CliCommand& cmd) {
  ConfigFile file = cmd.config_path.empty() ? parse_config("") : load_config(cmd.config_path);
  for (const auto& o : cmd.overrides) apply_override(file, o);
  if (cmd.seed) apply_override(file, "run.seed=" + std::to_string(*cmd.seed));

  const auto forced = [&](Direction d) {
    if (file.direction_given && file.experiment.dims.direction != d) {
      throw ConfigError(std::string(to_string(cmd.subcommand)) + " requires direction=" + to_string(d));
    }
    if (file.experiment.dims.direction != d) apply_override(file, std::string("system.direction=") + to_string(d));
  };
  if (cmd.subcommand == Subcommand::downlink_sweep) forced(Direction::downlink);
  if (cmd.subcommand == Subcommand::uplink_sweep) forced(Direction::uplink);

  ExperimentConfig c = file.experiment;
  if (cmd.subcommand == Subcommand::convergence && !file.sweep_given) c.sweep = {{20.0, 20.0}};
  if (!file.algorithms_given) c.algorithms = default_algorithms(cmd.subcommand, c.dims.direction);
  for (const auto& a : c.algorithms) {
    try {
      make_designer(a, c.dims.direction);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  }
  return c;
}

int run_command(const CliCommand& cmd, std::ostream& log) {
  if (cmd.subcommand == Subcommand::selftest) {
    const int failures = run_selftest(log);
    log << (failures == 0 ? "selftest passed\n" : "selftest failed: " + std::to_string(failures) + " check(s)\n");
    return failures == 0 ? exit_ok : exit_runtime;
  }
  ExperimentConfig config;
  try {
    config = resolve_config(cmd);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return exit_usage;
  }

  const fs::path out_dir(cmd.output_dir);
  {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
      log << "error: cannot create output directory '" << out_dir.string() << "'\n";
      return exit_io;
    }
  }

  std::vector<Row> rows;
  std::vector<std::pair<std::string, std::vector<double>>> traces;
  std::vector<std::string> flagged;
  bool failed = false;
  const bool many_points = config.sweep.size() > 1;
  for (const auto& algorithm : config.algorithms) {
    for (std::size_t p = 0; p < config.sweep.size(); ++p) {
      const SweepPoint& pt = config.sweep[p];
      const auto results = run_trials(algorithm, config, pt, cmd.jobs);
      for (const auto& r : results) {
        if (r.flagged) {
          flagged.push_back(algorithm + " snr=(" + format_real(pt.first_hop_snr_db) + "," +
                            format_real(pt.second_hop_snr_db) + ") trial " + std::to_string(r.trial_index) + ": " +
                            r.note);
        }
      }
      try {
        Row row{algorithm, pt, aggregate(results)};
        log << algorithm << " snr1=" << format_real(pt.first_hop_snr_db) << " snr2="
            << format_real(pt.second_hop_snr_db) << " mse=" << format_real(row.agg.mean_mse_analytic)
            << " ok=" << row.agg.trials_ok << " flagged=" << row.agg.trials_flagged << '\n';
        if (is_iterative(algorithm)) {
          std::string name = "trace_" + algorithm + "_" + std::to_string(config.seed);
          if (many_points) name += "_p" + std::to_string(p);
          traces.emplace_back(name + ".csv", row.agg.mean_trace);
        }
        rows.push_back(std::move(row));
      } catch (const EmptyAggregate& e) {
        log << "error: " << algorithm << ": " << e.what() << '\n';
        failed = true;
      }
    }
  }

  try {
    write_file(out_dir / "results.csv", results_csv(rows));
    for (const auto& [name, trace] : traces) write_file(out_dir / name, trace_csv(trace));
    write_file(out_dir / "metadata.txt", metadata(cmd, config, flagged));
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return exit_io;
  }
  return failed ? exit_runtime : exit_ok;
}

int run_selftest(std::ostream& log) {
  int failures = 0;
  auto run = [&](const std::string& name, const std::function<bool(std::string&)>& body) {
    if (!check(log, name, body)) ++failures;
  };

  run("qpsk (0,0) maps to (1+j)/sqrt2", [](std::string&) {
    const Complex s = qpsk_modulate(0, 0);
    return std::abs(s - Complex(1.0, 1.0) / std::sqrt(2.0)) < 1e-15;
  });
  run("qpsk round trip and unit energy", [](std::string& why) {
    for (int b0 = 0; b0 < 2; ++b0) {
      for (int b1 = 0; b1 < 2; ++b1) {
        const Complex s = qpsk_modulate(b0, b1);
        if (qpsk_detect(s) != std::make_pair(b0, b1)) {
          why = "detect mismatch";
          return false;
        }
        if (std::abs(std::norm(s) - 1.0) > 1e-15) {
          why = "energy";
          return false;
        }
      }
    }
    return true;
  });
  run("empty config gives defaults", [](std::string&) {
    const ExperimentConfig c = parse_config("").experiment;
    return c.symbols_per_stream == 10000 && c.trials == 500 && c.threshold == 1e-4 && c.dims.n_base == 4 &&
           c.dims.n_relay == 4 && c.dims.num_users() == 2 && c.dims.users[0].n_mobile == 2 &&
           c.dims.users[1].streams == 2;
  });
  run("trials override", [](std::string&) {
    ConfigFile f = parse_config("");
    apply_override(f, "trials=7");
    return f.experiment.trials == 7;
  });
  run("n_relay=0 rejected", [](std::string&) {
    try {
      parse_config("[system]\nn_relay=0\n");
    } catch (const ConfigError&) {
      return true;
    }
    return false;
  });
  run("unknown key rejected with line number", [](std::string&) {
    try {
      parse_config("[run]\n\nbogus=1\n");
    } catch (const ConfigError& e) {
      return e.line() == 3;
    }
    return false;
  });
  run("aggregate of one trial", [](std::string&) {
    TrialResult t;
    t.analytic_mse = 0.5;
    t.empirical_mse = 0.6;
    t.mean_ser = 0.1;
    t.iterations = 4;
    const AggregateResult a = aggregate({t});
    return a.mean_mse_analytic == 0.5 && a.mean_mse_empirical == 0.6 && a.mean_ser == 0.1 && a.mean_iters == 4 &&
           a.trials_ok == 1;
  });
  run("aggregate mean and order independence", [](std::string&) {
    TrialResult a, b, c;
    a.trial_index = 0;
    a.analytic_mse = 1.0;
    b.trial_index = 1;
    b.analytic_mse = 3.0;
    c.trial_index = 2;
    c.flagged = true;
    const AggregateResult x = aggregate({a, b, c});
    const AggregateResult y = aggregate({c, b, a});
    return x.mean_mse_analytic == 2.0 && y.mean_mse_analytic == 2.0 && x.trials_flagged == 1;
  });
  run("all-flagged aggregate is an error", [](std::string&) {
    TrialResult a;
    a.flagged = true;
    try {
      aggregate({a});
    } catch (const EmptyAggregate&) {
      return true;
    }
    return false;
  });
  run("noiseless square direct AF detects without error", [](std::string& why) {
    ExperimentConfig c = parse_config("[system]\nnum_users=1\nn_mobile=4\nstreams=4\n").experiment;
    c.symbols_per_stream = 200;
    const TrialResult r = run_trial(make_designer("direct_af", Direction::downlink), c, {300.0, 300.0}, 0);
    why = "ser=" + format_real(r.mean_ser);
    return !r.flagged && r.mean_ser == 0.0;
  });
  run("trial is deterministic", [](std::string&) {
    ExperimentConfig c = parse_config("").experiment;
    c.symbols_per_stream = 200;
    const Designer d = make_designer("algorithm1", Direction::downlink);
    const TrialResult a = run_trial(d, c, {20.0, 20.0}, 3);
    const TrialResult b = run_trial(d, c, {20.0, 20.0}, 3);
    return a.analytic_mse == b.analytic_mse && a.empirical_mse == b.empirical_mse && a.trace == b.trace;
  });
  run("csv numbers use 17 digits", [](std::string& why) {
    why = format_real(0.1);
    return why == "0.10000000000000001";
  });
  return failures;
}

}  // namespace afrelay
