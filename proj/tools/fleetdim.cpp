#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fleetdim/io.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out_path;
  std::string format;  // empty picks the subcommand default
  std::uint64_t seed = 0;
  std::string mode = "analytic";
  bool verbose = false;
};

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config_path, "JSON config file")
      ->required();
  sub->add_option("--out", opt.out_path, "output file (default: stdout)");
  sub->add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--seed", opt.seed, "simulation seed");
  sub->add_option("--mode", opt.mode, "simulation mode")
      ->check(CLI::IsMember({"analytic", "network"}));
  sub->add_flag("--verbose", opt.verbose, "diagnostics on stderr");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fleetdim::ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fleetdim::ConfigError("cannot write output file: " + path);
  out << text;
}

fleetdim::OutputFormat pick_format(const std::string& flag,
                                   fleetdim::OutputFormat fallback) {
  if (flag == "csv") return fleetdim::OutputFormat::csv;
  if (flag == "json") return fleetdim::OutputFormat::json;
  return fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fleet dimensioning toolkit for one service zone"};
  app.require_subcommand(1);

  Options opt;
  CLI::App* cmd_dimension = app.add_subcommand(
      "dimension", "minimum vehicle in-flow and dispatch policy");
  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "discrete-event validation run");
  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "one-parameter experiment table");
  CLI::App* cmd_compare =
      app.add_subcommand("compare", "optimal versus fixed reference policies");
  CLI::App* cmd_resilience =
      app.add_subcommand("resilience", "charging-outage analyses");
  for (CLI::App* sub : {cmd_dimension, cmd_simulate, cmd_sweep, cmd_compare,
                        cmd_resilience}) {
    add_common(sub, opt);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  using namespace fleetdim;
  try {
    const std::string text = read_file(opt.config_path);

    if (app.got_subcommand(cmd_dimension)) {
      const ZoneConfig zone = parse_zone_config(text);
      const DimensionResult res = dimension(zone);
      if (opt.verbose) {
        std::cerr << "dimension: classes=" << zone.class_count
                  << " probes=" << res.iterations
                  << " candidate=" << res.candidate_was_feasible << "\n";
      }
      write_output(opt.out_path,
                   render_dimension(zone, res,
                                    pick_format(opt.format,
                                                OutputFormat::json)));
    } else if (app.got_subcommand(cmd_simulate)) {
      const SimulateSpec spec = parse_simulate_config(text);
      SimConfig cfg;
      cfg.zone = spec.zone;
      if (spec.policy) {
        cfg.policy = *spec.policy;
        cfg.inflow = *spec.inflow;
      } else {
        const DimensionResult res = dimension(spec.zone);
        cfg.policy = res.policy;
        cfg.inflow = spec.inflow.value_or(res.min_inflow);
      }
      cfg.horizon = spec.horizon;
      cfg.warmup = spec.warmup;
      cfg.seed = opt.seed;
      cfg.mode =
          opt.mode == "network" ? SimMode::network : SimMode::analytic;
      const SimReport report = simulate(cfg);
      if (opt.verbose) {
        std::cerr << "simulate: mode=" << opt.mode
                  << " matched=" << report.vehicles_matched
                  << " truncated=" << report.truncated << "\n";
      }
      SimulationRecord record;
      record.zone = cfg.zone;
      record.policy = cfg.policy;
      record.inflow = cfg.inflow;
      record.seed = cfg.seed;
      record.mode = cfg.mode;
      record.horizon = cfg.horizon;
      record.warmup = cfg.warmup < 0 ? cfg.horizon / 10 : cfg.warmup;
      record.report = report;
      write_output(opt.out_path,
                   render_simulation(record, pick_format(opt.format,
                                                         OutputFormat::json)));
    } else if (app.got_subcommand(cmd_sweep)) {
      const SweepSpec spec = parse_sweep_config(text);
      const auto rows = sweep(spec);
      if (opt.verbose) std::cerr << "sweep: rows=" << rows.size() << "\n";
      write_output(opt.out_path,
                   render_sweep(spec, rows,
                                pick_format(opt.format, OutputFormat::csv)));
    } else if (app.got_subcommand(cmd_compare)) {
      const ZoneConfig zone = parse_compare_config(text);
      const CompareResult result = run_compare(zone);
      write_output(opt.out_path,
                   render_compare(result,
                                  pick_format(opt.format, OutputFormat::csv)));
    } else {
      const ResilienceSpec spec = parse_resilience_config(text);
      const ResilienceResult result = run_resilience(spec);
      if (opt.verbose) {
        std::cerr << "resilience: transient=" << result.transient.size()
                  << " restoration=" << result.restoration.size() << "\n";
      }
      write_output(opt.out_path,
                   render_resilience(result, pick_format(opt.format,
                                                         OutputFormat::csv)));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
