#include "coopstab/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "coopstab/error.hpp"
#include "coopstab/experiment.hpp"
#include "coopstab/switching.hpp"

namespace coopstab {

namespace {

ExperimentConfig load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("", "cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace

int run_cli(const std::vector<std::string>& argv) {
  CLI::App app{"Cooperative stabilization of multi-agent systems under switching topologies"};
  app.name(argv.empty() ? "coopstab" : argv.front());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;

  auto* simulate = app.add_subcommand("simulate", "Run an experiment and write trajectory.csv and report.json");
  simulate->add_option("--config,-c", config_path, "Experiment config (JSON)")->required();
  simulate->add_option("--out,-o", out_dir, "Output directory (default: config output_dir)");

  auto* verify = app.add_subcommand("verify", "Topology, dwell-time and exp-ISS checks only");
  verify->add_option("--config,-c", config_path, "Experiment config (JSON)")->required();

  auto* synthesize = app.add_subcommand("synthesize", "Gain synthesis report");
  synthesize->add_option("--config,-c", config_path, "Experiment config (JSON)")->required();

  double period = 6.0;
  double tau_d = 3.0;
  double n0 = 1.0;
  double horizon = 60.0;
  auto* vsig = app.add_subcommand("validate-signal", "Check a periodic two-phase signal against an average dwell time");
  vsig->add_option("--period", period, "Signal period T")->required();
  vsig->add_option("--tau-d", tau_d, "Average dwell time")->required();
  vsig->add_option("--n0", n0, "Chatter bound N0")->required();
  vsig->add_option("--horizon", horizon, "Horizon (default 60)");

  auto* regulate = app.add_subcommand("regulate", "Run the internal-model regulation experiment");
  regulate->add_option("--config,-c", config_path, "Config with a regulation section (default: built-in demo)");
  regulate->add_option("--out,-o", out_dir, "Output directory (default: config output_dir)");

  auto* benchmark = app.add_subcommand("benchmark", "Run the built-in controlled-Lorenz benchmark");
  benchmark->add_option("--out,-o", out_dir, "Output directory")->required();

  try {
    std::vector<std::string> args(argv.rbegin(), argv.rend());
    if (!args.empty()) args.pop_back();
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (simulate->parsed() || benchmark->parsed()) {
      const ExperimentConfig config =
          simulate->parsed() ? load(config_path) : parse_config(benchmark_config_json());
      const auto result = run_experiment(config);
      const std::string dir = out_dir.empty() ? config.output_dir : out_dir;
      write_outputs(dir, result.csv, result.report);
      std::cout << "wrote " << dir << "/trajectory.csv and " << dir << "/report.json; converged = "
                << (result.converged ? "true" : "false") << "\n";
      return result.converged ? kExitOk : kExitValidation;
    }
    if (verify->parsed()) {
      bool ok = false;
      const auto report = verify_experiment(load(config_path), &ok);
      std::cout << report.dump(2) << "\n";
      return ok ? kExitOk : kExitValidation;
    }
    if (synthesize->parsed()) {
      const auto report = synthesize_experiment(load(config_path));
      std::cout << report.dump(2) << "\n";
      return report.at("invariants_hold").get<bool>() ? kExitOk : kExitValidation;
    }
    if (vsig->parsed()) {
      if (!(period > 0.0) || !(tau_d > 0.0) || !(n0 >= 0.0) || !(horizon > 0.0)) {
        std::cerr << "validate-signal: period, tau-d and horizon must be positive, n0 nonnegative\n";
        return kExitUsage;
      }
      const AdtSpec spec{tau_d, n0};
      const auto r = validate_adt(periodic_two_phase(period, horizon), spec, horizon);
      nlohmann::json j = {{"period", period},
                          {"tau_d", tau_d},
                          {"N0", n0},
                          {"horizon", horizon},
                          {"valid", r.valid},
                          {"worst_excess", r.worst_excess},
                          {"worst_interval", {{"t", r.worst_t}, {"T", r.worst_T}, {"count", r.worst_count}}},
                          {"switches_checked", r.switches_checked}};
      std::cout << j.dump(2) << "\n";
      return r.valid ? kExitOk : kExitValidation;
    }
    if (regulate->parsed()) {
      const ExperimentConfig config =
          config_path.empty() ? parse_config(regulation_demo_config_json()) : load(config_path);
      std::string csv;
      const auto report = run_regulation_experiment(config, &csv);
      const std::string dir = out_dir.empty() ? config.output_dir : out_dir;
      write_outputs(dir, csv, report);
      const bool ok = report.at("success").get<bool>();
      std::cout << "wrote " << dir << "/trajectory.csv and " << dir << "/report.json; success = "
                << (ok ? "true" : "false") << "\n";
      return ok ? kExitOk : kExitValidation;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    return kExitValidation;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up at t = " << e.time() << ": " << e.what() << "\n";
    return kExitBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}

}  // namespace coopstab
