// Command-line front end: run, certify, oracle, sweep, check-gradients.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lagnet/error.hpp"
#include "lagnet/harness.hpp"

namespace {

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) {
      throw lagnet::Error(lagnet::ErrorKind::InvalidArgument, "bad grid value '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

int exit_code_for(const lagnet::Error& e) {
  switch (e.kind()) {
    case lagnet::ErrorKind::Config:
    case lagnet::ErrorKind::InvalidArgument:
      return 2;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed Lagrangian methods over agent networks"};
  app.require_subcommand(1);

  std::string config_path, out_dir, param, grid;
  int samples = 20;

  auto* run = app.add_subcommand("run", "Run one experiment and write trace/summary files");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* certify = app.add_subcommand("certify", "Print the spectral certificate as JSON");
  certify->add_option("--config", config_path, "Experiment config (JSON)")->required();

  auto* oracle = app.add_subcommand("oracle", "Print the centralized solution as JSON");
  oracle->add_option("--config", config_path, "Experiment config (JSON)")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid and write sweep.csv");
  sweep->add_option("--config", config_path, "Experiment config (JSON)")->required();
  sweep->add_option("--param", param, "alpha, c or c_max")->required();
  sweep->add_option("--grid", grid, "Comma separated values")->required();
  sweep->add_option("--out", out_dir, "Output directory (stdout when omitted)");

  auto* grads = app.add_subcommand("check-gradients", "Compare derivatives with finite differences");
  grads->add_option("--config", config_path, "Experiment config (JSON)")->required();
  grads->add_option("--samples", samples, "Sample points per agent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const lagnet::ExperimentConfig cfg = lagnet::load_config(config_path);
    if (*run) {
      const auto res = lagnet::run_experiment(cfg, out_dir);
      std::cout << res.summary_json;
      if (res.exit_code != 0) {
        std::cerr << "run ended with status " << lagnet::to_string(res.status) << "\n";
      }
      return res.exit_code;
    }
    if (*certify) {
      std::cout << lagnet::certificate_json(cfg);
      return 0;
    }
    if (*oracle) {
      std::cout << lagnet::oracle_json(cfg);
      return 0;
    }
    if (*sweep) {
      const auto values = parse_grid(grid);
      const auto rows = lagnet::sweep(cfg, param, values, lagnet::thread_count_from_env());
      const std::string hash = lagnet::build_problem(cfg).hash;
      if (out_dir.empty()) {
        lagnet::write_sweep_csv(std::cout, param, hash, rows);
      } else {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(std::filesystem::path(out_dir) / "sweep.csv", std::ios::binary);
        lagnet::write_sweep_csv(out, param, hash, rows);
      }
      return 0;
    }
    if (*grads) {
      const std::string report = lagnet::gradient_check_json(cfg, samples);
      std::cout << report;
      return report.find("\"pass\": true") != std::string::npos ? 0 : 1;
    }
  } catch (const lagnet::Error& e) {
    std::cerr << "error (" << lagnet::to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
