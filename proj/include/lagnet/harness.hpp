#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lagnet/analysis.hpp"
#include "lagnet/config.hpp"
#include "lagnet/oracle.hpp"

namespace lagnet {

/// 64-bit FNV-1a digest, as 16 hex digits.
std::string stable_digest(const std::string& text);

/// Problem name, polynomial coefficients (custom problems) and the graph as canonical text.
std::string canonical_problem_text(const ExperimentConfig& config, const LiftedProblem& p);

struct ProblemBundle {
  LiftedProblem problem;
  Vec oracle_start;
  std::string hash;
};

ProblemBundle build_problem(const ExperimentConfig& config);

struct OracleArtifact {
  std::string problem_hash;
  OracleSolution solution;
  LiftedSolution lifted;
  MinimizerReport report;
};

OracleArtifact run_oracle(const ProblemBundle& bundle, unsigned long long seed);

/// Fills err_x, err_mu and dist_lambda. Throws ErrorKind::HashMismatch when the trace and
/// the oracle artifact describe different problems.
void compare_to_oracle(Trace& trace, const LiftedProblem& p, const OracleArtifact& oracle);

/// sqrt(Σ err_x² + err_mu² + dist_lambda²) per record: the error of the whole iterate.
std::vector<double> primal_dual_errors(const Trace& trace);
/// sqrt(err_mu² + dist_lambda²) per record.
std::vector<double> multiplier_errors(const Trace& trace);

MultiplierState initial_state(const ExperimentConfig& config, const ProblemBundle& bundle,
                              const OracleArtifact& oracle);

struct ExperimentResult {
  RunStatus status = RunStatus::IterationCap;
  int exit_code = 1;
  double alpha = 0.0;
  SolverResult solver;
  std::string summary_json;
  std::string certificate_json;
};

/**
 * Runs one experiment. With a non-empty out_dir writes trace.csv, summary.json,
 * certificate.json (when certification is requested) and timing.json. Every file
 * except timing.json is a deterministic function of the config.
 */
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& out_dir);

std::string certificate_json(const ExperimentConfig& config);
std::string oracle_json(const ExperimentConfig& config);
std::string gradient_check_json(const ExperimentConfig& config, int samples);

struct SweepRow {
  double value = 0.0;
  RunStatus status = RunStatus::IterationCap;
  double final_err_x = 0.0;
  double contraction = 0.0;
  double r_squared = 0.0;
  std::string error;
};

/// One run per grid value of `parameter` (alpha, c or c_max); rows come back in grid order.
std::vector<SweepRow> sweep(const ExperimentConfig& config, const std::string& parameter,
                            const std::vector<double>& grid, int threads);

void write_sweep_csv(std::ostream& out, const std::string& parameter, const std::string& hash,
                     const std::vector<SweepRow>& rows);

/// LAGRANGE_NET_THREADS, or 1 when unset or invalid.
int thread_count_from_env();

}  // namespace lagnet
