#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lagnet/problem.hpp"

namespace lagnet {

enum class RunStatus { Converged, IterationCap, Diverged };

const char* to_string(RunStatus status);

struct TraceRecord {
  int k = 0;
  MultiplierState state;
  KktResidual kkt;
  double objective = 0.0;

  // Outer-loop diagnostics, only for the method of multipliers.
  double c_k = 0.0;
  double eps_k = 0.0;
  long inner_iters = 0;

  // Filled by compare_to_oracle.
  std::vector<double> err_x;
  double err_mu = 0.0;
  double dist_lambda = 0.0;
};

struct Trace {
  std::string problem_hash;
  int num_agents = 1;
  bool has_outer_columns = false;
  bool has_errors = false;
  std::vector<TraceRecord> records;
};

/// Writes one line per (k, agent). A leading comment line carries the problem hash.
void write_trace_csv(std::ostream& out, const Trace& trace);

std::string trace_csv_header(bool outer_columns);

/// Shortest decimal that round-trips, so equal doubles always print identically.
std::string format_double(double v);

}  // namespace lagnet
