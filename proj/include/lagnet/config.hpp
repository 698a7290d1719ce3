#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lagnet/lagrangian_solvers.hpp"
#include "lagnet/multipliers.hpp"
#include "lagnet/netgraph.hpp"
#include "lagnet/polynomial.hpp"

namespace lagnet {

struct CustomProblem {
  int dim = 0;
  std::vector<Polynomial> objectives;
  std::vector<std::optional<Polynomial>> constraints;
};

struct InitSpec {
  std::string mode = "oracle-perturb";   // oracle-perturb | explicit | zeros
  double radius = 0.1;
  std::optional<Vec> x;
  std::optional<Vec> mu;
  std::optional<Vec> lambda;
};

struct ExperimentConfig {
  std::string problem_name;
  std::optional<CustomProblem> custom;
  /// Graph override; fixtures fall back to their own graph.
  std::optional<GraphSpec> graph;
  std::optional<Vec> oracle_start;

  Algorithm algorithm = Algorithm::A1;
  std::optional<double> alpha;   // unset together with alpha_certified = true means "certified"
  bool alpha_certified = false;
  double c = 0.0;
  long max_iter = 50000;
  double tol = 1e-10;
  InitSpec init;
  unsigned long long seed = 0;
  MoMConfig mom;
  bool certify = false;
  Execution execution = Execution::Stacked;
};

/**
 * Parses a JSON experiment description. Syntax errors are reported as
 * "<source>:<line>:<column>: ..." and semantic errors name the offending key path.
 * Both throw Error with ErrorKind::Config.
 */
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

}  // namespace lagnet
