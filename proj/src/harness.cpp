#include "lagnet/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lagnet/error.hpp"
#include "lagnet/fixtures.hpp"
#include "lagnet/multipliers.hpp"

namespace lagnet {

using ojson = nlohmann::ordered_json;

std::string stable_digest(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string canonical_problem_text(const ExperimentConfig& config, const LiftedProblem& p) {
  std::ostringstream out;
  out << "name=" << p.name << ";dim=" << p.dim << ";";
  if (config.custom) {
    for (std::size_t i = 0; i < config.custom->objectives.size(); ++i) {
      auto dump = [&](const Polynomial& poly) {
        for (const auto& t : poly.terms()) {
          out << format_double(t.coefficient) << "[";
          for (int e : t.exponents) out << e << ",";
          out << "]";
        }
      };
      out << "f" << i << ":";
      dump(config.custom->objectives[i]);
      out << ";h" << i << ":";
      if (config.custom->constraints[i]) dump(*config.custom->constraints[i]);
      else out << "none";
      out << ";";
    }
  }
  out << "agents=" << p.graph.num_agents << ";edges=";
  for (std::size_t r = 0; r < p.incidence.row_order.size(); ++r) {
    const auto [i, j] = p.incidence.row_order[r];
    out << i + 1 << "-" << j + 1 << ":" << format_double(p.incidence.S(Eigen::Index(r), i)) << ",";
  }
  return out.str();
}

ProblemBundle build_problem(const ExperimentConfig& config) {
  const GraphSpec* graph = config.graph ? &*config.graph : nullptr;
  ProblemBundle b;
  if (config.custom) {
    if (!graph) throw Error(ErrorKind::Config, "key 'graph': required for custom problems");
    std::vector<LocalProblem> agents;
    for (std::size_t i = 0; i < config.custom->objectives.size(); ++i) {
      LocalProblem lp{config.custom->objectives[i].as_function(), std::nullopt};
      if (config.custom->constraints[i]) lp.constraint = config.custom->constraints[i]->as_function();
      agents.push_back(std::move(lp));
    }
    b.problem = make_lifted_problem(config.problem_name, config.custom->dim, std::move(agents), *graph);
    b.oracle_start = Vec::Zero(config.custom->dim);
  } else {
    Fixture fx = make_fixture(config.problem_name, graph);
    b.problem = std::move(fx.problem);
    b.oracle_start = fx.oracle_start;
  }
  if (config.oracle_start) {
    if (config.oracle_start->size() != b.problem.dim) {
      throw Error(ErrorKind::Config, "key 'problem.oracle_start': expected " +
                                         std::to_string(b.problem.dim) + " entries");
    }
    b.oracle_start = *config.oracle_start;
  }
  b.hash = stable_digest(canonical_problem_text(config, b.problem));
  return b;
}

OracleArtifact run_oracle(const ProblemBundle& bundle, unsigned long long seed) {
  OracleArtifact art;
  art.problem_hash = bundle.hash;
  OracleOptions opts;
  opts.seed = seed;
  art.solution = solve_centralized(bundle.problem, bundle.oracle_start, opts);
  art.lifted = lifted_multipliers(bundle.problem, art.solution);
  art.report = verify_minimizer(bundle.problem, art.solution);
  return art;
}

void compare_to_oracle(Trace& trace, const LiftedProblem& p, const OracleArtifact& oracle) {
  if (trace.problem_hash != oracle.problem_hash) {
    throw Error(ErrorKind::HashMismatch, "trace belongs to problem " + trace.problem_hash +
                                             " but the oracle artifact to " + oracle.problem_hash);
  }
  const int n = p.dim;
  for (auto& r : trace.records) {
    r.err_x.assign(p.num_agents(), 0.0);
    for (int i = 0; i < p.num_agents(); ++i)
      r.err_x[i] = (r.state.x.segment(Eigen::Index(i) * n, n) - oracle.solution.x_star).norm();
    r.err_mu = (r.state.mu - oracle.solution.psi_star).norm();
    r.dist_lambda = dist_to_multiplier_set(r.state.lambda, oracle.lifted.state.lambda, p.J_lift);
  }
  trace.has_errors = true;
}

std::vector<double> primal_dual_errors(const Trace& trace) {
  std::vector<double> out;
  for (const auto& r : trace.records) {
    double s = r.err_mu * r.err_mu + r.dist_lambda * r.dist_lambda;
    for (double e : r.err_x) s += e * e;
    out.push_back(std::sqrt(s));
  }
  return out;
}

std::vector<double> multiplier_errors(const Trace& trace) {
  std::vector<double> out;
  for (const auto& r : trace.records) out.push_back(std::hypot(r.err_mu, r.dist_lambda));
  return out;
}

MultiplierState initial_state(const ExperimentConfig& config, const ProblemBundle& bundle,
                              const OracleArtifact& oracle) {
  const LiftedProblem& p = bundle.problem;
  MultiplierState s = zero_state(p);
  if (config.init.mode == "zeros") return s;
  if (config.init.mode == "explicit") {
    auto take = [](const std::optional<Vec>& v, Vec& slot, const char* key) {
      if (!v) return;
      if (v->size() != slot.size()) {
        throw Error(ErrorKind::Config, std::string("key 'init.") + key + "': expected " +
                                           std::to_string(slot.size()) + " entries");
      }
      slot = *v;
    };
    take(config.init.x, s.x, "x");
    take(config.init.mu, s.mu, "mu");
    take(config.init.lambda, s.lambda, "lambda");
    return s;
  }
  s = oracle.lifted.state;
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(-config.init.radius, config.init.radius);
  for (Vec* v : {&s.x, &s.mu, &s.lambda})
    for (Eigen::Index k = 0; k < v->size(); ++k) (*v)(k) += unif(rng);
  return s;
}

namespace {

ojson eigen_list(const std::vector<Complex>& ev) {
  ojson arr = ojson::array();
  for (Complex z : ev) arr.push_back({z.real(), z.imag()});
  return arr;
}

ojson vec_json(const Vec& v) {
  ojson arr = ojson::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v(k));
  return arr;
}

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

double first_order_penalty(const ExperimentConfig& config) {
  return config.algorithm == Algorithm::A2 ? config.c : 0.0;
}

struct CertifiedStep {
  double alpha = 0.0;
  std::optional<StepSizeCertificate> cert;
};

CertifiedStep resolve_alpha(const ExperimentConfig& config, const ProblemBundle& b,
                            const OracleArtifact& o) {
  CertifiedStep out;
  if (config.alpha_certified) {
    out.cert = certify_step_size(b.problem, o.lifted.state, first_order_penalty(config));
    out.alpha = out.cert->alpha_rate;
  } else {
    out.alpha = config.alpha.value_or(0.0);
  }
  return out;
}

ojson certificate_object(const ExperimentConfig& config, const ProblemBundle& b,
                         const OracleArtifact& o, const CertifiedStep& step) {
  const LiftedProblem& p = b.problem;
  ojson j;
  j["problem_hash"] = b.hash;
  if (config.algorithm == Algorithm::A3) {
    const double c = config.mom.c_max;
    const MomRateCertificate rc = rate_bound_mom(p, o.lifted.state, c);
    j["matrix"] = rc.certificate.matrix;
    j["eigenvalues"] = eigen_list(rc.certificate.eigenvalues);
    j["verdict"] = rc.certificate.verdict && rc.admissible;
    j["rate_bound"] = rc.certificate.rate_bound;
    j["c"] = c;
    ojson e = ojson::array();
    for (double v : rc.effective_e) e.push_back(v);
    j["effective_e"] = e;
    j["admissible"] = rc.admissible;
  } else {
    const double c = first_order_penalty(config);
    const SpectralCertificate bc = iteration_matrix_B(p, o.lifted.state, step.alpha, c);
    j["matrix"] = bc.matrix;
    j["eigenvalues"] = eigen_list(bc.eigenvalues);
    std::optional<StepSizeCertificate> cert = step.cert;
    if (!cert) {
      try {
        cert = certify_step_size(p, o.lifted.state, c);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Certification) throw;
      }
    }
    const bool contractive = cert && spectral_radius_of_step(cert->restricted_eigenvalues, step.alpha) < 1.0;
    j["verdict"] = bc.verdict && contractive;
    j["alpha"] = step.alpha;
    j["c"] = c;
    if (cert) {
      j["alpha_bound"] = cert->alpha_bar;
      j["alpha_rate"] = cert->alpha_rate;
      j["rho_rate"] = cert->rho_rate;
      j["rho_at_alpha"] = spectral_radius_of_step(cert->restricted_eigenvalues, step.alpha);
    } else {
      j["alpha_bound"] = nullptr;
    }
  }
  if (config.algorithm != Algorithm::A1) {
    try {
      j["c_bar"] = find_cbar(p, o.lifted.state);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::HypothesisViolated) throw;
      j["c_bar"] = nullptr;
    }
  }
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const ProblemBundle b = build_problem(config);
  const OracleArtifact o = run_oracle(b, config.seed);
  const MultiplierState init = initial_state(config, b, o);

  ExperimentResult res;
  CertifiedStep step;
  if (config.algorithm == Algorithm::A3) {
    MoMConfig mom = config.mom;
    mom.execution = config.execution;
    mom.threads = thread_count_from_env();
    res.solver = run_a3(b.problem, mom, init);
  } else {
    step = resolve_alpha(config, b, o);
    FirstOrderConfig fo;
    fo.algorithm = config.algorithm;
    fo.alpha = step.alpha;
    fo.c = config.c;
    fo.max_iter = config.max_iter;
    fo.tol = config.tol;
    fo.execution = config.execution;
    fo.threads = thread_count_from_env();
    res.solver = run_first_order(b.problem, fo, init);
  }
  res.alpha = step.alpha;
  res.status = res.solver.status;
  res.exit_code = res.status == RunStatus::Converged ? 0 : 1;
  res.solver.trace.problem_hash = b.hash;
  compare_to_oracle(res.solver.trace, b.problem, o);

  const TraceRecord& last = res.solver.trace.records.back();
  ojson s;
  s["problem"] = b.problem.name;
  s["problem_hash"] = b.hash;
  s["algorithm"] = to_string(config.algorithm);
  s["execution"] = config.execution == Execution::Message ? "message" : "stacked";
  s["status"] = to_string(res.status);
  s["iterations"] = res.solver.iterations;
  s["seed"] = config.seed;
  if (config.algorithm == Algorithm::A3) {
    s["c0"] = config.mom.c0;
    s["beta"] = config.mom.beta;
    s["c_max"] = config.mom.c_max;
  } else {
    s["alpha"] = step.alpha;
    s["alpha_source"] = config.alpha_certified ? "certified" : "config";
    s["c"] = first_order_penalty(config);
  }
  double err_x_max = 0.0;
  for (double e : last.err_x) err_x_max = std::max(err_x_max, e);
  ojson fin;
  fin["err_x_max"] = finite_or_null(err_x_max);
  fin["err_mu"] = finite_or_null(last.err_mu);
  fin["dist_lambda"] = finite_or_null(last.dist_lambda);
  fin["kkt_stat"] = finite_or_null(last.kkt.stationarity);
  fin["kkt_h"] = finite_or_null(last.kkt.constraint);
  fin["kkt_cons"] = finite_or_null(last.kkt.consensus);
  fin["objective"] = finite_or_null(last.objective);
  s["final"] = fin;
  res.summary_json = s.dump(2) + "\n";
  if (config.certify) res.certificate_json = certificate_object(config, b, o, step).dump(2) + "\n";

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ostringstream csv;
    write_trace_csv(csv, res.solver.trace);
    write_file(out_dir / "trace.csv", csv.str());
    write_file(out_dir / "summary.json", res.summary_json);
    if (config.certify) write_file(out_dir / "certificate.json", res.certificate_json);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ojson t;
    t["problem_hash"] = b.hash;
    t["wall_time_s"] = wall;
    write_file(out_dir / "timing.json", t.dump(2) + "\n");
  }
  return res;
}

std::string certificate_json(const ExperimentConfig& config) {
  const ProblemBundle b = build_problem(config);
  const OracleArtifact o = run_oracle(b, config.seed);
  CertifiedStep step;
  if (config.algorithm != Algorithm::A3) step = resolve_alpha(config, b, o);
  return certificate_object(config, b, o, step).dump(2) + "\n";
}

std::string oracle_json(const ExperimentConfig& config) {
  const ProblemBundle b = build_problem(config);
  const OracleArtifact o = run_oracle(b, config.seed);
  ojson j;
  j["problem_hash"] = b.hash;
  j["x_star"] = vec_json(o.solution.x_star);
  j["psi_star"] = vec_json(o.solution.psi_star);
  j["mu_star"] = vec_json(o.lifted.state.mu);
  j["lambda_star"] = vec_json(o.lifted.state.lambda);
  j["kkt_residual"] = o.solution.kkt_residual_norm;
  j["objective"] = o.solution.objective;
  j["assumption2_sigma_min"] = finite_or_null(o.report.assumption2_sigma_min);
  j["blockwise_pd"] = o.report.blockwise_pd;
  j["tangent_cone_pd"] = o.report.tangent_cone_pd;
  j["second_order_margin"] = finite_or_null(o.solution.second_order_margin);
  return j.dump(2) + "\n";
}

std::string gradient_check_json(const ExperimentConfig& config, int samples) {
  const ProblemBundle b = build_problem(config);
  const GradientCheckReport rep = check_gradients(b.problem, samples, config.seed);
  ojson j;
  j["problem_hash"] = b.hash;
  j["samples"] = rep.samples;
  j["max_rel_error"] = rep.max_rel_error;
  j["max_hessian_rel_error"] = rep.max_hessian_rel_error;
  j["pass"] = rep.failures.empty();
  j["failures"] = rep.failures;
  return j.dump(2) + "\n";
}

std::vector<SweepRow> sweep(const ExperimentConfig& config, const std::string& parameter,
                            const std::vector<double>& grid, int threads) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "sweep grid is empty");
  if (parameter != "alpha" && parameter != "c" && parameter != "c_max") {
    throw Error(ErrorKind::InvalidArgument, "sweep parameter must be alpha, c or c_max");
  }
  if (parameter == "alpha" && config.algorithm == Algorithm::A3) {
    throw Error(ErrorKind::InvalidArgument, "alpha sweeps apply to A1 and A2");
  }
  if (parameter == "c_max" && config.algorithm != Algorithm::A3) {
    throw Error(ErrorKind::InvalidArgument, "c_max sweeps apply to A3");
  }
  std::vector<SweepRow> rows(grid.size());
  auto run_row = [&](std::size_t idx) {
    SweepRow& row = rows[idx];
    row.value = grid[idx];
    ExperimentConfig cfg = config;
    if (parameter == "alpha") {
      cfg.alpha = grid[idx];
      cfg.alpha_certified = false;
    } else if (parameter == "c") {
      if (cfg.algorithm == Algorithm::A3) {
        cfg.mom.c0 = grid[idx];
        cfg.mom.c_max = grid[idx];
      } else {
        cfg.c = grid[idx];
      }
    } else {
      cfg.mom.c_max = grid[idx];
      cfg.mom.c0 = std::min(cfg.mom.c0, grid[idx]);
    }
    cfg.certify = false;
    try {
      const ExperimentResult r = run_experiment(cfg, {});
      row.status = r.status;
      const auto& last = r.solver.trace.records.back();
      row.final_err_x = 0.0;
      for (double e : last.err_x) row.final_err_x = std::max(row.final_err_x, e);
      try {
        const RateEstimate est = cfg.algorithm == Algorithm::A3
                                     ? estimate_linear_rate(multiplier_errors(r.solver.trace), 0.5, 3)
                                     : estimate_linear_rate(primal_dual_errors(r.solver.trace));
        row.contraction = est.contraction;
        row.r_squared = est.r_squared;
      } catch (const Error&) {
        row.contraction = std::numeric_limits<double>::quiet_NaN();
        row.r_squared = std::numeric_limits<double>::quiet_NaN();
      }
    } catch (const Error& e) {
      row.error = e.what();
      row.final_err_x = row.contraction = row.r_squared = std::numeric_limits<double>::quiet_NaN();
    }
  };

  const int T = std::max(1, std::min<int>(threads, static_cast<int>(grid.size())));
  if (T == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) run_row(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < T; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) run_row(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::string& parameter, const std::string& hash,
                     const std::vector<SweepRow>& rows) {
  out << "# problem_hash=" << hash << " param=" << parameter << "\n";
  out << "parameter,status,final_err_x,contraction,R2\n";
  for (const auto& r : rows) {
    out << format_double(r.value) << ',' << (r.error.empty() ? to_string(r.status) : "error") << ','
        << format_double(r.final_err_x) << ',' << format_double(r.contraction) << ','
        << format_double(r.r_squared) << '\n';
  }
}

int thread_count_from_env() {
  const char* v = std::getenv("LAGRANGE_NET_THREADS");
  if (!v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 1) return 1;
  return static_cast<int>(std::min<long>(n, 256));
}

}  // namespace lagnet
