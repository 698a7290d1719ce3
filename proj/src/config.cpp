#include "lagnet/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lagnet/error.hpp"

namespace lagnet {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Config, "key '" + path + "': " + what);
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(join(path, key), "unknown key");
  }
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  return j;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Vec get_vector(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = get_number(j[k], path + "[" + std::to_string(k) + "]");
  return v;
}

Polynomial parse_polynomial(const json& j, int dim, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a list of [coefficient, [exponents...]] terms");
  std::vector<Monomial> terms;
  for (std::size_t t = 0; t < j.size(); ++t) {
    const std::string tp = path + "[" + std::to_string(t) + "]";
    const json& term = j[t];
    if (!term.is_array() || term.size() != 2 || !term[1].is_array()) {
      fail(tp, "expected [coefficient, [exponents...]]");
    }
    Monomial m;
    m.coefficient = get_number(term[0], tp + "[0]");
    for (std::size_t k = 0; k < term[1].size(); ++k) {
      const long e = get_integer(term[1][k], tp + "[1][" + std::to_string(k) + "]");
      if (e < 0) fail(tp, "exponents must be nonnegative");
      m.exponents.push_back(static_cast<int>(e));
    }
    if (static_cast<int>(m.exponents.size()) != dim) {
      fail(tp, "exponent vector has " + std::to_string(m.exponents.size()) + " entries, dim is " +
                   std::to_string(dim));
    }
    terms.push_back(std::move(m));
  }
  return Polynomial(dim, std::move(terms));
}

CustomProblem parse_custom(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"dim", "agents"});
  CustomProblem cp;
  if (!j.contains("dim")) fail(join(path, "dim"), "missing required key");
  cp.dim = static_cast<int>(get_integer(j["dim"], join(path, "dim")));
  if (cp.dim <= 0) fail(join(path, "dim"), "must be positive");
  if (!j.contains("agents") || !j["agents"].is_array() || j["agents"].empty()) {
    fail(join(path, "agents"), "expected a nonempty list of agents");
  }
  for (std::size_t i = 0; i < j["agents"].size(); ++i) {
    const std::string ap = join(path, "agents") + "[" + std::to_string(i) + "]";
    const json& a = require_object(j["agents"][i], ap);
    reject_unknown(a, ap, {"f", "h"});
    if (!a.contains("f")) fail(join(ap, "f"), "missing required key");
    cp.objectives.push_back(parse_polynomial(a["f"], cp.dim, join(ap, "f")));
    if (a.contains("h") && !a["h"].is_null()) {
      cp.constraints.emplace_back(parse_polynomial(a["h"], cp.dim, join(ap, "h")));
    } else {
      cp.constraints.emplace_back(std::nullopt);
    }
  }
  return cp;
}

GraphSpec parse_graph(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"num_agents", "edges", "symmetric_weights"});
  GraphSpec g;
  if (!j.contains("num_agents")) fail(join(path, "num_agents"), "missing required key");
  g.num_agents = static_cast<int>(get_integer(j["num_agents"], join(path, "num_agents")));
  if (g.num_agents <= 0) fail(join(path, "num_agents"), "must be positive");
  bool symmetric = true;
  if (j.contains("symmetric_weights")) {
    if (!j["symmetric_weights"].is_boolean()) fail(join(path, "symmetric_weights"), "expected a boolean");
    symmetric = j["symmetric_weights"].get<bool>();
  }
  if (!j.contains("edges") || !j["edges"].is_array()) fail(join(path, "edges"), "expected a list of [i, j, s_ij]");
  std::set<std::pair<int, int>> listed;
  for (std::size_t k = 0; k < j["edges"].size(); ++k) {
    const std::string ep = join(path, "edges") + "[" + std::to_string(k) + "]";
    const json& e = j["edges"][k];
    if (!e.is_array() || e.size() != 3) fail(ep, "expected [i, j, s_ij]");
    const int a = static_cast<int>(get_integer(e[0], ep + "[0]"));
    const int b = static_cast<int>(get_integer(e[1], ep + "[1]"));
    const double s = get_number(e[2], ep + "[2]");
    if (a < 1 || a > g.num_agents || b < 1 || b > g.num_agents) {
      fail(ep, "agent indices are 1-based and must not exceed num_agents");
    }
    g.weights.push_back({a - 1, b - 1, s});
    listed.insert({a - 1, b - 1});
  }
  if (symmetric) {
    const auto given = g.weights;
    for (const auto& w : given) {
      if (!listed.count({w.to, w.from})) {
        g.weights.push_back({w.to, w.from, w.weight});
        listed.insert({w.to, w.from});
      }
    }
  }
  return g;
}

std::pair<int, int> line_and_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream msg;
    msg << source << ":" << line << ":" << col << ": " << e.what();
    throw Error(ErrorKind::Config, msg.str());
  }
  if (!root.is_object()) throw Error(ErrorKind::Config, source + ": top level must be an object");
  reject_unknown(root, "", {"problem", "graph", "algorithm", "alpha", "c", "max_iter", "tol", "init",
                            "seed", "c0", "beta", "c_max", "inner", "outer", "certify", "execution"});

  ExperimentConfig cfg;
  if (!root.contains("problem")) fail("problem", "missing required key");
  const json& prob = require_object(root["problem"], "problem");
  reject_unknown(prob, "problem", {"name", "custom", "oracle_start"});
  if (prob.contains("custom")) {
    cfg.custom = parse_custom(prob["custom"], "problem.custom");
    cfg.problem_name = prob.contains("name") ? get_string(prob["name"], "problem.name") : "custom";
  } else {
    if (!prob.contains("name")) fail("problem.name", "missing required key");
    cfg.problem_name = get_string(prob["name"], "problem.name");
  }
  if (prob.contains("oracle_start")) cfg.oracle_start = get_vector(prob["oracle_start"], "problem.oracle_start");

  if (root.contains("graph")) cfg.graph = parse_graph(root["graph"], "graph");

  if (!root.contains("algorithm")) fail("algorithm", "missing required key");
  const std::string alg = get_string(root["algorithm"], "algorithm");
  if (alg == "A1") cfg.algorithm = Algorithm::A1;
  else if (alg == "A2") cfg.algorithm = Algorithm::A2;
  else if (alg == "A3") cfg.algorithm = Algorithm::A3;
  else fail("algorithm", "expected one of A1, A2, A3");

  if (root.contains("alpha")) {
    const json& a = root["alpha"];
    if (a.is_string()) {
      if (a.get<std::string>() != "certified") fail("alpha", "expected a number or \"certified\"");
      cfg.alpha_certified = true;
    } else {
      cfg.alpha = get_number(a, "alpha");
      if (!(*cfg.alpha > 0.0)) fail("alpha", "must be positive");
    }
  } else if (cfg.algorithm != Algorithm::A3) {
    fail("alpha", "missing required key (step size for " + alg + ")");
  }

  if (root.contains("c")) {
    cfg.c = get_number(root["c"], "c");
    if (!(cfg.c >= 0.0)) fail("c", "must be nonnegative");
  }
  if (root.contains("max_iter")) {
    cfg.max_iter = get_integer(root["max_iter"], "max_iter");
    if (cfg.max_iter < 0) fail("max_iter", "must be nonnegative");
  }
  if (root.contains("tol")) {
    cfg.tol = get_number(root["tol"], "tol");
    if (!(cfg.tol > 0.0)) fail("tol", "must be positive");
  }
  if (root.contains("seed")) {
    const long s = get_integer(root["seed"], "seed");
    if (s < 0) fail("seed", "must be nonnegative");
    cfg.seed = static_cast<unsigned long long>(s);
  }
  if (root.contains("certify")) {
    if (!root["certify"].is_boolean()) fail("certify", "expected a boolean");
    cfg.certify = root["certify"].get<bool>();
  }
  if (root.contains("execution")) {
    const std::string ex = get_string(root["execution"], "execution");
    if (ex == "stacked") cfg.execution = Execution::Stacked;
    else if (ex == "message") cfg.execution = Execution::Message;
    else fail("execution", "expected \"stacked\" or \"message\"");
  }

  if (root.contains("init")) {
    const json& in = require_object(root["init"], "init");
    reject_unknown(in, "init", {"mode", "radius", "x", "mu", "lambda"});
    if (in.contains("mode")) {
      cfg.init.mode = get_string(in["mode"], "init.mode");
      if (cfg.init.mode != "oracle-perturb" && cfg.init.mode != "explicit" && cfg.init.mode != "zeros") {
        fail("init.mode", "expected oracle-perturb, explicit or zeros");
      }
    }
    if (in.contains("radius")) {
      cfg.init.radius = get_number(in["radius"], "init.radius");
      if (!(cfg.init.radius >= 0.0)) fail("init.radius", "must be nonnegative");
    }
    if (in.contains("x")) cfg.init.x = get_vector(in["x"], "init.x");
    if (in.contains("mu")) cfg.init.mu = get_vector(in["mu"], "init.mu");
    if (in.contains("lambda")) cfg.init.lambda = get_vector(in["lambda"], "init.lambda");
    if (cfg.init.mode == "explicit" && !cfg.init.x) fail("init.x", "required when init.mode is explicit");
  }

  MoMConfig& mom = cfg.mom;
  mom.tol = 1e-8;
  if (root.contains("c0")) mom.c0 = get_number(root["c0"], "c0");
  if (root.contains("beta")) mom.beta = get_number(root["beta"], "beta");
  if (root.contains("c_max")) mom.c_max = get_number(root["c_max"], "c_max");
  if (root.contains("tol")) mom.tol = cfg.tol;
  if (root.contains("inner")) {
    const json& in = require_object(root["inner"], "inner");
    reject_unknown(in, "inner", {"alpha", "schedule", "eps0", "gamma", "max_iter"});
    if (in.contains("alpha") && in.contains("schedule")) fail("inner", "give either alpha or schedule, not both");
    if (in.contains("alpha")) mom.inner_alpha = get_number(in["alpha"], "inner.alpha");
    if (in.contains("schedule")) {
      const json& s = require_object(in["schedule"], "inner.schedule");
      reject_unknown(s, "inner.schedule", {"a", "b"});
      if (!s.contains("a")) fail("inner.schedule.a", "missing required key");
      if (!s.contains("b")) fail("inner.schedule.b", "missing required key");
      mom.inner_schedule = StepSchedule{get_number(s["a"], "inner.schedule.a"), get_number(s["b"], "inner.schedule.b")};
    }
    if (in.contains("eps0")) mom.eps0 = get_number(in["eps0"], "inner.eps0");
    if (in.contains("gamma")) mom.gamma = get_number(in["gamma"], "inner.gamma");
    if (in.contains("max_iter")) mom.inner_max_iter = get_integer(in["max_iter"], "inner.max_iter");
  }
  if (root.contains("outer")) {
    const json& out = require_object(root["outer"], "outer");
    reject_unknown(out, "outer", {"max_iter"});
    if (out.contains("max_iter")) mom.outer_max_iter = get_integer(out["max_iter"], "outer.max_iter");
  }
  mom.execution = cfg.execution;
  if (cfg.algorithm == Algorithm::A3) {
    try {
      validate(mom);
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, std::string("method of multipliers settings: ") + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace lagnet
