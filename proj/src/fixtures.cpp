#include "lagnet/fixtures.hpp"

#include "lagnet/error.hpp"
#include "lagnet/polynomial.hpp"

namespace lagnet {

namespace {

LocalProblem local(const Polynomial& f) { return {f.as_function(), std::nullopt}; }
LocalProblem local(const Polynomial& f, const Polynomial& h) {
  return {f.as_function(), h.as_function()};
}

}  // namespace

Fixture make_path2(const GraphSpec* graph) {
  Polynomial f1(1, {{0.5, {2}}, {-1.0, {1}}, {0.5, {0}}});
  Polynomial f2(1, {{0.5, {2}}, {1.0, {1}}, {0.5, {0}}});
  Polynomial h1(1, {{1.0, {1}}, {-0.5, {0}}});
  GraphSpec g = graph ? *graph : path_graph(2);
  Fixture fx{make_lifted_problem("TP-PATH2", 1, {local(f1, h1), local(f2)}, g), Vec::Zero(1)};
  return fx;
}

Fixture make_affine2(const GraphSpec* graph) {
  Polynomial f1(2, {{0.5, {2, 0}}, {-1.0, {1, 0}}, {0.5, {0, 0}}, {0.5, {0, 2}}});
  Polynomial f2(2, {{0.5, {2, 0}}, {0.5, {0, 2}}, {-1.0, {0, 1}}, {0.5, {0, 0}}});
  Polynomial h1(2, {{1.0, {1, 0}}, {1.0, {0, 1}}, {-1.0, {0, 0}}});
  Polynomial h2(2, {{1.0, {1, 0}}, {-1.0, {0, 1}}});
  GraphSpec g = graph ? *graph : path_graph(2);
  return {make_lifted_problem("TP-AFFINE2", 2, {local(f1, h1), local(f2, h2)}, g), Vec::Zero(2)};
}

Fixture make_nonconv3(const GraphSpec* graph) {
  Polynomial f1(2, {{0.5, {2, 0}}, {-3.0, {1, 0}}, {4.5, {0, 0}}, {0.5, {0, 2}}});
  Polynomial h1(2, {{1.0, {2, 0}}, {1.0, {0, 2}}, {-1.0, {0, 0}}});
  Polynomial f2(2, {{0.25, {4, 0}}, {0.5, {0, 2}}});
  Polynomial f3(2, {{-1.0, {0, 2}}});
  GraphSpec g = graph ? *graph : path_graph(3);
  Vec start(2);
  start << 0.9, 0.1;
  return {make_lifted_problem("TP-NONCONV3", 2, {local(f1, h1), local(f2), local(f3)}, g), start};
}

Fixture make_fixture(const std::string& name, const GraphSpec* graph) {
  if (name == "TP-PATH2") return make_path2(graph);
  if (name == "TP-AFFINE2") return make_affine2(graph);
  if (name == "TP-NONCONV3") return make_nonconv3(graph);
  throw Error(ErrorKind::Config, "unknown fixture '" + name + "'");
}

std::vector<std::string> fixture_names() { return {"TP-PATH2", "TP-AFFINE2", "TP-NONCONV3"}; }

}  // namespace lagnet
