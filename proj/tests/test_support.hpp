#pragma once

#include <random>
#include <string>

#include "lagnet/fixtures.hpp"
#include "lagnet/oracle.hpp"

namespace lagnet::testing {

struct Solved {
  Fixture fixture;
  OracleSolution oracle;
  MultiplierState sol;
};

inline Solved solve_fixture(const std::string& name) {
  Solved s{make_fixture(name), {}, {}};
  s.oracle = solve_centralized(s.fixture.problem, s.fixture.oracle_start);
  s.sol = lifted_multipliers(s.fixture.problem, s.oracle).state;
  return s;
}

inline MultiplierState perturbed(const MultiplierState& s, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-radius, radius);
  MultiplierState out = s;
  for (Vec* w : {&out.x, &out.mu, &out.lambda})
    for (Eigen::Index k = 0; k < w->size(); ++k) (*w)(k) += u(rng);
  return out;
}

inline double state_distance(const MultiplierState& a, const MultiplierState& b) {
  return std::sqrt((a.x - b.x).squaredNorm() + (a.mu - b.mu).squaredNorm() +
                   (a.lambda - b.lambda).squaredNorm());
}

}  // namespace lagnet::testing
