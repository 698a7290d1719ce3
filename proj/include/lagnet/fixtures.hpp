#pragma once

#include <string>
#include <vector>

#include "lagnet/problem.hpp"

namespace lagnet {

/// Built-in test problems with known solutions.
struct Fixture {
  LiftedProblem problem;
  /// Starting point handed to the centralized solver (pins the intended root).
  Vec oracle_start;
};

/**
 * TP-PATH2: n = 1, f1 = ½(x-1)², f2 = ½(x+1)², h1 = x - 0.5, agent 2 unconstrained.
 * Solution x* = 0.5, ψ* = -1.
 */
Fixture make_path2(const GraphSpec* graph = nullptr);

/**
 * TP-AFFINE2: n = 2, f_i = ½‖x - a_i‖², a1 = (1,0), a2 = (0,1), h1 = x1 + x2 - 1,
 * h2 = x1 - x2. Solution x* = (0.5, 0.5), ψ* = (0, 0).
 */
Fixture make_affine2(const GraphSpec* graph = nullptr);

/**
 * TP-NONCONV3: n = 2 on the path 1-2-3.
 *   f1 = ½‖x - (3,0)‖², h1 = ‖x‖² - 1
 *   f2 = ¼x1⁴ + ½x2²
 *   f3 = -x2²
 * Solution x* = (1, 0), ψ* = 0.5. Agent 3's block Hessian is diag(0, -2), so the
 * blockwise test fails, while the tangent direction (0, 1) has curvature +1.
 */
Fixture make_nonconv3(const GraphSpec* graph = nullptr);

/// Looks up a fixture by its name ("TP-PATH2", "TP-AFFINE2", "TP-NONCONV3").
Fixture make_fixture(const std::string& name, const GraphSpec* graph = nullptr);

std::vector<std::string> fixture_names();

}  // namespace lagnet
