#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cibo/problems/problem.hpp"

namespace cibo {

/// Names accepted by make_problem: "rastrigin", "ackley", "rosenbrock", "rover".
std::vector<std::string> problem_names();

/// Builds a registered problem. Rover requires an even dimension (two
/// coordinates per control point) and uses the standard obstacle layout.
std::shared_ptr<const Problem> make_problem(const std::string& name, std::size_t dim,
                                            bool indicator_mode);

}  // namespace cibo
