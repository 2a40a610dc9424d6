#include "cibo/problems/registry.hpp"

#include "cibo/problems/rover.hpp"
#include "cibo/problems/synthetic.hpp"

namespace cibo {

std::vector<std::string> problem_names() { return {"rastrigin", "ackley", "rosenbrock", "rover"}; }

std::shared_ptr<const Problem> make_problem(const std::string& name, std::size_t dim,
                                            bool indicator_mode) {
  if (name == "rastrigin") {
    return std::make_shared<SyntheticProblem>(SyntheticFunction::kRastrigin, dim, indicator_mode);
  }
  if (name == "ackley") {
    return std::make_shared<SyntheticProblem>(SyntheticFunction::kAckley, dim, indicator_mode);
  }
  if (name == "rosenbrock") {
    return std::make_shared<SyntheticProblem>(SyntheticFunction::kRosenbrock, dim, indicator_mode);
  }
  if (name == "rover") {
    if (dim == 0 || dim % 2 != 0) throw ProblemError("rover: dimension must be a positive even number");
    return std::make_shared<RoverProblem>(RoverSpec::standard(dim / 2), indicator_mode);
  }
  throw ProblemError("unknown problem '" + name + "'");
}

}  // namespace cibo
