#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cibo/flow_prior/flow_prior.hpp"
#include "cibo/latent_sampler/latent_sampler.hpp"
#include "cibo/problems/problem.hpp"
#include "cibo/surrogates/ensemble.hpp"

namespace cibo {

enum class Method { cibo, random_search };

const char* method_name(Method m);
/// Throws std::invalid_argument for unknown names.
Method parse_method(const std::string& name);

struct RunConfig {
  std::string problem = "rastrigin";
  std::size_t dim = 20;
  bool indicator = false;

  std::size_t rounds = 20;
  std::size_t batch_size = 20;
  std::size_t initial_size = 50;
  std::size_t buffer_size = 200;
  std::size_t filter_factor = 10;
  /// Hit-and-run feasible points placed in D0 in indicator mode.
  std::size_t feasible_init = 10;
  /// Regret reported while no feasible point is known. Unset: the worst
  /// benchmark value in D0 minus the optimum.
  std::optional<double> sentinel_regret;

  LagrangianParams lagrangian;
  SurrogateConfig surrogate;
  FlowConfig flow;
  SamplerConfig sampler;

  std::uint64_t seed = 0;

  std::size_t budget() const { return initial_size + rounds * batch_size; }
  /// Checks the cross-field invariants and every module config.
  void validate() const;
};

struct TraceRow {
  std::size_t round = 0;
  std::size_t evaluations = 0;
  /// Lowest benchmark value among feasible evaluations so far.
  std::optional<double> best_feasible;
  double regret = 0.0;
  double feasibility_ratio = 0.0;
  double seconds = 0.0;
};

struct RunState {
  std::size_t round = 0;
  std::vector<EvalRecord> dataset;
  std::size_t evaluations = 0;
  std::optional<double> best_feasible;
  double sentinel_regret = 0.0;
  /// Accumulated round time (zero with Timing::none).
  double elapsed_seconds = 0.0;
  std::vector<TraceRow> trace;
  /// Feasible records in the dataset after each round's update.
  std::vector<std::size_t> dataset_feasible;
};

/// |D0| points uniform in the box, evaluated. In indicator mode the last
/// `feasible_init` of them are replaced by hit-and-run feasible points.
std::vector<EvalRecord> initialize_dataset(const Problem& problem, const RunConfig& config, RandomSource& rng);

/// Indices of the b largest scores, ties broken by lower index. Throws when
/// there are fewer than b scores.
std::vector<std::size_t> top_indices(const Vector& scores, std::size_t b);

/// Filtering on predictions already expressed in score units: keeps the b
/// candidates maximizing mu + gamma sigma - lambda sum max(0, g).
std::vector<std::size_t> filter_top_b(const Vector& mu, const Vector& sigma, const Matrix& g,
                                      const LagrangianParams& params, std::size_t b);

/// Union of `dataset` and `incoming` truncated to the `capacity` records with
/// the highest scaled Lagrangian score, ties going to the earlier record.
/// Survivors keep their relative order.
std::vector<EvalRecord> move_dataset(std::vector<EvalRecord> dataset, std::vector<EvalRecord> incoming,
                                     std::size_t capacity, double lambda, const ScoreScaling& scaling);

/// Regret of the best feasible value against the known optimum (or lower
/// bound), capped at the sentinel; the sentinel when nothing feasible is known.
double track_regret(const std::optional<double>& best_feasible, const ProblemSpec& spec, double sentinel);

/// Candidate scoring used by the sampler target and the filter. Returns the
/// reward exponent of domain points in score units.
using RewardFactory =
    std::function<RewardFn(const std::vector<EvalRecord>& dataset, const ScoreScaling& scaling, RandomSource& rng)>;

enum class Timing { wall, none };

struct RunOptions {
  Timing timing = Timing::wall;
  /// Replaces the surrogate ensemble (for oracle tests).
  RewardFactory reward_override;
  /// Called after each round with the updated state.
  std::function<void(const RunState&)> on_round;
};

/// Builds D0 and the sentinel. D0 is drawn from rng.fork("init") of the run
/// seed, so every method sees the same initial data for a given seed.
RunState start_run(const Problem& problem, const RunConfig& config);

/// One CiBO round: train models on the current dataset, sample N * B
/// candidates, keep B, evaluate and update the dataset.
void cibo_round(RunState& state, const Problem& problem, const RunConfig& config, const RunOptions& options = {});

/// One random-search round: B uniform points in the box.
void random_search_round(RunState& state, const Problem& problem, const RunConfig& config,
                         const RunOptions& options = {});

/// Full run of `config.rounds` rounds.
RunState run_optimization(const Problem& problem, const RunConfig& config, Method method,
                          const RunOptions& options = {});

}  // namespace cibo
