#include "cibo/optimizer/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cibo/problems/hit_and_run.hpp"

namespace cibo {

const char* method_name(Method m) { return m == Method::cibo ? "cibo" : "random-search"; }

Method parse_method(const std::string& name) {
  if (name == "cibo") return Method::cibo;
  if (name == "random-search") return Method::random_search;
  throw std::invalid_argument("unknown method '" + name + "' (expected cibo or random-search)");
}

void RunConfig::validate() const {
  if (dim == 0) throw std::invalid_argument("dim must be >= 1");
  if (rounds == 0) throw std::invalid_argument("rounds must be >= 1");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (filter_factor == 0) throw std::invalid_argument("filter_factor must be >= 1");
  if (initial_size == 0) throw std::invalid_argument("initial_size must be >= 1");
  if (buffer_size < batch_size) throw std::invalid_argument("buffer_size must be >= batch_size");
  if (indicator && feasible_init > initial_size) {
    throw std::invalid_argument("feasible_init must not exceed initial_size");
  }
  if (sentinel_regret && !std::isfinite(*sentinel_regret)) throw std::invalid_argument("sentinel_regret must be finite");
  lagrangian.validate();
  surrogate.validate();
  flow.validate();
  sampler.validate();
}

std::vector<EvalRecord> initialize_dataset(const Problem& problem, const RunConfig& config, RandomSource& rng) {
  const ProblemSpec& spec = problem.spec();
  const auto d = static_cast<Eigen::Index>(spec.dim);
  std::vector<Vector> points;
  points.reserve(config.initial_size);
  for (std::size_t i = 0; i < config.initial_size; ++i) {
    Vector x(d);
    for (Eigen::Index j = 0; j < d; ++j) x[j] = rng.uniform(spec.lower[j], spec.upper[j]);
    points.push_back(std::move(x));
  }
  if (spec.indicator_mode && config.feasible_init > 0) {
    const std::optional<ConvexRegion> region = problem.feasible_region();
    if (!region) throw ProblemError(spec.name + ": no known feasible region for feasible initialization");
    RandomSource walk = rng.fork("hit-and-run");
    std::vector<Vector> feasible = hit_and_run_feasible(walk, *region, config.feasible_init);
    std::copy(feasible.begin(), feasible.end(), points.end() - static_cast<std::ptrdiff_t>(feasible.size()));
  }
  std::vector<EvalRecord> out;
  out.reserve(points.size());
  for (const Vector& x : points) out.push_back(problem.evaluate(x));
  return out;
}

std::vector<std::size_t> top_indices(const Vector& scores, std::size_t b) {
  if (static_cast<std::size_t>(scores.size()) < b) {
    throw std::invalid_argument("filter: " + std::to_string(scores.size()) + " candidates for a batch of " +
                                std::to_string(b));
  }
  std::vector<std::size_t> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t c) {
    return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(c)];
  });
  idx.resize(b);
  return idx;
}

std::vector<std::size_t> filter_top_b(const Vector& mu, const Vector& sigma, const Matrix& g,
                                      const LagrangianParams& params, std::size_t b) {
  if (sigma.size() != mu.size() || g.rows() != mu.size()) throw ShapeError("filter_top_b: prediction sizes differ");
  Vector scores(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    scores[i] = reward_exponent(mu[i], sigma[i], g.row(i).transpose(), params);
  }
  return top_indices(scores, b);
}

std::vector<EvalRecord> move_dataset(std::vector<EvalRecord> dataset, std::vector<EvalRecord> incoming,
                                     std::size_t capacity, double lambda, const ScoreScaling& scaling) {
  for (EvalRecord& r : incoming) dataset.push_back(std::move(r));
  if (dataset.size() <= capacity) return dataset;
  Vector scores(static_cast<Eigen::Index>(dataset.size()));
  for (std::size_t i = 0; i < dataset.size(); ++i) scores[static_cast<Eigen::Index>(i)] = scaling.score(dataset[i], lambda);
  std::vector<std::size_t> keep = top_indices(scores, capacity);
  std::sort(keep.begin(), keep.end());
  std::vector<EvalRecord> out;
  out.reserve(capacity);
  for (std::size_t i : keep) out.push_back(std::move(dataset[i]));
  return out;
}

double track_regret(const std::optional<double>& best_feasible, const ProblemSpec& spec, double sentinel) {
  if (!best_feasible) return sentinel;
  return std::min(sentinel, *best_feasible - spec.known_feasible_optimum.value_or(0.0));
}

namespace {

RandomSource round_stream(const RunConfig& config, std::size_t round) {
  return RandomSource(config.seed).fork("round").fork(round);
}

/// Evaluates the batch, updates the dataset and appends the trace row.
void finish_round(RunState& state, const Problem& problem, const RunConfig& config, const Matrix& batch,
                  const RunOptions& options, std::chrono::steady_clock::time_point started) {
  std::vector<EvalRecord> fresh;
  fresh.reserve(static_cast<std::size_t>(batch.rows()));
  std::size_t feasible = 0;
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    fresh.push_back(problem.evaluate(batch.row(i).transpose()));
    const EvalRecord& r = fresh.back();
    if (is_feasible(r)) {
      ++feasible;
      const double v = r.benchmark_value();
      if (!state.best_feasible || v < *state.best_feasible) state.best_feasible = v;
    }
  }
  state.evaluations += fresh.size();

  std::vector<EvalRecord> merged = state.dataset;
  merged.insert(merged.end(), fresh.begin(), fresh.end());
  const ScoreScaling scaling = ScoreScaling::fit(merged, config.indicator);
  state.dataset = move_dataset(std::move(state.dataset), std::move(fresh), config.buffer_size,
                               config.lagrangian.lambda, scaling);
  state.dataset_feasible.push_back(static_cast<std::size_t>(
      std::count_if(state.dataset.begin(), state.dataset.end(), [](const EvalRecord& r) { return is_feasible(r); })));

  ++state.round;
  if (options.timing == Timing::wall) {
    state.elapsed_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  TraceRow row;
  row.round = state.round;
  row.evaluations = state.evaluations;
  row.best_feasible = state.best_feasible;
  row.regret = track_regret(state.best_feasible, problem.spec(), state.sentinel_regret);
  row.feasibility_ratio = static_cast<double>(feasible) / static_cast<double>(batch.rows());
  row.seconds = state.elapsed_seconds;
  state.trace.push_back(row);
  if (options.on_round) options.on_round(state);
}

void check_problem(const Problem& problem, const RunConfig& config) {
  if (problem.spec().dim != config.dim) {
    throw std::invalid_argument("problem dimension " + std::to_string(problem.spec().dim) +
                                " does not match config dim " + std::to_string(config.dim));
  }
  if (problem.spec().indicator_mode != config.indicator) {
    throw std::invalid_argument("problem and config disagree on indicator feedback");
  }
}

}  // namespace

RunState start_run(const Problem& problem, const RunConfig& config) {
  config.validate();
  check_problem(problem, config);
  RunState state;
  RandomSource init = RandomSource(config.seed).fork("init");
  state.dataset = initialize_dataset(problem, config, init);
  state.evaluations = state.dataset.size();
  double worst = -std::numeric_limits<double>::infinity();
  for (const EvalRecord& r : state.dataset) {
    worst = std::max(worst, r.benchmark_value());
    if (is_feasible(r) && (!state.best_feasible || r.benchmark_value() < *state.best_feasible)) {
      state.best_feasible = r.benchmark_value();
    }
  }
  state.sentinel_regret =
      config.sentinel_regret.value_or(worst - problem.spec().known_feasible_optimum.value_or(0.0));
  if (state.dataset.size() > config.buffer_size) {
    const ScoreScaling scaling = ScoreScaling::fit(state.dataset, config.indicator);
    state.dataset = move_dataset(std::move(state.dataset), {}, config.buffer_size, config.lagrangian.lambda, scaling);
  }
  return state;
}

void cibo_round(RunState& state, const Problem& problem, const RunConfig& config, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const ProblemSpec& spec = problem.spec();
  const BoxScaler scaler(spec.lower, spec.upper);
  RandomSource rng = round_stream(config, state.round + 1);

  // Phase 1: reweighted training of the prior and the surrogates.
  const ScoreScaling scaling = ScoreScaling::fit(state.dataset, config.indicator);
  const WeightedDataset weighted = compute_weights(state.dataset, config.lagrangian.lambda, scaling);
  const Matrix x_model = scaler.to_model(weighted.inputs());

  FlowPrior prior(spec.dim, config.flow, rng.fork("flow-init"));
  RandomSource flow_rng = rng.fork("flow-train");
  prior.train(x_model, weighted.weights, flow_rng);

  SurrogateEnsemble ensemble;
  RewardFn reward;
  if (options.reward_override) {
    RandomSource oracle_rng = rng.fork("reward");
    reward = options.reward_override(state.dataset, scaling, oracle_rng);
  } else {
    SurrogateConfig sc = config.surrogate;
    sc.indicator_mode = config.indicator;
    ensemble = SurrogateEnsemble::fit(weighted, sc, rng.fork("surrogates"));
    reward = [&ensemble, &config, &scaling](const Matrix& x) {
      return ensemble.reward(x, config.lagrangian, scaling);
    };
  }

  // Phase 2: amortized posterior sampling in latent space, then filtering.
  const TargetLogDensity target(prior, scaler, reward, config.lagrangian.beta);
  LatentSampler sampler(spec.dim, config.sampler, rng.fork("sampler-init"));
  RandomSource sampler_rng = rng.fork("sampler-train");
  sampler.train([&target](const Matrix& z) { return target(z); }, sampler_rng);

  RandomSource candidate_rng = rng.fork("candidates");
  const Matrix z = sampler.sample(candidate_rng, config.filter_factor * config.batch_size);
  const Matrix candidates = target.decode(z);
  const std::vector<std::size_t> chosen = top_indices(reward(candidates), config.batch_size);
  Matrix batch(static_cast<Eigen::Index>(chosen.size()), candidates.cols());
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    batch.row(static_cast<Eigen::Index>(i)) = candidates.row(static_cast<Eigen::Index>(chosen[i]));
  }
  finish_round(state, problem, config, batch, options, started);
}

void random_search_round(RunState& state, const Problem& problem, const RunConfig& config, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const ProblemSpec& spec = problem.spec();
  RandomSource rng = round_stream(config, state.round + 1).fork("random-search");
  Matrix batch(static_cast<Eigen::Index>(config.batch_size), static_cast<Eigen::Index>(spec.dim));
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    for (Eigen::Index j = 0; j < batch.cols(); ++j) batch(i, j) = rng.uniform(spec.lower[j], spec.upper[j]);
  }
  finish_round(state, problem, config, batch, options, started);
}

RunState run_optimization(const Problem& problem, const RunConfig& config, Method method, const RunOptions& options) {
  RunState state = start_run(problem, config);
  for (std::size_t r = 0; r < config.rounds; ++r) {
    if (method == Method::cibo) {
      cibo_round(state, problem, config, options);
    } else {
      random_search_round(state, problem, config, options);
    }
  }
  return state;
}

}  // namespace cibo
