// Acceptance checks. Prints one PASS/FAIL line per criterion; pass criterion
// numbers as arguments to run a subset. Exit status is nonzero if any
// selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cibo/cli/config.hpp"
#include "cibo/cli/experiment.hpp"
#include "cibo/flow_prior/flow_prior.hpp"
#include "cibo/latent_sampler/latent_sampler.hpp"
#include "cibo/numerics/adam.hpp"
#include "cibo/numerics/mlp.hpp"
#include "cibo/optimizer/optimizer.hpp"
#include "cibo/problems/registry.hpp"
#include "../support/gradcheck.hpp"

using namespace cibo;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

std::filesystem::path runs_dir() {
  const char* env = std::getenv("CIBO_ACCEPTANCE_DIR");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("acceptance_runs");
}

// ---------------------------------------------------------------- 1 numerics

Outcome numerics() {
  Outcome o;
  RandomSource rng(1001);
  double worst = 0.0;
  for (int instance = 0; instance < 50; ++instance) {
    std::vector<std::size_t> widths{1 + rng.index(4)};
    const std::size_t hidden = 1 + rng.index(3);
    for (std::size_t h = 0; h < hidden; ++h) widths.push_back(2 + rng.index(7));
    widths.push_back(1 + rng.index(3));
    MlpNet net(widths, rng);
    const auto rows = static_cast<Eigen::Index>(1 + rng.index(6));
    const Matrix x = rng.standard_normal(rows, static_cast<Eigen::Index>(widths.front()));
    const Matrix y = rng.standard_normal(rows, static_cast<Eigen::Index>(widths.back()));
    const Matrix w = rng.uniform_matrix(rows, 1, 0.0, 2.0);
    auto loss = [&](Tape& t) {
      Var pred = net.forward(t, t.constant(x));
      Var err = ad::square(ad::sub(pred, t.constant(y)));
      return ad::mean(ad::mul(ad::row_sum(err), t.constant(w)));
    };
    worst = std::max(worst, testing::check_gradients(net.parameters(), loss).max_relative_error);
  }
  o.require(worst <= 1e-4, "gradient relative error " + fmt(worst));

  // Dyadic values keep every intermediate exact: m = v = 1 after the first
  // step, m_hat = 2, v_hat = 4, update = 0.25 * 2 / (2 + 2).
  Parameter p("p", Matrix::Constant(1, 1, 1.0));
  Adam adam({&p}, AdamConfig{0.25, 0.5, 0.75, 2.0});
  p.grad(0, 0) = 2.0;
  adam.step();
  const double first = p.value(0, 0);
  p.grad(0, 0) = 2.0;
  adam.step();
  const double second = p.value(0, 0);
  o.require(first == 0.875 && second == 0.75, "adam steps " + fmt(first, 17) + ", " + fmt(second, 17));
  o.detail << "50 random MLPs, worst FD relative error " << fmt(worst, 3) << "; Adam hand steps " << first << ", "
           << second;
  return o;
}

// --------------------------------------------------------------- 2 weighting

Outcome weighting() {
  Outcome o;
  auto rec = [](double y, double c) { return EvalRecord{Vector::Zero(1), y, Vector::Constant(1, c)}; };
  RandomSource rng(2002);
  double sum_err = 0.0, shift_err = 0.0;
  bool monotone = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EvalRecord> data;
    for (int i = 0; i < 30; ++i) data.push_back(rec(rng.uniform(-20.0, 20.0), rng.uniform(-2.0, 2.0)));
    const WeightedDataset w = compute_weights(data, 10.0);
    double total = 0.0;
    for (double v : w.weights) total += v;
    sum_err = std::max(sum_err, std::abs(total - 1.0));

    std::vector<EvalRecord> shifted = data;
    for (EvalRecord& r : shifted) r.y += 123.5;
    const WeightedDataset ws = compute_weights(shifted, 10.0);
    for (std::size_t i = 0; i < data.size(); ++i) shift_err = std::max(shift_err, std::abs(ws.weights[i] - w.weights[i]));

    std::vector<EvalRecord> raised = data;
    const std::size_t j = rng.index(data.size());
    raised[j].y += 0.25;
    monotone = monotone && compute_weights(raised, 10.0).weights[j] > w.weights[j];
  }
  o.require(sum_err < 1e-12, "sum error " + fmt(sum_err));
  o.require(shift_err < 1e-12, "shift error " + fmt(shift_err));
  o.require(monotone, "monotonicity");

  const double single = compute_weights({rec(-4.0, 3.0)}, 10.0).weights[0];
  const WeightedDataset sym = compute_weights({rec(5.0, -1.0), rec(5.0, -2.0)}, 10.0);
  // Equal scores through different routes: 6 - 10 * 0.1 = 5.
  const WeightedDataset pen = compute_weights({rec(5.0, 0.0), rec(6.0, 0.1)}, 10.0);
  o.require(single == 1.0, "single-point weight " + fmt(single, 17));
  o.require(sym.weights[0] == 0.5 && sym.weights[1] == 0.5, "symmetric weights");
  o.require(std::abs(pen.weights[0] - 0.5) < 1e-12, "penalized symmetric weights");
  o.detail << "max |sum - 1| " << fmt(sum_err, 2) << ", max shift change " << fmt(shift_err, 2)
           << ", single " << single << ", symmetric " << sym.weights[0] << "/" << sym.weights[1];
  return o;
}

// -------------------------------------------------------------- 3 flow prior

Outcome flow_prior() {
  Outcome o;
  FlowConfig cfg;
  cfg.hidden_layers = 2;
  cfg.hidden_units = 64;
  cfg.epochs = 600;
  cfg.batch_size = 64;
  cfg.learning_rate = 2e-3;
  cfg.integration_steps = 50;

  Eigen::RowVectorXd c(2);
  c << 0.5, -0.3;
  {
    FlowPrior prior(2, cfg, RandomSource(3001));
    RandomSource train(3002);
    prior.train(c.replicate(64, 1), std::vector<double>(64, 1.0 / 64.0), train);
    RandomSource rng(3003);
    const double dist = (prior.sample(rng, 200).rowwise() - c).rowwise().norm().mean();
    o.require(dist < 0.1, "point-mass distance " + fmt(dist));
    o.detail << "point mass: mean distance " << fmt(dist, 3);
  }
  {
    Matrix x(64, 2);
    for (Eigen::Index i = 0; i < 64; ++i) x.row(i).setConstant(i % 2 ? 0.7 : -0.7);
    FlowPrior prior(2, cfg, RandomSource(3011));
    RandomSource train(3012);
    prior.train(x, std::vector<double>(64, 1.0 / 64.0), train);
    RandomSource rng(3013);
    const Matrix out = prior.sample(rng, 200);
    // Nearest-mode assignment.
    int plus = 0;
    for (Eigen::Index i = 0; i < out.rows(); ++i) plus += out(i, 0) + out(i, 1) > 0.0;
    const double share = std::min(plus, 200 - plus) / 200.0;
    o.require(share >= 0.2, "smaller mode share " + fmt(share));
    o.detail << "; bimodal: smaller mode " << share;
  }
  {
    VelocityField linear = [](const Matrix& z, const Matrix&) { return z; };
    const Matrix z = Matrix::Ones(1, 1);
    auto err = [&](std::size_t n) { return std::abs(integrate_rk4(linear, z, n)(0, 0) - std::numbers::e); };
    const double order = std::log2(err(10) / err(20));
    const double slope = std::log(err(5) / err(50)) / std::log(10.0);
    o.require(std::abs(order - 4.0) < 0.2 && std::abs(slope - 4.0) < 0.2, "RK4 order " + fmt(order));
    o.detail << "; RK4 observed order " << fmt(order, 3) << " (slope " << fmt(slope, 3) << ")";
  }
  {
    FlowPrior untrained(3, cfg, RandomSource(3021));
    RandomSource rng(3022);
    const Matrix z = rng.standard_normal(50, 3);
    VelocityField zero = [](const Matrix& x, const Matrix&) { return Matrix::Zero(x.rows(), x.cols()); };
    const bool exact = untrained.push_forward(z) == z && integrate_rk4(zero, z, 17) == z;
    o.require(exact, "zero field is not the identity");
    o.detail << "; zero field identity " << (exact ? "exact" : "inexact");
  }
  return o;
}

// ----------------------------------------------------------- 4 latent sampler

Vector conjugate_reward(const Matrix& z) {
  Vector out = standard_normal_log_density(z);
  out.array() -= 0.5 * (z.col(0).array() - 1.0).square();
  return out;
}

double min_mode_share(const Matrix& z) {
  const auto n = static_cast<double>(z.rows());
  const double pos = static_cast<double>((z.col(0).array() > 0.0).count());
  return std::min(pos, n - pos) / n;
}

Outcome latent_sampler() {
  Outcome o;
  {
    SamplerConfig cfg;
    cfg.hidden_layers = 2;
    cfg.hidden_units = 32;
    cfg.batch_size = 64;
    cfg.iterations = 500;
    cfg.log_z_learning_rate = 1e-2;
    LatentSampler s(1, cfg, RandomSource(4001));
    RandomSource rng(4002);
    s.train(conjugate_reward, rng);
    RandomSource eval(4003);
    TrajectoryBatch b = s.forward_trajectory(eval, 20000);
    b.log_reward = conjugate_reward(b.terminal());
    const Vector z = b.terminal().col(0);
    const double mean = z.mean();
    const double var = (z.array() - mean).square().mean();
    // Trapezoid rule for log of the integral of N(z; 0, 1) exp(-(z - 1)^2 / 2).
    double integral = 0.0;
    const int n = 60000;
    const double lo = -15.0, hi = 15.0, h = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) {
      const double t = lo + h * i;
      const double f = std::exp(-0.5 * t * t - 0.5 * (t - 1.0) * (t - 1.0)) / std::sqrt(2.0 * std::numbers::pi);
      integral += (i == 0 || i == n ? 0.5 : 1.0) * f;
    }
    const double log_z_true = std::log(integral * h);
    const double tb = s.tb_loss(b);
    o.require(std::abs(mean - 0.5) <= 0.05, "mean " + fmt(mean));
    o.require(std::abs(var - 0.5) <= 0.05, "variance " + fmt(var));
    o.require(std::abs(s.log_z() - log_z_true) <= 0.05, "log Z " + fmt(s.log_z()));
    o.require(tb <= 1e-3, "TB loss " + fmt(tb));
    o.detail << "1-D: mean " << fmt(mean, 3) << ", var " << fmt(var, 3) << ", log Z " << fmt(s.log_z(), 4)
             << " vs " << fmt(log_z_true, 4) << ", TB " << fmt(tb, 2);
  }
  {
    const double mu = 2.5, width = 0.5;
    LogRewardFn bimodal = [&](const Matrix& z) {
      Vector out = standard_normal_log_density(z);
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double a = -((z(i, 0) - mu) * (z(i, 0) - mu) + z(i, 1) * z(i, 1)) / (2 * width * width);
        const double b = -((z(i, 0) + mu) * (z(i, 0) + mu) + z(i, 1) * z(i, 1)) / (2 * width * width);
        const double m = std::max(a, b);
        out[i] += m + std::log(std::exp(a - m) + std::exp(b - m));
      }
      return out;
    };
    SamplerConfig cfg;
    cfg.hidden_layers = 2;
    cfg.hidden_units = 32;
    cfg.batch_size = 64;
    cfg.iterations = 400;
    cfg.learning_rate = 3e-3;
    cfg.log_z_learning_rate = 1e-2;
    std::map<bool, double> share;
    std::map<bool, Matrix> pooled;
    for (bool off : {true, false}) {
      cfg.off_policy = off;
      Matrix all(0, 2);
      double total = 0.0;
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        LatentSampler s(2, cfg, RandomSource(4100 + seed));
        RandomSource rng(4200 + seed);
        s.train(bimodal, rng);
        RandomSource draw(4300 + seed);
        const Matrix z = s.sample(draw, 2000);
        total += min_mode_share(z);
        Matrix grown(all.rows() + z.rows(), 2);
        grown << all, z;
        all = std::move(grown);
      }
      share[off] = total / 4.0;
      pooled[off] = all;
    }
    const double both = min_mode_share(pooled[true]);
    o.require(both >= 0.25, "off-policy smaller mode share " + fmt(both));
    o.require(share[true] >= share[false], "off-policy min-mode share " + fmt(share[true], 3) + " < on-policy " +
                                                fmt(share[false], 3));
    o.detail << "; bimodal: smaller mode " << fmt(both, 3) << " of pooled samples, mean min-mode share off-policy "
             << fmt(share[true], 3) << " vs on-policy " << fmt(share[false], 3);
  }
  return o;
}

// ---------------------------------------------------------- 5 bookkeeping

Settings tiny_run(const std::filesystem::path& dir) {
  return {{"problem", "rastrigin"},
          {"dim", "6"},
          {"rounds", "4"},
          {"batch_size", "5"},
          {"initial_size", "12"},
          {"buffer_size", "15"},
          {"filter_factor", "3"},
          {"seeds", "2"},
          {"timing", "none"},
          {"beta", "1"},
          {"surrogate.ensemble_size", "2"},
          {"surrogate.hidden_layers", "1"},
          {"surrogate.hidden_units", "16"},
          {"surrogate.epochs", "5"},
          {"flow.hidden_layers", "1"},
          {"flow.hidden_units", "16"},
          {"flow.epochs", "20"},
          {"flow.integration_steps", "5"},
          {"sampler.hidden_layers", "1"},
          {"sampler.hidden_units", "16"},
          {"sampler.num_steps", "5"},
          {"sampler.batch_size", "16"},
          {"sampler.iterations", "3"},
          {"output_dir", dir.string()}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome bookkeeping() {
  Outcome o;
  const auto dir = runs_dir() / "bookkeeping";
  const ExperimentConfig cfg = build_config(tiny_run(dir));
  const auto inner = make_problem("rastrigin", 6, false);

  bool counting_ok = true, size_ok = true, monotone = true;
  for (Method method : {Method::cibo, Method::random_search}) {
    CountingProblem counting(inner);
    RunOptions opts;
    opts.timing = Timing::none;
    std::optional<double> best;
    opts.on_round = [&](const RunState& s) {
      size_ok = size_ok && s.dataset.size() <= cfg.run.buffer_size;
      counting_ok = counting_ok && counting.evaluations() == cfg.run.initial_size + s.round * cfg.run.batch_size;
      if (best) monotone = monotone && s.best_feasible && *s.best_feasible <= *best;
      best = s.best_feasible;
    };
    const RunState s = run_optimization(counting, cfg.run, method, opts);
    counting_ok = counting_ok && counting.evaluations() == cfg.run.budget() && s.evaluations == cfg.run.budget();
  }
  o.require(counting_ok, "evaluation count");
  o.require(size_ok, "dataset size bound");
  o.require(monotone, "best-feasible monotonicity");

  // Filtering and truncation against exhaustive comparisons.
  RandomSource rng(5001);
  bool filter_ok = true, truncate_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    const Vector mu = rng.standard_normal(20, 1).col(0);
    const Vector sigma = rng.uniform_matrix(20, 1, 0.0, 1.0).col(0);
    const Matrix g = rng.standard_normal(20, 2);
    const LagrangianParams params;
    std::vector<std::size_t> chosen = filter_top_b(mu, sigma, g, params, 5);
    std::sort(chosen.begin(), chosen.end());
    std::vector<std::size_t> expect;
    for (Eigen::Index i = 0; i < 20; ++i) {
      const double si = mu[i] + sigma[i] - 10.0 * g.row(i).cwiseMax(0.0).sum();
      int better = 0;
      for (Eigen::Index j = 0; j < 20; ++j) {
        const double sj = mu[j] + sigma[j] - 10.0 * g.row(j).cwiseMax(0.0).sum();
        better += sj > si || (sj == si && j < i);
      }
      if (better < 5) expect.push_back(static_cast<std::size_t>(i));
    }
    filter_ok = filter_ok && chosen == expect;

    std::vector<EvalRecord> data, incoming;
    for (int i = 0; i < 5; ++i) data.push_back({Vector::Zero(1), rng.normal(), Vector::Constant(1, rng.normal())});
    for (int i = 0; i < 3; ++i) incoming.push_back({Vector::Zero(1), rng.normal(), Vector::Constant(1, rng.normal())});
    std::vector<EvalRecord> all = data;
    all.insert(all.end(), incoming.begin(), incoming.end());
    const auto kept = move_dataset(data, incoming, 3, 10.0, ScoreScaling::identity());
    std::vector<double> scores;
    for (const EvalRecord& r : all) scores.push_back(lagrangian_score(r.y, r.c, 10.0));
    std::vector<double> top = scores;
    std::sort(top.rbegin(), top.rend());
    std::vector<double> got;
    for (const EvalRecord& r : kept) got.push_back(lagrangian_score(r.y, r.c, 10.0));
    std::sort(got.rbegin(), got.rend());
    truncate_ok = truncate_ok && got == std::vector<double>(top.begin(), top.begin() + 3);
  }
  o.require(filter_ok, "filter oracle");
  o.require(truncate_ok, "truncation oracle");

  std::filesystem::remove_all(dir);
  const ExperimentResult a = run_experiment(cfg);
  std::vector<std::string> first;
  for (const SeedResult& s : a.seeds) first.push_back(slurp(s.trace_file));
  const ExperimentResult b = run_experiment(cfg);
  bool identical = a.ok() && b.ok();
  for (std::size_t i = 0; i < b.seeds.size(); ++i) identical = identical && slurp(b.seeds[i].trace_file) == first[i];
  o.require(identical, "trace files differ between identical runs");
  o.detail << "counting " << (counting_ok ? "exact" : "off") << ", |D| <= L " << (size_ok ? "held" : "violated")
           << ", best-feasible monotone " << (monotone ? "yes" : "no") << ", filter/truncation oracles "
           << (filter_ok && truncate_ok ? "agree" : "disagree") << ", traces " << (identical ? "byte-identical" : "differ");
  return o;
}

// ------------------------------------------------------- 6-8 end to end

struct Runs {
  std::vector<RunState> seeds;
  /// Regret of the best feasible record in each seed's D0.
  std::vector<double> initial_regret;
  double seconds = 0.0;

  double final_regret_mean() const {
    double s = 0.0;
    for (const RunState& r : seeds) s += r.trace.back().regret;
    return s / static_cast<double>(seeds.size());
  }
  /// Mean over seeds of the batch feasibility ratio in round r (1-based).
  double feasibility_mean(std::size_t r) const {
    double s = 0.0;
    for (const RunState& run : seeds) s += run.trace.at(r - 1).feasibility_ratio;
    return s / static_cast<double>(seeds.size());
  }
};

Runs run_seeds(const std::string& label, const Settings& overrides) {
  Settings s = {{"preset", "rastrigin-200d-desk"}, {"output_dir", (runs_dir() / label).string()}};
  s.insert(s.end(), overrides.begin(), overrides.end());
  const ExperimentConfig cfg = build_config(s);
  const auto problem = make_problem(cfg.run.problem, cfg.run.dim, cfg.run.indicator);
  std::filesystem::create_directories(cfg.output_dir);
  Runs out;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < cfg.seeds; ++k) {
    RunConfig run = cfg.run;
    run.seed = cfg.run.seed + k;
    std::ofstream trace(cfg.output_dir / (std::string(method_name(cfg.method)) + "_seed" + std::to_string(run.seed) + ".csv"));
    trace << kTraceHeader << '\n';
    RunOptions opts;
    opts.on_round = [&](const RunState& st) {
      trace << format_trace_row(st.trace.back(), TraceFormat::csv) << std::endl;
      std::cerr << label << " seed " << run.seed << " round " << st.round << " regret " << fmt(st.trace.back().regret)
                << " feasible " << st.trace.back().feasibility_ratio << '\n';
    };
    const RunState init = start_run(*problem, run);
    out.initial_regret.push_back(track_regret(init.best_feasible, problem->spec(), init.sentinel_regret));
    out.seeds.push_back(run_optimization(*problem, run, cfg.method, opts));
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::optional<Runs> baseline_cibo;

const Runs& cibo_desk() {
  if (!baseline_cibo) baseline_cibo = run_seeds("rastrigin_cibo", {});
  return *baseline_cibo;
}

Outcome end_to_end() {
  Outcome o;
  const Runs& cibo = cibo_desk();
  const Runs rs = run_seeds("rastrigin_random", {{"method", "random-search"}});
  const std::size_t rounds = cibo.seeds.front().trace.size();
  double best_ratio = 0.0;
  for (std::size_t r = rounds - 4; r <= rounds; ++r) best_ratio = std::max(best_ratio, cibo.feasibility_mean(r));
  const double seconds = cibo.seconds + rs.seconds;
  o.require(cibo.final_regret_mean() < rs.final_regret_mean(), "regret not below random search");
  o.require(best_ratio >= 0.8, "feasibility ratio " + fmt(best_ratio, 3) + " < 0.8 in the final 5 rounds");
  o.require(seconds < 1800.0, "runtime");
  o.detail << "mean final regret CiBO " << fmt(cibo.final_regret_mean()) << " vs random search "
           << fmt(rs.final_regret_mean()) << "; best mean batch feasibility in final 5 rounds " << fmt(best_ratio, 3)
           << "; " << fmt(seconds, 4) << " s";
  return o;
}

Outcome indicator() {
  Outcome o;
  const Runs runs = run_seeds("rastrigin_indicator", {{"indicator", "true"}, {"feasible_init", "10"}});
  bool retained = true, improved = true;
  std::ostringstream per_seed;
  for (std::size_t k = 0; k < runs.seeds.size(); ++k) {
    const RunState& s = runs.seeds[k];
    retained = retained && s.dataset_feasible.size() == s.trace.size() &&
               std::all_of(s.dataset_feasible.begin(), s.dataset_feasible.end(), [](std::size_t n) { return n >= 1; });
    const double final_regret = s.trace.back().regret;
    improved = improved && final_regret < runs.initial_regret[k];
    per_seed << " " << fmt(runs.initial_regret[k]) << " -> " << fmt(final_regret) << ";";
  }
  o.require(retained, "a round's dataset had no feasible record");
  o.require(improved, "final regret not below the best initial feasible regret");
  o.require(runs.seconds < 1800.0, "runtime");
  o.detail << "feasible record in every round's dataset: " << (retained ? "yes" : "no")
           << "; regret D0 -> final per seed:" << per_seed.str() << " " << fmt(runs.seconds, 4) << " s";
  return o;
}

Outcome ablations() {
  Outcome o;
  const Runs& full = cibo_desk();
  const Runs no_penalty = run_seeds("rastrigin_lambda0", {{"lambda", "0"}});
  const Runs no_filter = run_seeds("rastrigin_n1", {{"filter_factor", "1"}});
  const std::size_t last = full.seeds.front().trace.size();
  const double feas_full = full.feasibility_mean(last), feas_zero = no_penalty.feasibility_mean(last);
  o.require(feas_zero < feas_full, "lambda = 0 feasibility " + fmt(feas_zero, 3) + " not below lambda = 10 " +
                                       fmt(feas_full, 3));
  o.require(no_filter.final_regret_mean() >= full.final_regret_mean(),
            "N = 1 regret " + fmt(no_filter.final_regret_mean()) + " below N = 10 " + fmt(full.final_regret_mean()));
  o.detail << "final feasibility lambda=0 " << fmt(feas_zero, 3) << " vs lambda=10 " << fmt(feas_full, 3)
           << "; mean final regret N=1 " << fmt(no_filter.final_regret_mean()) << " vs N=10 "
           << fmt(full.final_regret_mean());
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"numerics oracles", numerics},
      {"weighting", weighting},
      {"flow prior oracles", flow_prior},
      {"latent sampler oracles", latent_sampler},
      {"loop bookkeeping", bookkeeping},
      {"end-to-end rastrigin-20d vs random search", end_to_end},
      {"indicator constraints", indicator},
      {"ablation directions", ablations},
  };
  const std::vector<double> budgets = {10, 1, 120, 300, 60, 1800, 1800, 1e9};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= budgets[k]) o.require(false, "runtime " + fmt(secs) + " s over budget");
    all = all && o.pass;
    std::printf("%s criterion %d (%s): %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
