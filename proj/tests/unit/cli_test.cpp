#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "cibo/cli/config.hpp"
#include "cibo/cli/experiment.hpp"
#include "cibo/problems/registry.hpp"

using namespace cibo;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("cibo_cli_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

Settings tiny_settings(const std::filesystem::path& dir) {
  return parse_settings(
      "problem = rastrigin\n"
      "dim = 4\n"
      "rounds = 2\n"
      "batch_size = 4\n"
      "initial_size = 10\n"
      "buffer_size = 12\n"
      "filter_factor = 2\n"
      "seeds = 2\n"
      "timing = none\n"
      "beta = 1\n"
      "surrogate.ensemble_size = 2\n"
      "surrogate.hidden_layers = 1\n"
      "surrogate.hidden_units = 8\n"
      "surrogate.epochs = 3\n"
      "flow.hidden_layers = 1\n"
      "flow.hidden_units = 8\n"
      "flow.epochs = 5\n"
      "flow.integration_steps = 4\n"
      "sampler.hidden_layers = 1\n"
      "sampler.hidden_units = 8\n"
      "sampler.num_steps = 4\n"
      "sampler.batch_size = 8\n"
      "sampler.iterations = 2\n"
      "output_dir = " +
      dir.string() + "\n");
}

}  // namespace

TEST_CASE("full-scale presets") {
  const ExperimentConfig r = build_config({{"preset", "rastrigin-200d"}});
  CHECK(r.run.problem == "rastrigin");
  CHECK(r.run.dim == 200);
  CHECK(r.run.lagrangian.lambda == 10.0);
  CHECK(r.run.lagrangian.beta == 1e5);
  CHECK(r.run.buffer_size == 2000);
  CHECK(r.run.filter_factor == 10);
  CHECK(r.run.budget() == 10000);

  const ExperimentConfig rover = build_config({{"preset", "rover-60d"}});
  CHECK(rover.run.lagrangian.lambda == 3.0);
  CHECK(rover.run.lagrangian.beta == 1e5);
  CHECK(rover.run.buffer_size == 1000);
  CHECK(rover.run.filter_factor == 10);
  CHECK(rover.run.budget() == 2000);

  CHECK(build_config({{"preset", "ackley-200d"}}).run.buffer_size == 3000);
  for (const std::string& name : preset_names()) CHECK_NOTHROW(build_config({{"preset", name}}));

  const ExperimentConfig desk = build_config({{"preset", "rastrigin-200d-desk"}});
  CHECK(desk.run.dim == 20);
  CHECK(desk.run.initial_size == 50);
  CHECK(desk.run.batch_size == 20);
  CHECK(desk.run.rounds == 20);
  CHECK(desk.run.budget() == 450);
  CHECK(desk.run.surrogate.hidden_units == 256);
}

TEST_CASE("config errors name the key") {
  auto message = [](const Settings& s) {
    try {
      build_config(s);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message({{"dim", "4"}}).find("'problem'") != std::string::npos);
  CHECK(message({{"problem", "rastrigin"}, {"colour", "red"}}).find("colour") != std::string::npos);
  CHECK(message({{"problem", "rastrigin"}, {"rounds", "-3"}}).find("rounds") != std::string::npos);
  CHECK(message({{"problem", "rastrigin"}, {"lambda", "ten"}}).find("lambda") != std::string::npos);
  CHECK(message({{"problem", "rastrigin"}, {"sampler.off_policy", "maybe"}}).find("sampler.off_policy") !=
        std::string::npos);
  CHECK(message({{"problem", "rastrigin"}, {"buffer_size", "5"}}).find("buffer_size") != std::string::npos);
  CHECK(message({{"problem", "nowhere"}}).find("problem") != std::string::npos);
  CHECK(message({{"preset", "mopta"}}).find("mopta") != std::string::npos);
  CHECK(message({{"problem", "rastrigin"}, {"seeds", "0"}}).find("seeds") != std::string::npos);

  CHECK_THROWS_WITH_AS(parse_settings("problem = rastrigin\nno equals sign\n"), doctest::Contains("line 2"),
                       ConfigError);
  CHECK_THROWS_AS(read_settings_file("/nonexistent/cibo.cfg"), ConfigError);
}

TEST_CASE("settings precedence: preset, file, overrides") {
  const Settings file = parse_settings("# comment\n\npreset = rastrigin-200d-desk\nrounds = 7\nlambda = 0\n");
  const ExperimentConfig c = build_config(file, {{"rounds", "3"}, {"method", "random-search"}, {"format", "jsonl"}});
  CHECK(c.run.rounds == 3);
  CHECK(c.run.lagrangian.lambda == 0.0);
  CHECK(c.run.buffer_size == 200);
  CHECK(c.method == Method::random_search);
  CHECK(c.format == TraceFormat::jsonl);
  // A preset named only among the overrides still applies first.
  CHECK(build_config({{"rounds", "5"}}, {{"preset", "rover-60d"}}).run.rounds == 5);
}

TEST_CASE("trace rows round-trip") {
  TraceRow row;
  row.round = 3;
  row.evaluations = 110;
  row.regret = 0.1 + 0.2;
  row.feasibility_ratio = 0.35;
  row.seconds = 1.0 / 3.0;
  const std::string none = format_trace_row(row, TraceFormat::csv);
  CHECK(none.find(",,") != std::string::npos);
  const TraceRow back = parse_trace_csv_row(none);
  CHECK_FALSE(back.best_feasible);
  CHECK(back.regret == row.regret);
  CHECK(back.seconds == row.seconds);

  row.best_feasible = 12.5;
  const TraceRow again = parse_trace_csv_row(format_trace_row(row, TraceFormat::csv));
  REQUIRE(again.best_feasible);
  CHECK(*again.best_feasible == 12.5);
  CHECK(again.round == 3);
  CHECK(again.evaluations == 110);

  CHECK(format_trace_row(TraceRow{}, TraceFormat::jsonl).find("\"best_feasible\":null") != std::string::npos);
  CHECK(format_trace_row(row, TraceFormat::jsonl).rfind("{\"round\":3,\"evals\":110,", 0) == 0);
  CHECK_THROWS(parse_trace_csv_row("1,2,3"));
}

TEST_CASE("aggregation: identical traces and a hand example") {
  std::vector<TraceRow> t(2);
  t[0].round = 1;
  t[0].regret = 5.0;
  t[0].feasibility_ratio = 0.5;
  t[1].round = 2;
  t[1].regret = 4.0;
  t[1].feasibility_ratio = 1.0;
  const auto same = aggregate_traces({t, t, t});
  REQUIRE(same.size() == 2);
  CHECK(same[1].regret_mean == 4.0);
  CHECK(same[1].regret_std == 0.0);
  CHECK(same[0].feasibility_std == 0.0);
  CHECK(same[0].seeds == 3);

  std::vector<TraceRow> u = t;
  u[0].regret = 1.0;
  u.pop_back();
  const auto mixed = aggregate_traces({t, u});
  CHECK(mixed[0].regret_mean == 3.0);
  CHECK(mixed[0].regret_std == 2.0);
  CHECK(mixed[1].seeds == 1);
}

TEST_CASE("run_experiment: files, reproducibility and exact aggregation") {
  const auto dir = scratch("run");
  const ExperimentConfig c = build_config(tiny_settings(dir));
  const ExperimentResult first = run_experiment(c);
  REQUIRE(first.ok());
  REQUIRE(first.seeds.size() == 2);
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) files += entry.is_regular_file();
  CHECK(files == 3);

  std::vector<std::string> before;
  std::vector<std::vector<TraceRow>> parsed;
  for (const SeedResult& s : first.seeds) {
    const std::string text = slurp(s.trace_file);
    before.push_back(text);
    const auto ls = lines(text);
    REQUIRE(ls.size() == 3);
    CHECK(ls[0] == kTraceHeader);
    std::vector<TraceRow> rows;
    for (std::size_t i = 1; i < ls.size(); ++i) rows.push_back(parse_trace_csv_row(ls[i]));
    CHECK(rows.back().evaluations == c.run.budget());
    parsed.push_back(rows);
  }
  const std::string aggregate = slurp(first.aggregate_file);
  const auto agg_lines = lines(aggregate);
  REQUIRE(agg_lines.size() == 3);
  CHECK(agg_lines[0] == kAggregateHeader);
  const auto recomputed = aggregate_traces(parsed);
  for (std::size_t i = 0; i < recomputed.size(); ++i) CHECK(agg_lines[i + 1] == format_aggregate_row(recomputed[i]));

  const ExperimentResult second = run_experiment(c);
  for (std::size_t i = 0; i < second.seeds.size(); ++i) CHECK(slurp(second.seeds[i].trace_file) == before[i]);
  CHECK(slurp(second.aggregate_file) == aggregate);
  std::filesystem::remove_all(dir);
}

TEST_CASE("random search shares the budget and the schema") {
  const auto dir = scratch("rs");
  const ExperimentConfig cibo_cfg = build_config(tiny_settings(dir));
  const ExperimentConfig rs_cfg = build_config(tiny_settings(dir), {{"method", "random-search"}, {"format", "jsonl"}});
  const ExperimentResult a = run_experiment(cibo_cfg);
  const ExperimentResult b = run_experiment(rs_cfg);
  CHECK(a.seeds[0].trace_file.filename() == "cibo_seed0.csv");
  CHECK(b.seeds[1].trace_file.filename() == "random-search_seed1.jsonl");
  CHECK(a.seeds[0].trace.back().evaluations == b.seeds[0].trace.back().evaluations);
  const auto json_lines = lines(slurp(b.seeds[0].trace_file));
  REQUIRE(json_lines.size() == 2);
  CHECK(json_lines[0].rfind("{\"round\":1,\"evals\":14,\"best_feasible\":", 0) == 0);
  CHECK(json_lines[0].find("\"feasibility_ratio\":") != std::string::npos);
  CHECK(json_lines[0].find("\"seconds\":0") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("random search feasibility on rastrigin-20d matches Monte Carlo") {
  RunConfig c;
  c.problem = "rastrigin";
  c.dim = 20;
  c.initial_size = 200;
  c.batch_size = 20;
  c.rounds = 100;
  c.buffer_size = 200;
  auto p = make_problem("rastrigin", 20, false);
  RunOptions opts;
  opts.timing = Timing::none;
  const RunState s = run_optimization(*p, c, Method::random_search, opts);
  CHECK(s.evaluations == 2200);
  double feasible = 0.0;
  for (const TraceRow& r : s.trace) feasible += r.feasibility_ratio * static_cast<double>(c.batch_size);

  RandomSource mc(99);
  const int draws = 200000;
  int hits = 0;
  for (int i = 0; i < draws; ++i) {
    const Vector x = mc.uniform_matrix(20, 1, -5.0, 5.0).col(0);
    hits += (p->constraint_values(x).array() <= 0.0).all();
  }
  const double p_mc = static_cast<double>(hits) / draws;
  const double n = 2000.0;
  const double p_rs = feasible / n;
  const double tolerance = 4.0 * std::sqrt(std::max(p_mc, 1.0 / draws) / n);
  CHECK(p_mc < 1e-3);
  CHECK(std::abs(p_rs - p_mc) <= tolerance);
}
