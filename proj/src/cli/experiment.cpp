#include "cibo/cli/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cibo/problems/registry.hpp"

namespace cibo {

namespace {

std::string real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string extension(TraceFormat f) { return f == TraceFormat::csv ? ".csv" : ".jsonl"; }

}  // namespace

std::string format_trace_row(const TraceRow& row, TraceFormat format) {
  if (format == TraceFormat::csv) {
    return std::to_string(row.round) + "," + std::to_string(row.evaluations) + "," +
           (row.best_feasible ? real(*row.best_feasible) : "") + "," + real(row.regret) + "," +
           real(row.feasibility_ratio) + "," + real(row.seconds);
  }
  nlohmann::ordered_json j;
  j["round"] = row.round;
  j["evals"] = row.evaluations;
  j["best_feasible"] = row.best_feasible ? nlohmann::ordered_json(*row.best_feasible) : nlohmann::ordered_json();
  j["regret"] = row.regret;
  j["feasibility_ratio"] = row.feasibility_ratio;
  j["seconds"] = row.seconds;
  return j.dump();
}

TraceRow parse_trace_csv_row(const std::string& line) {
  const std::vector<std::string> f = split_csv(line);
  if (f.size() != 6) throw std::invalid_argument("trace row needs 6 fields: '" + line + "'");
  TraceRow row;
  row.round = std::stoul(f[0]);
  row.evaluations = std::stoul(f[1]);
  if (!f[2].empty()) row.best_feasible = std::stod(f[2]);
  row.regret = std::stod(f[3]);
  row.feasibility_ratio = std::stod(f[4]);
  row.seconds = std::stod(f[5]);
  return row;
}

std::vector<AggregateRow> aggregate_traces(const std::vector<std::vector<TraceRow>>& traces) {
  std::size_t rounds = 0;
  for (const auto& t : traces) rounds = std::max(rounds, t.size());
  std::vector<AggregateRow> out;
  for (std::size_t r = 0; r < rounds; ++r) {
    AggregateRow a;
    a.round = r + 1;
    for (const auto& t : traces) {
      if (r >= t.size()) continue;
      ++a.seeds;
      a.regret_mean += t[r].regret;
      a.feasibility_mean += t[r].feasibility_ratio;
    }
    const double n = static_cast<double>(a.seeds);
    a.regret_mean /= n;
    a.feasibility_mean /= n;
    for (const auto& t : traces) {
      if (r >= t.size()) continue;
      a.regret_std += (t[r].regret - a.regret_mean) * (t[r].regret - a.regret_mean);
      a.feasibility_std += (t[r].feasibility_ratio - a.feasibility_mean) * (t[r].feasibility_ratio - a.feasibility_mean);
    }
    a.regret_std = std::sqrt(a.regret_std / n);
    a.feasibility_std = std::sqrt(a.feasibility_std / n);
    out.push_back(a);
  }
  return out;
}

std::string format_aggregate_row(const AggregateRow& a) {
  return std::to_string(a.round) + "," + std::to_string(a.seeds) + "," + real(a.regret_mean) + "," +
         real(a.regret_std) + "," + real(a.feasibility_mean) + "," + real(a.feasibility_std);
}

bool ExperimentResult::ok() const {
  for (const SeedResult& s : seeds) {
    if (s.error) return false;
  }
  return true;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);
  const std::string prefix = method_name(config.method);
  const auto problem = make_problem(config.run.problem, config.run.dim, config.run.indicator);

  ExperimentResult result;
  std::vector<std::vector<TraceRow>> traces;
  for (std::size_t k = 0; k < config.seeds; ++k) {
    SeedResult seed;
    seed.seed = config.run.seed + k;
    seed.trace_file = config.output_dir / (prefix + "_seed" + std::to_string(seed.seed) + extension(config.format));
    const std::filesystem::path error_file = config.output_dir / (prefix + "_seed" + std::to_string(seed.seed) + ".error");
    std::filesystem::remove(error_file);

    std::ofstream out(seed.trace_file, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + seed.trace_file.string());
    if (config.format == TraceFormat::csv) out << kTraceHeader << '\n';
    out.flush();

    RunConfig run = config.run;
    run.seed = seed.seed;
    RunOptions options;
    options.timing = config.timing;
    options.on_round = [&](const RunState& s) {
      const TraceRow& row = s.trace.back();
      out << format_trace_row(row, config.format) << '\n';
      out.flush();
      seed.trace.push_back(row);
      if (log) {
        *log << prefix << " seed " << seed.seed << " round " << row.round << "/" << run.rounds << " regret "
             << row.regret << " feasible " << row.feasibility_ratio << std::endl;
      }
    };
    try {
      run_optimization(*problem, run, config.method, options);
    } catch (const std::exception& e) {
      seed.error = e.what();
      std::ofstream err(error_file);
      err << e.what() << '\n';
      if (log) *log << prefix << " seed " << seed.seed << " failed: " << e.what() << std::endl;
    }
    traces.push_back(seed.trace);
    result.seeds.push_back(std::move(seed));
  }

  result.aggregate_file = config.output_dir / (prefix + "_aggregate.csv");
  std::ofstream agg(result.aggregate_file, std::ios::trunc);
  agg << kAggregateHeader << '\n';
  for (const AggregateRow& a : aggregate_traces(traces)) agg << format_aggregate_row(a) << '\n';
  return result;
}

}  // namespace cibo
