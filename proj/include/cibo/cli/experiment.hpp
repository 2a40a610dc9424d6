#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cibo/cli/config.hpp"

namespace cibo {

/// Exact CSV header of every trace file.
inline constexpr const char* kTraceHeader = "round,evals,best_feasible,regret,feasibility_ratio,seconds";

/// One trace row as text. best_feasible is empty (CSV) or null (JSONL) while
/// no feasible point is known. Reals use 17 significant digits.
std::string format_trace_row(const TraceRow& row, TraceFormat format);
/// Inverse of format_trace_row for CSV rows.
TraceRow parse_trace_csv_row(const std::string& line);

struct AggregateRow {
  std::size_t round = 0;
  /// Seeds that reached this round.
  std::size_t seeds = 0;
  double regret_mean = 0.0;
  double regret_std = 0.0;
  double feasibility_mean = 0.0;
  double feasibility_std = 0.0;
};

inline constexpr const char* kAggregateHeader =
    "round,seeds,regret_mean,regret_std,feasibility_ratio_mean,feasibility_ratio_std";

/// Per-round mean and population standard deviation over the given traces.
std::vector<AggregateRow> aggregate_traces(const std::vector<std::vector<TraceRow>>& traces);
std::string format_aggregate_row(const AggregateRow& row);

struct SeedResult {
  std::uint64_t seed = 0;
  std::filesystem::path trace_file;
  std::vector<TraceRow> trace;
  /// Set when the run aborted; the trace holds the rounds that finished.
  std::optional<std::string> error;
};

struct ExperimentResult {
  std::vector<SeedResult> seeds;
  std::filesystem::path aggregate_file;

  bool ok() const;
};

/// Runs every seed in turn, appending each round to
/// <output_dir>/<method>_seed<s>.<csv|jsonl> as it completes, then writes
/// <method>_aggregate.csv over the seeds. A failing seed writes its message to
/// <method>_seed<s>.error and the remaining seeds still run. `log` (optional)
/// receives one progress line per round.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

}  // namespace cibo
