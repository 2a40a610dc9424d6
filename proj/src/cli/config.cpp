#include "cibo/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "cibo/problems/registry.hpp"

namespace cibo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

template <typename T>
Setter size_field(T member) {
  return [member](ExperimentConfig& c, const std::string& k, const std::string& v) { member(c) = to_size(k, v); };
}
template <typename T>
Setter real_field(T member) {
  return [member](ExperimentConfig& c, const std::string& k, const std::string& v) { member(c) = to_real(k, v); };
}
template <typename T>
Setter bool_field(T member) {
  return [member](ExperimentConfig& c, const std::string& k, const std::string& v) { member(c) = to_bool(k, v); };
}

#define FIELD(expr) [](ExperimentConfig& c) -> auto& { return c.expr; }

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"problem", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.run.problem = v; }},
      {"dim", size_field(FIELD(run.dim))},
      {"indicator", bool_field(FIELD(run.indicator))},
      {"method",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         try {
           c.method = parse_method(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(k + ": " + e.what());
         }
       }},
      {"seed",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.run.seed = to_size(k, v); }},
      {"seeds", size_field(FIELD(seeds))},
      {"output_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"format",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "csv") {
           c.format = TraceFormat::csv;
         } else if (v == "jsonl") {
           c.format = TraceFormat::jsonl;
         } else {
           throw ConfigError(k + ": expected csv or jsonl, got '" + v + "'");
         }
       }},
      {"timing",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "wall") {
           c.timing = Timing::wall;
         } else if (v == "none") {
           c.timing = Timing::none;
         } else {
           throw ConfigError(k + ": expected wall or none, got '" + v + "'");
         }
       }},
      {"rounds", size_field(FIELD(run.rounds))},
      {"batch_size", size_field(FIELD(run.batch_size))},
      {"initial_size", size_field(FIELD(run.initial_size))},
      {"buffer_size", size_field(FIELD(run.buffer_size))},
      {"filter_factor", size_field(FIELD(run.filter_factor))},
      {"feasible_init", size_field(FIELD(run.feasible_init))},
      {"sentinel_regret",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.run.sentinel_regret = to_real(k, v); }},
      {"lambda", real_field(FIELD(run.lagrangian.lambda))},
      {"gamma", real_field(FIELD(run.lagrangian.gamma))},
      {"beta", real_field(FIELD(run.lagrangian.beta))},
      {"surrogate.ensemble_size", size_field(FIELD(run.surrogate.ensemble_size))},
      {"surrogate.hidden_layers", size_field(FIELD(run.surrogate.hidden_layers))},
      {"surrogate.hidden_units", size_field(FIELD(run.surrogate.hidden_units))},
      {"surrogate.epochs", size_field(FIELD(run.surrogate.epochs))},
      {"surrogate.batch_size", size_field(FIELD(run.surrogate.batch_size))},
      {"surrogate.learning_rate", real_field(FIELD(run.surrogate.learning_rate))},
      {"flow.hidden_layers", size_field(FIELD(run.flow.hidden_layers))},
      {"flow.hidden_units", size_field(FIELD(run.flow.hidden_units))},
      {"flow.epochs", size_field(FIELD(run.flow.epochs))},
      {"flow.batch_size", size_field(FIELD(run.flow.batch_size))},
      {"flow.learning_rate", real_field(FIELD(run.flow.learning_rate))},
      {"flow.integration_steps", size_field(FIELD(run.flow.integration_steps))},
      {"sampler.hidden_layers", size_field(FIELD(run.sampler.hidden_layers))},
      {"sampler.hidden_units", size_field(FIELD(run.sampler.hidden_units))},
      {"sampler.num_steps", size_field(FIELD(run.sampler.num_steps))},
      {"sampler.sigma", real_field(FIELD(run.sampler.sigma))},
      {"sampler.batch_size", size_field(FIELD(run.sampler.batch_size))},
      {"sampler.iterations", size_field(FIELD(run.sampler.iterations))},
      {"sampler.learning_rate", real_field(FIELD(run.sampler.learning_rate))},
      {"sampler.log_z_learning_rate", real_field(FIELD(run.sampler.log_z_learning_rate))},
      {"sampler.buffer_factor", size_field(FIELD(run.sampler.buffer_factor))},
      {"sampler.off_policy", bool_field(FIELD(run.sampler.off_policy))},
      {"sampler.learn_variance", bool_field(FIELD(run.sampler.learn_variance))},
      {"sampler.init_log_z_from_batch", bool_field(FIELD(run.sampler.init_log_z_from_batch))},
  };
  return table;
}

#undef FIELD

void apply(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == key; });
  if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
  it->second(c, key, value);
}

struct Preset {
  std::string name;
  Settings settings;
};

// Full scale: |D0| = 200 and budgets of 10,000 evaluations for the synthetic
// tasks, 2,000 for rover. Network settings keep the module defaults.
Settings full_scale(const std::string& problem, std::size_t dim, std::size_t rounds, std::size_t batch,
                     double lambda, std::size_t buffer) {
  return {{"problem", problem},
          {"dim", std::to_string(dim)},
          {"initial_size", "200"},
          {"batch_size", std::to_string(batch)},
          {"rounds", std::to_string(rounds)},
          {"lambda", std::to_string(lambda)},
          {"beta", "1e5"},
          {"buffer_size", std::to_string(buffer)},
          {"filter_factor", "10"}};
}

// Desk scale: D = 20, |D0| = 50, B = 20, R = 20, network widths / 4 and
// sampler iterations / 5. With at most a few hundred records an epoch is a
// single minibatch step, so the surrogates keep their full 100 epochs and the
// flow gets 1000; 100 flow steps leave the prior worse than its data.
Settings desk_scale(const std::string& problem, std::size_t dim, double lambda, std::size_t buffer) {
  return {{"problem", problem},
          {"dim", std::to_string(dim)},
          {"initial_size", "50"},
          {"batch_size", "20"},
          {"rounds", "20"},
          {"lambda", std::to_string(lambda)},
          {"beta", "1e5"},
          {"buffer_size", std::to_string(buffer)},
          {"filter_factor", "10"},
          {"surrogate.hidden_units", "256"},
          {"surrogate.epochs", "100"},
          {"flow.hidden_units", "128"},
          {"flow.epochs", "1000"},
          {"flow.integration_steps", "50"},
          {"sampler.hidden_units", "64"},
          {"sampler.iterations", "10"}};
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = {
      {"rastrigin-200d", full_scale("rastrigin", 200, 98, 100, 10, 2000)},
      {"ackley-200d", full_scale("ackley", 200, 98, 100, 10, 3000)},
      {"rosenbrock-200d", full_scale("rosenbrock", 200, 98, 100, 10, 2000)},
      {"rover-60d", full_scale("rover", 60, 36, 50, 3, 1000)},
      {"rastrigin-200d-desk", desk_scale("rastrigin", 20, 10, 200)},
      {"ackley-200d-desk", desk_scale("ackley", 20, 10, 300)},
      {"rosenbrock-200d-desk", desk_scale("rosenbrock", 20, 10, 200)},
      {"rover-60d-desk", desk_scale("rover", 20, 3, 100)},
  };
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds == 0) throw ConfigError("seeds: must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
  const std::vector<std::string> known = problem_names();
  if (std::find(known.begin(), known.end(), run.problem) == known.end()) {
    throw ConfigError("problem: unknown problem '" + run.problem + "'");
  }
  try {
    make_problem(run.problem, run.dim, run.indicator);
  } catch (const ProblemError& e) {
    throw ConfigError(std::string("dim: ") + e.what());
  }
  try {
    run.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Settings parse_settings(const std::string& text) {
  Settings out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key = value, got '" + t + "'");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

Settings read_settings_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_settings(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const Preset& p : presets()) out.push_back(p.name);
  return out;
}

Settings preset_settings(const std::string& name) {
  for (const Preset& p : presets()) {
    if (p.name == name) return p.settings;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out{"preset"};
  for (const auto& [key, setter] : setters()) out.push_back(key);
  return out;
}

ExperimentConfig build_config(const Settings& file, const Settings& overrides) {
  std::string preset;
  for (const Settings* list : {&file, &overrides}) {
    for (const auto& [k, v] : *list) {
      if (k == "preset") preset = v;
    }
  }
  ExperimentConfig c;
  bool has_problem = false;
  auto apply_all = [&](const Settings& list) {
    for (const auto& [k, v] : list) {
      if (k == "preset") continue;
      apply(c, k, v);
      if (k == "problem") has_problem = true;
    }
  };
  if (!preset.empty()) apply_all(preset_settings(preset));
  apply_all(file);
  apply_all(overrides);
  if (!has_problem) throw ConfigError("missing required key 'problem'");
  c.validate();
  return c;
}

}  // namespace cibo
