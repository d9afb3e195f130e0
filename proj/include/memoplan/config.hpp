#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "memoplan/allocator.hpp"
#include "memoplan/distributions.hpp"
#include "memoplan/errors.hpp"
#include "memoplan/expressions.hpp"
#include "memoplan/planner.hpp"

namespace memoplan {

/// Mirror of the JSON problem description. Variable indices are 1-based
/// here, exactly as written in config files; make_problem converts them to
/// the library's 0-based indexing.
struct ProblemConfig {
  struct SubFunctionSpec {
    std::vector<int> vars;  // 1-based
    std::string expr;
    double cost = 1.0;

    bool operator==(const SubFunctionSpec&) const = default;
  };

  int alphabet_size = 2;
  int num_vars = 1;
  std::vector<std::vector<double>> marginals;
  std::vector<SubFunctionSpec> subfunctions;
  std::string combine_expr;
  double combine_cost = 0.0;
  double lookup_cost = 1.0;
  std::int64_t budget = 0;
  std::string mode = "real";

  bool operator==(const ProblemConfig&) const = default;
};

/// Everything needed to run the planner, built from a validated config.
struct Problem {
  Decomposition decomposition;
  MarginalTable marginals;
  CostModel cost_model;
  std::int64_t budget = 0;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j,
                                           const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(std::string("missing config field \"") + key + "\"");
  }
  return *it;
}

template <typename T>
T field_as(const nlohmann::json& j, const char* key) {
  try {
    return require_field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field \"") + key + "\": " + e.what());
  }
}

}  // namespace detail

inline ProblemConfig parse_problem_config(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  ProblemConfig config;
  config.alphabet_size = detail::field_as<int>(j, "alphabet_size");
  config.num_vars = detail::field_as<int>(j, "num_vars");
  config.marginals =
      detail::field_as<std::vector<std::vector<double>>>(j, "marginals");
  const nlohmann::json& subs = detail::require_field(j, "subfunctions");
  if (!subs.is_array() || subs.empty()) {
    throw ConfigError("config field \"subfunctions\" must be a nonempty array");
  }
  for (const nlohmann::json& sub : subs) {
    ProblemConfig::SubFunctionSpec spec;
    spec.vars = detail::field_as<std::vector<int>>(sub, "vars");
    spec.expr = detail::field_as<std::string>(sub, "expr");
    spec.cost = detail::field_as<double>(sub, "cost");
    config.subfunctions.push_back(std::move(spec));
  }
  config.combine_expr = detail::field_as<std::string>(j, "combine_expr");
  config.combine_cost = detail::field_as<double>(j, "combine_cost");
  config.lookup_cost = detail::field_as<double>(j, "lookup_cost");
  config.budget = detail::field_as<std::int64_t>(j, "budget");
  config.mode = detail::field_as<std::string>(j, "mode");
  if (config.mode != "real" && config.mode != "modk") {
    throw ConfigError("config field \"mode\" must be \"real\" or \"modk\", got \"" +
                      config.mode + "\"");
  }
  return config;
}

inline nlohmann::ordered_json problem_config_to_json(
    const ProblemConfig& config) {
  nlohmann::ordered_json j;
  j["alphabet_size"] = config.alphabet_size;
  j["num_vars"] = config.num_vars;
  j["marginals"] = config.marginals;
  nlohmann::ordered_json subs = nlohmann::ordered_json::array();
  for (const auto& spec : config.subfunctions) {
    subs.push_back({{"vars", spec.vars},
                    {"expr", spec.expr},
                    {"cost", spec.cost}});
  }
  j["subfunctions"] = std::move(subs);
  j["combine_expr"] = config.combine_expr;
  j["combine_cost"] = config.combine_cost;
  j["lookup_cost"] = config.lookup_cost;
  j["budget"] = config.budget;
  j["mode"] = config.mode;
  return j;
}

inline ProblemConfig load_problem_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file \"" + path + "\"");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file \"" + path + "\" is not valid JSON: " +
                      e.what());
  }
  return parse_problem_config(j);
}

/// Validates the config and builds the runnable problem. Converts the
/// config's 1-based variable indices to internal 0-based ones.
inline Problem make_problem(const ProblemConfig& config) {
  Problem problem;
  problem.decomposition.num_vars = config.num_vars;
  problem.decomposition.alphabet = Alphabet{config.alphabet_size, {}};
  problem.decomposition.mode =
      config.mode == "modk" ? EvalMode::kModK : EvalMode::kReal;
  problem.decomposition.combine_cost = config.combine_cost;
  problem.decomposition.combine = parse_expression(config.combine_expr);
  int id = 1;
  for (const auto& spec : config.subfunctions) {
    SubFunction sub;
    sub.id = id++;
    for (int var : spec.vars) {
      sub.var_indices.push_back(var - 1);
    }
    sub.body = parse_expression(spec.expr);
    sub.compute_cost = spec.cost;
    problem.decomposition.sub_functions.push_back(std::move(sub));
  }
  validate_decomposition(problem.decomposition);

  problem.marginals.num_vars = config.num_vars;
  problem.marginals.probs = config.marginals;
  validate_marginals(problem.marginals, problem.decomposition.alphabet);

  problem.cost_model.lookup_cost = config.lookup_cost;
  validate_cost_model(problem.cost_model);

  if (config.budget < 0) {
    throw ConfigError("config field \"budget\" must be nonnegative");
  }
  problem.budget = config.budget;
  return problem;
}

// --- reports -------------------------------------------------------------

/// Plan report. Beyond the base schema (allocation, objective,
/// expected_cost, tables, sizes) it carries the per-sub-function hit
/// probabilities and the omega tables the allocation was chosen from.
inline nlohmann::ordered_json plan_report(const MemoPlan& plan) {
  nlohmann::ordered_json j;
  j["allocation"] = plan.allocation.counts;
  j["objective"] = plan.allocation.objective;
  j["expected_cost"] = plan.predicted_expected_cost;
  j["hit_probabilities"] = plan.predicted_hit_probabilities;
  j["omega"] = plan.omega.gains;
  nlohmann::ordered_json tables = nlohmann::ordered_json::array();
  for (std::size_t sub = 0; sub < plan.tables.size(); ++sub) {
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const TableEntry& entry : plan.tables[sub].entries) {
      entries.push_back({{"key", entry.key},
                         {"value", entry.value},
                         {"prob", entry.probability}});
    }
    tables.push_back({{"subfunction", plan.decomposition.sub_functions[sub].id},
                      {"entries", std::move(entries)}});
  }
  j["tables"] = std::move(tables);
  const TableSizes sizes = table_size(plan.decomposition);
  j["sizes"] = {{"monolithic", sizes.monolithic},
                {"decomposed", sizes.decomposed}};
  return j;
}

inline nlohmann::ordered_json simulation_report_json(
    const SimulationReport& report) {
  nlohmann::ordered_json j;
  j["samples"] = report.num_samples;
  j["seed"] = report.seed;
  j["generator"] = report.generator;
  j["mean_cost"] = report.mean_cost;
  j["stderr"] = report.stderr_of_mean;
  j["predicted_cost"] = report.predicted_cost;
  j["hit_rates"] = report.hit_rates;
  j["predicted_hit_rates"] = report.predicted_hit_rates;
  return j;
}

/// Estimated marginals in the config's format, ready to splice into a
/// problem config.
inline nlohmann::ordered_json marginals_report(const MarginalTable& table,
                                               const Alphabet& alphabet) {
  nlohmann::ordered_json j;
  j["alphabet_size"] = alphabet.size;
  j["num_vars"] = table.num_vars;
  j["marginals"] = table.probs;
  return j;
}

/// Parses a samples file: one input vector per line, whitespace-separated
/// alphabet indices. Blank lines are ignored; diagnostics carry 1-based line
/// numbers.
inline std::vector<InputVector> parse_sample_lines(std::istream& in,
                                                   int alphabet_size) {
  std::vector<InputVector> samples;
  std::string line;
  std::size_t line_number = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream fields(line);
    InputVector sample;
    std::string token;
    while (fields >> token) {
      int value = 0;
      try {
        std::size_t used = 0;
        value = std::stoi(token, &used);
        if (used != token.size()) {
          throw std::invalid_argument(token);
        }
      } catch (const std::exception&) {
        throw MalformedSampleError("line " + std::to_string(line_number) +
                                   ": \"" + token + "\" is not an integer");
      }
      if (value < 0 || value >= alphabet_size) {
        throw MalformedSampleError(
            "line " + std::to_string(line_number) + ": value " +
            std::to_string(value) + " outside alphabet of size " +
            std::to_string(alphabet_size));
      }
      sample.push_back(value);
    }
    if (sample.empty()) {
      continue;
    }
    if (width == 0) {
      width = sample.size();
    } else if (sample.size() != width) {
      throw MalformedSampleError("line " + std::to_string(line_number) +
                                 " has " + std::to_string(sample.size()) +
                                 " values, expected " + std::to_string(width));
    }
    samples.push_back(std::move(sample));
  }
  if (samples.empty()) {
    throw EmptySampleSetError("samples file contains no input vectors");
  }
  return samples;
}

}  // namespace memoplan
