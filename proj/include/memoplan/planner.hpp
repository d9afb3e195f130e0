#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "memoplan/allocator.hpp"
#include "memoplan/distributions.hpp"
#include "memoplan/errors.hpp"
#include "memoplan/expressions.hpp"
#include "memoplan/top_vectors.hpp"

namespace memoplan {

struct InputVectorHash {
  std::size_t operator()(const InputVector& v) const noexcept {
    std::size_t h = 1469598103934665603ull;  // FNV-1a
    for (int x : v) {
      h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(x));
      h *= 1099511628211ull;
    }
    return h;
  }
};

/// One precomputed lookup-table row: a sub-function input vector, the
/// sub-function's value on it, and the vector's probability.
struct TableEntry {
  InputVector key;
  double value = 0.0;
  double probability = 0.0;
};

/// A sub-function's realized lookup table. `entries` keeps the canonical
/// order (probability descending, lexicographic tie-break); `index` backs
/// constant-time hit tests.
struct LookupTable {
  std::vector<TableEntry> entries;
  std::unordered_map<InputVector, double, InputVectorHash> index;
};

/// A fully built memoization plan: the budget split, the precomputed tables,
/// and the costs the analysis predicts for them. Immutable after build_plan;
/// safe for concurrent evaluate calls.
struct MemoPlan {
  Decomposition decomposition;
  CostModel cost_model;
  std::int64_t budget = 0;
  Allocation allocation;
  OmegaTable omega;
  std::vector<LookupTable> tables;
  std::vector<double> predicted_hit_probabilities;
  double predicted_expected_cost = 0.0;
};

/// Seeded Monte Carlo validation of a plan's predicted cost and hit rates.
struct SimulationReport {
  std::uint64_t num_samples = 0;
  std::uint64_t seed = 0;
  std::string generator = "mt19937_64";
  double mean_cost = 0.0;
  double stderr_of_mean = 0.0;
  double predicted_cost = 0.0;
  std::vector<double> hit_rates;
  std::vector<double> predicted_hit_rates;
};

/// Enumerates each sub-function's most probable inputs, splits the budget
/// with the knapsack DP, and precomputes the chosen table entries.
inline MemoPlan build_plan(const Decomposition& decomp,
                           const MarginalTable& marginals,
                           const CostModel& cost_model, std::int64_t budget) {
  validate_decomposition(decomp);
  validate_marginals(marginals, decomp.alphabet);
  validate_cost_model(cost_model);
  if (budget < 0) {
    throw InvalidArgumentError("budget must be nonnegative");
  }
  if (marginals.num_vars != decomp.num_vars) {
    throw DimensionMismatchError(
        "marginal table covers " + std::to_string(marginals.num_vars) +
        " variables, decomposition needs " + std::to_string(decomp.num_vars));
  }

  const std::size_t num_subs = decomp.sub_functions.size();
  std::vector<RankedVectorList> ranked(num_subs);
  for (std::size_t j = 0; j < num_subs; ++j) {
    const SubFunction& sub = decomp.sub_functions[j];
    const std::uint64_t full = detail::saturating_pow(
        static_cast<std::uint64_t>(decomp.alphabet.size),
        sub.var_indices.size());
    const auto list_size = static_cast<std::int64_t>(std::min<std::uint64_t>(
        static_cast<std::uint64_t>(budget), full));
    if (list_size > 0) {
      ranked[j] = top_l_vectors(marginals, sub.var_indices, list_size);
    }
  }

  MemoPlan plan;
  plan.decomposition = decomp;
  plan.cost_model = cost_model;
  plan.budget = budget;
  plan.omega = build_omega_table(decomp, cost_model, ranked, budget);
  std::vector<int> caps(num_subs);
  for (std::size_t j = 0; j < num_subs; ++j) {
    caps[j] = plan.omega.capacity(j);
  }
  plan.allocation = allocate_dp(plan.omega, budget, caps).allocation;

  plan.tables.resize(num_subs);
  plan.predicted_hit_probabilities.resize(num_subs);
  for (std::size_t j = 0; j < num_subs; ++j) {
    const SubFunction& sub = decomp.sub_functions[j];
    const int count = plan.allocation.counts[j];
    LookupTable& table = plan.tables[j];
    table.entries.reserve(count);
    for (int r = 0; r < count; ++r) {
      const RankedEntry& e = ranked[j].entries[static_cast<std::size_t>(r)];
      const double value = eval_sub_function(decomp, sub, e.vector);
      table.entries.push_back({e.vector, value, e.probability});
      table.index.emplace(e.vector, value);
    }
    plan.predicted_hit_probabilities[j] =
        cumulative_hit_probability(ranked[j], count);
  }
  plan.predicted_expected_cost =
      expected_time(decomp, cost_model, plan.allocation, ranked);
  return plan;
}

namespace detail {

inline Evaluation evaluate_with_hits(const MemoPlan& plan,
                                     std::span<const int> input,
                                     std::vector<unsigned char>* hits) {
  const Decomposition& decomp = plan.decomposition;
  if (static_cast<int>(input.size()) != decomp.num_vars) {
    throw DimensionMismatchError("input has " + std::to_string(input.size()) +
                                 " components, expected " +
                                 std::to_string(decomp.num_vars));
  }
  for (int symbol : input) {
    if (symbol < 0 || symbol >= decomp.alphabet.size) {
      throw IndexOutOfRangeError("input symbol " + std::to_string(symbol) +
                                 " outside alphabet of size " +
                                 std::to_string(decomp.alphabet.size));
    }
  }
  std::vector<double> outputs(decomp.sub_functions.size());
  double cost = decomp.combine_cost;
  InputVector sub_input;
  for (std::size_t j = 0; j < decomp.sub_functions.size(); ++j) {
    const SubFunction& sub = decomp.sub_functions[j];
    sub_input.clear();
    for (int var : sub.var_indices) {
      sub_input.push_back(input[var]);
    }
    const auto hit = plan.tables[j].index.find(sub_input);
    if (hit != plan.tables[j].index.end()) {
      outputs[j] = hit->second;
      cost += plan.cost_model.lookup_cost;
      if (hits != nullptr) {
        (*hits)[j] = 1;
      }
    } else {
      outputs[j] = eval_sub_function(decomp, sub, sub_input);
      cost += sub.compute_cost;
      if (hits != nullptr) {
        (*hits)[j] = 0;
      }
    }
  }
  Evaluation result;
  result.value =
      eval_expression(decomp.combine, outputs, decomp.mode, decomp.alphabet.size);
  result.cost = cost;
  return result;
}

/// 53-bit uniform in [0,1) from one mt19937_64 draw.
inline double uniform53(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw over one marginal row.
inline int sample_symbol(const std::vector<double>& row, double u) {
  double cdf = 0.0;
  for (std::size_t j = 0; j + 1 < row.size(); ++j) {
    cdf += row[j];
    if (u < cdf) {
      return static_cast<int>(j);
    }
  }
  return static_cast<int>(row.size()) - 1;
}

}  // namespace detail

/// Memoized evaluation: table hits charge the lookup cost, misses the
/// compute cost. The value is always identical to evaluate_plain.
inline Evaluation evaluate(const MemoPlan& plan, std::span<const int> input) {
  return detail::evaluate_with_hits(plan, input, nullptr);
}

/// Draws `num_samples` inputs component-wise from `marginals` (one
/// mt19937_64 variate per variable, inverse CDF per row, variables in
/// order) and reports observed mean cost and per-sub-function hit rates.
/// Identical (plan, marginals, num_samples, seed) gives an identical report.
inline SimulationReport simulate(const MemoPlan& plan,
                                 const MarginalTable& marginals,
                                 std::uint64_t num_samples,
                                 std::uint64_t seed) {
  if (num_samples < 1) {
    throw InvalidArgumentError("simulation needs at least one sample");
  }
  validate_marginals(marginals, plan.decomposition.alphabet);
  if (marginals.num_vars != plan.decomposition.num_vars) {
    throw DimensionMismatchError(
        "marginal table covers " + std::to_string(marginals.num_vars) +
        " variables, decomposition needs " +
        std::to_string(plan.decomposition.num_vars));
  }

  const std::size_t num_subs = plan.decomposition.sub_functions.size();
  std::mt19937_64 gen(seed);
  InputVector input(static_cast<std::size_t>(marginals.num_vars));
  std::vector<unsigned char> hits(num_subs, 0);
  std::vector<std::uint64_t> hit_counts(num_subs, 0);

  // Welford accumulation keeps mean/variance stable and deterministic.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t n = 1; n <= num_samples; ++n) {
    for (int i = 0; i < marginals.num_vars; ++i) {
      input[static_cast<std::size_t>(i)] =
          detail::sample_symbol(marginals.row(i), detail::uniform53(gen));
    }
    const Evaluation eval = detail::evaluate_with_hits(plan, input, &hits);
    const double delta = eval.cost - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (eval.cost - mean);
    for (std::size_t j = 0; j < num_subs; ++j) {
      hit_counts[j] += hits[j];
    }
  }

  SimulationReport report;
  report.num_samples = num_samples;
  report.seed = seed;
  report.mean_cost = mean;
  report.stderr_of_mean =
      num_samples > 1
          ? std::sqrt(m2 / static_cast<double>(num_samples - 1) /
                      static_cast<double>(num_samples))
          : 0.0;
  report.predicted_cost = plan.predicted_expected_cost;
  report.hit_rates.resize(num_subs);
  for (std::size_t j = 0; j < num_subs; ++j) {
    report.hit_rates[j] = static_cast<double>(hit_counts[j]) /
                          static_cast<double>(num_samples);
  }
  report.predicted_hit_rates = plan.predicted_hit_probabilities;
  return report;
}

}  // namespace memoplan
