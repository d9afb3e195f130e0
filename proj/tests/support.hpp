#pragma once

// Shared fixtures, random-instance generators, and reference oracles for the
// unit and acceptance suites. Everything here stays independent of the code
// paths it is used to check: probabilities and costs are recomputed from
// first principles (exhaustive enumeration), never via the planner.

#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "memoplan/memoplan.hpp"

namespace memoplan::testing {

inline MarginalTable table_from_rows(std::vector<std::vector<double>> rows) {
  MarginalTable table;
  table.num_vars = static_cast<int>(rows.size());
  table.probs = std::move(rows);
  return table;
}

inline MarginalTable uniform_table(int num_vars, int alphabet_size) {
  return table_from_rows(std::vector<std::vector<double>>(
      num_vars,
      std::vector<double>(alphabet_size, 1.0 / alphabet_size)));
}

inline MarginalTable repeated_row_table(int num_vars,
                                        std::vector<double> row) {
  return table_from_rows(
      std::vector<std::vector<double>>(num_vars, std::move(row)));
}

/// Random strictly positive marginal rows.
inline MarginalTable random_table(std::mt19937_64& rng, int num_vars,
                                  int alphabet_size) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::vector<std::vector<double>> rows(num_vars);
  for (auto& row : rows) {
    row.resize(alphabet_size);
    double mass = 0.0;
    for (double& p : row) {
      p = unit(rng);
      mass += p;
    }
    for (double& p : row) {
      p /= mass;
    }
  }
  return table_from_rows(std::move(rows));
}

/// Calls `fn` with every vector in {0..K-1}^N, in lexicographic order.
inline void for_each_vector(int length, int alphabet_size,
                            const std::function<void(const InputVector&)>& fn) {
  InputVector current(length, 0);
  while (true) {
    fn(current);
    int pos = length - 1;
    while (pos >= 0 && ++current[pos] == alphabet_size) {
      current[pos--] = 0;
    }
    if (pos < 0) {
      return;
    }
  }
}

// --- Example 1: h(x) = x1*x2*x3 + x4*x5*x6 over {0,1} -------------------

inline Decomposition example1_decomposition(double cost1 = 10.0,
                                            double cost2 = 10.0,
                                            double combine_cost = 1.0) {
  Decomposition decomp;
  decomp.num_vars = 6;
  decomp.alphabet = Alphabet{2, {}};
  decomp.mode = EvalMode::kReal;
  decomp.combine = parse_expression("x1 + x2");
  decomp.combine_cost = combine_cost;
  SubFunction h1;
  h1.id = 1;
  h1.var_indices = {0, 1, 2};
  h1.body = parse_expression("x1*x2*x3");
  h1.compute_cost = cost1;
  SubFunction h2;
  h2.id = 2;
  h2.var_indices = {3, 4, 5};
  h2.body = parse_expression("x1*x2*x3");
  h2.compute_cost = cost2;
  decomp.sub_functions = {h1, h2};
  return decomp;
}

/// Running example: Example 1 with p=(0.7,0.3) on x1..x3, (0.9,0.1) on
/// x4..x6, T_c = 10 for both sub-functions, T_M = 1, T_c(F) = 1, M = 4.
struct RunningExample {
  Decomposition decomposition = example1_decomposition();
  MarginalTable marginals = table_from_rows({{0.7, 0.3},
                                             {0.7, 0.3},
                                             {0.7, 0.3},
                                             {0.9, 0.1},
                                             {0.9, 0.1},
                                             {0.9, 0.1}});
  CostModel cost_model{1.0};
  std::int64_t budget = 4;
};

// --- random pipeline instances ------------------------------------------

struct PipelineInstance {
  Decomposition decomposition;
  MarginalTable marginals;
  CostModel cost_model;
  std::int64_t budget = 0;
};

inline Expression random_expression(std::mt19937_64& rng, int arity,
                                    int depth) {
  std::uniform_int_distribution<int> kind(0, depth > 0 ? 3 : 1);
  switch (kind(rng)) {
    case 0: {
      std::uniform_int_distribution<int> constant(0, 3);
      return Expression::constant(constant(rng));
    }
    case 1: {
      std::uniform_int_distribution<int> var(0, arity - 1);
      return Expression::variable(var(rng));
    }
    default: {
      std::uniform_int_distribution<int> num_children(2, 3);
      std::vector<Expression> children;
      const int n = num_children(rng);
      children.reserve(n);
      for (int c = 0; c < n; ++c) {
        children.push_back(random_expression(rng, arity, depth - 1));
      }
      return kind(rng) % 2 == 0 ? Expression::add(std::move(children))
                                : Expression::mul(std::move(children));
    }
  }
}

/// Random full-pipeline instance with K^N <= 4096 so the exhaustive cost
/// oracle stays cheap. Sub-functions occasionally share variables.
inline PipelineInstance random_pipeline(std::mt19937_64& rng) {
  PipelineInstance instance;
  std::uniform_int_distribution<int> alphabet(2, 4);
  const int k = alphabet(rng);
  const int max_vars = k == 2 ? 12 : (k == 3 ? 7 : 6);
  std::uniform_int_distribution<int> vars(2, max_vars);
  const int n = vars(rng);
  std::uniform_int_distribution<int> subs(1, std::min(4, n));
  const int d = subs(rng);

  instance.decomposition.num_vars = n;
  instance.decomposition.alphabet = Alphabet{k, {}};
  instance.decomposition.mode =
      rng() % 2 == 0 ? EvalMode::kReal : EvalMode::kModK;
  instance.decomposition.combine = random_expression(rng, d, 2);
  std::uniform_real_distribution<double> combine_cost(0.0, 5.0);
  instance.decomposition.combine_cost = combine_cost(rng);

  std::vector<int> all_vars(n);
  std::iota(all_vars.begin(), all_vars.end(), 0);
  std::shuffle(all_vars.begin(), all_vars.end(), rng);
  const bool share = rng() % 4 == 0;
  std::uniform_real_distribution<double> compute_cost(2.0, 20.0);
  std::size_t cursor = 0;
  for (int j = 0; j < d; ++j) {
    SubFunction sub;
    sub.id = j + 1;
    std::uniform_int_distribution<int> arity_dist(1, std::min(n, 4));
    const int arity = arity_dist(rng);
    if (share) {
      // sample distinct variables independently per sub-function
      std::vector<int> pool = all_vars;
      std::shuffle(pool.begin(), pool.end(), rng);
      sub.var_indices.assign(pool.begin(), pool.begin() + arity);
    } else {
      for (int t = 0; t < arity; ++t) {
        sub.var_indices.push_back(all_vars[cursor]);
        cursor = (cursor + 1) % all_vars.size();
      }
      std::sort(sub.var_indices.begin(), sub.var_indices.end());
      sub.var_indices.erase(
          std::unique(sub.var_indices.begin(), sub.var_indices.end()),
          sub.var_indices.end());
    }
    sub.body = random_expression(rng, static_cast<int>(sub.var_indices.size()), 2);
    sub.compute_cost = compute_cost(rng);
    instance.decomposition.sub_functions.push_back(std::move(sub));
  }

  instance.marginals = random_table(rng, n, k);
  std::uniform_real_distribution<double> lookup(0.3, 1.5);
  instance.cost_model.lookup_cost = lookup(rng);
  std::uint64_t capacity = 0;
  for (const SubFunction& sub : instance.decomposition.sub_functions) {
    std::uint64_t entries = 1;
    for (std::size_t i = 0; i < sub.var_indices.size(); ++i) {
      entries *= static_cast<std::uint64_t>(k);
    }
    capacity += entries;
  }
  std::uniform_int_distribution<std::int64_t> budget(
      0, static_cast<std::int64_t>(std::min<std::uint64_t>(capacity + 4, 48)));
  instance.budget = budget(rng);
  return instance;
}

/// Exhaustive probability-weighted mean of evaluate(...).cost over all K^N
/// inputs. Independent of expected_time's formula.
inline double exhaustive_expected_cost(const MemoPlan& plan,
                                       const MarginalTable& marginals) {
  std::vector<int> all_vars(marginals.num_vars);
  std::iota(all_vars.begin(), all_vars.end(), 0);
  double total = 0.0;
  for_each_vector(marginals.num_vars, plan.decomposition.alphabet.size,
                  [&](const InputVector& input) {
                    const double p = vector_probability(
                        marginals, all_vars, std::span<const int>(input));
                    total += p * evaluate(plan, input).cost;
                  });
  return total;
}

/// Random gain tables for allocator fuzzing. `planner_style` follows the
/// omega structure (scaled nondecreasing hit mass, possibly negative gain
/// factor); otherwise rows are plain random nondecreasing values.
inline OmegaTable random_omega(std::mt19937_64& rng, int num_subs,
                               int max_cap, bool planner_style) {
  OmegaTable omega;
  omega.gains.resize(num_subs);
  std::uniform_int_distribution<int> cap_dist(0, max_cap);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& row : omega.gains) {
    const int cap = cap_dist(rng);
    row.resize(cap + 1);
    row[0] = 0.0;
    if (planner_style) {
      std::uniform_real_distribution<double> factor(-2.0, 9.0);
      const double gain = factor(rng);
      double mass = 0.0;
      for (int m = 1; m <= cap; ++m) {
        mass += unit(rng) / (cap + 1);
        row[m] = std::min(mass, 1.0) * gain;
      }
    } else {
      double value = 0.0;
      for (int m = 1; m <= cap; ++m) {
        value += unit(rng);
        row[m] = value;
      }
    }
  }
  return omega;
}

inline std::vector<int> omega_caps(const OmegaTable& omega) {
  std::vector<int> caps(omega.num_sub_functions());
  for (std::size_t j = 0; j < caps.size(); ++j) {
    caps[j] = omega.capacity(j);
  }
  return caps;
}

}  // namespace memoplan::testing
