#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "memoplan/errors.hpp"
#include "memoplan/expressions.hpp"
#include "memoplan/top_vectors.hpp"

namespace memoplan {

/// Abstract cost of one table lookup, T_M. Per-sub-function compute costs
/// live on SubFunction, the combine cost on Decomposition.
struct CostModel {
  double lookup_cost = 1.0;
};

inline const CostModel& validate_cost_model(const CostModel& model) {
  if (model.lookup_cost <= 0.0) {
    throw InvalidArgumentError("lookup cost must be positive, got " +
                               std::to_string(model.lookup_cost));
  }
  return model;
}

/// Gain tables: gains[j][m] = omega_j(m), the expected savings from giving
/// sub-function j a table of m entries, for m = 0..cap_j.
struct OmegaTable {
  std::vector<std::vector<double>> gains;

  std::size_t num_sub_functions() const { return gains.size(); }
  int capacity(std::size_t j) const {
    return static_cast<int>(gains[j].size()) - 1;
  }
};

/// A budget split m_1..m_D with the objective it achieves.
struct Allocation {
  std::vector<int> counts;
  double objective = 0.0;
};

/// DP work matrices, exposed for inspection. best[i][j] is the maximum
/// objective over splits that give exactly i entries to sub-functions 1..j+1
/// (-inf where i exceeds their joint capacity); split[i][j] is the budget
/// handed to the first j sub-functions by the winning split.
struct DpTables {
  static constexpr double kUnreachable =
      -std::numeric_limits<double>::infinity();

  std::vector<std::vector<double>> best;
  std::vector<std::vector<int>> split;
};

struct DpResult {
  Allocation allocation;
  DpTables tables;
};

/// omega_j(m) = P(X_M^(j) | m) * (T_c(f_j) - T_M) from each sub-function's
/// ranked list, with capacity cap_j = min(M, K^{l_j}).
inline OmegaTable build_omega_table(const Decomposition& decomp,
                                    const CostModel& cost_model,
                                    std::span<const RankedVectorList> ranked,
                                    std::int64_t budget) {
  validate_cost_model(cost_model);
  if (budget < 0) {
    throw InvalidArgumentError("budget must be nonnegative");
  }
  if (ranked.size() != decomp.sub_functions.size()) {
    throw DimensionMismatchError(
        "expected " + std::to_string(decomp.sub_functions.size()) +
        " ranked lists, got " + std::to_string(ranked.size()));
  }
  OmegaTable table;
  table.gains.resize(decomp.sub_functions.size());
  for (std::size_t j = 0; j < decomp.sub_functions.size(); ++j) {
    const SubFunction& sub = decomp.sub_functions[j];
    const std::uint64_t full = detail::saturating_pow(
        static_cast<std::uint64_t>(decomp.alphabet.size),
        sub.var_indices.size());
    const auto cap = static_cast<std::int64_t>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(budget), full));
    if (static_cast<std::int64_t>(ranked[j].size()) < cap) {
      throw InsufficientRankedEntriesError(
          "sub-function " + std::to_string(sub.id) + " needs " +
          std::to_string(cap) + " ranked entries, got " +
          std::to_string(ranked[j].size()));
    }
    const double gain_factor = sub.compute_cost - cost_model.lookup_cost;
    auto& row = table.gains[j];
    row.resize(static_cast<std::size_t>(cap) + 1);
    row[0] = 0.0;
    for (std::int64_t m = 1; m <= cap; ++m) {
      row[static_cast<std::size_t>(m)] =
          cumulative_hit_probability(ranked[j], m) * gain_factor;
    }
  }
  return table;
}

/// Staged-knapsack dynamic program over the gain tables: maximizes
/// sum omega_j(m_j) subject to 0 <= m_j <= cap_j and sum m_j <= M, in
/// O(M^2 D). Among optima the canonical solution minimizes the total budget
/// used, then hands later sub-functions as much as possible (each stage's
/// argmax prefers the smallest prefix budget).
inline DpResult allocate_dp(const OmegaTable& omega, std::int64_t budget,
                            std::span<const int> caps) {
  if (budget < 0) {
    throw InvalidArgumentError("budget must be nonnegative");
  }
  const std::size_t num_subs = omega.num_sub_functions();
  if (num_subs == 0) {
    throw CapacityMismatchError("omega table is empty");
  }
  if (caps.size() != num_subs) {
    throw CapacityMismatchError("expected " + std::to_string(num_subs) +
                                " capacities, got " +
                                std::to_string(caps.size()));
  }
  for (std::size_t j = 0; j < num_subs; ++j) {
    if (caps[j] < 0 || caps[j] != omega.capacity(j)) {
      throw CapacityMismatchError(
          "capacity " + std::to_string(caps[j]) + " for sub-function " +
          std::to_string(j + 1) + " does not match omega table row of size " +
          std::to_string(omega.gains[j].size()));
    }
  }

  const auto m = static_cast<std::size_t>(budget);
  DpTables tables;
  tables.best.assign(m + 1,
                     std::vector<double>(num_subs, DpTables::kUnreachable));
  tables.split.assign(m + 1, std::vector<int>(num_subs, -1));

  // reach = joint capacity of the processed prefix, clamped to the budget
  std::size_t reach =
      std::min(m, static_cast<std::size_t>(caps[0]));
  for (std::size_t i = 0; i <= reach; ++i) {
    tables.best[i][0] = omega.gains[0][i];
    tables.split[i][0] = 0;
  }
  for (std::size_t j = 1; j < num_subs; ++j) {
    const std::size_t prev_reach = reach;
    reach = std::min(m, reach + static_cast<std::size_t>(caps[j]));
    const auto& row = omega.gains[j];
    for (std::size_t i = 0; i <= reach; ++i) {
      const std::size_t lo =
          i > static_cast<std::size_t>(caps[j])
              ? i - static_cast<std::size_t>(caps[j])
              : 0;
      const std::size_t hi = std::min(i, prev_reach);
      double best = DpTables::kUnreachable;
      int arg = -1;
      for (std::size_t prefix = lo; prefix <= hi; ++prefix) {
        const double value = tables.best[prefix][j - 1] + row[i - prefix];
        if (value > best) {  // ties keep the smallest prefix budget
          best = value;
          arg = static_cast<int>(prefix);
        }
      }
      tables.best[i][j] = best;
      tables.split[i][j] = arg;
    }
  }

  std::size_t total = 0;
  for (std::size_t i = 1; i <= reach; ++i) {
    if (tables.best[i][num_subs - 1] > tables.best[total][num_subs - 1]) {
      total = i;
    }
  }

  Allocation allocation;
  allocation.objective = tables.best[total][num_subs - 1];
  allocation.counts.assign(num_subs, 0);
  std::size_t remaining = total;
  for (std::size_t j = num_subs; j-- > 1;) {
    const auto prefix =
        static_cast<std::size_t>(tables.split[remaining][j]);
    allocation.counts[j] = static_cast<int>(remaining - prefix);
    remaining = prefix;
  }
  allocation.counts[0] = static_cast<int>(remaining);
  return {std::move(allocation), std::move(tables)};
}

inline constexpr std::uint64_t kDefaultAllocationCap = 10'000'000;

/// Exhaustive reference allocator: enumerates every feasible split and keeps
/// the best under the same canonical tie-break as allocate_dp (objective,
/// then smaller total, then larger counts from the last sub-function down).
inline Allocation allocate_brute_force(
    const OmegaTable& omega, std::int64_t budget, std::span<const int> caps,
    std::uint64_t cap = kDefaultAllocationCap) {
  if (budget < 0) {
    throw InvalidArgumentError("budget must be nonnegative");
  }
  const std::size_t num_subs = omega.num_sub_functions();
  if (num_subs == 0 || caps.size() != num_subs) {
    throw CapacityMismatchError("capacities do not match omega table");
  }
  std::uint64_t combinations = 1;
  for (std::size_t j = 0; j < num_subs; ++j) {
    if (caps[j] < 0 || caps[j] != omega.capacity(j)) {
      throw CapacityMismatchError("capacity mismatch for sub-function " +
                                  std::to_string(j + 1));
    }
    if (__builtin_mul_overflow(combinations,
                               static_cast<std::uint64_t>(caps[j]) + 1,
                               &combinations) ||
        combinations > cap) {
      throw OracleCapExceededError("allocation enumeration exceeds cap " +
                                   std::to_string(cap));
    }
  }

  std::vector<int> counts(num_subs, 0);
  Allocation best;
  best.counts = counts;
  best.objective = 0.0;
  for (std::size_t j = 0; j < num_subs; ++j) {
    best.objective += omega.gains[j][0];
  }
  bool first = true;

  const auto better = [&](const std::vector<int>& a, double obj_a,
                          const std::vector<int>& b, double obj_b) {
    if (obj_a != obj_b) {
      return obj_a > obj_b;
    }
    int total_a = 0;
    int total_b = 0;
    for (std::size_t j = 0; j < num_subs; ++j) {
      total_a += a[j];
      total_b += b[j];
    }
    if (total_a != total_b) {
      return total_a < total_b;
    }
    for (std::size_t j = num_subs; j-- > 1;) {
      if (a[j] != b[j]) {
        return a[j] > b[j];
      }
    }
    return false;
  };

  while (true) {
    std::int64_t total = 0;
    for (int c : counts) {
      total += c;
    }
    if (total <= budget) {
      double objective = 0.0;
      for (std::size_t j = 0; j < num_subs; ++j) {
        objective += omega.gains[j][static_cast<std::size_t>(counts[j])];
      }
      if (first || better(counts, objective, best.counts, best.objective)) {
        best.counts = counts;
        best.objective = objective;
        first = false;
      }
    }
    std::size_t pos = num_subs;
    while (pos-- > 0) {
      if (++counts[pos] <= caps[pos]) {
        break;
      }
      counts[pos] = 0;
      if (pos == 0) {
        return best;
      }
    }
  }
}

/// Expected evaluation cost of a plan: the plain decomposed cost minus each
/// sub-function's hit probability times its per-hit saving,
/// T_c(Delta(f)) - sum_j P(hit_j | m_j) * (T_c(f_j) - T_M).
inline double expected_time(const Decomposition& decomp,
                            const CostModel& cost_model,
                            const Allocation& allocation,
                            std::span<const RankedVectorList> ranked) {
  if (allocation.counts.size() != decomp.sub_functions.size() ||
      ranked.size() != decomp.sub_functions.size()) {
    throw DimensionMismatchError(
        "allocation/ranked lists do not match the decomposition");
  }
  double time = decomposition_cost(decomp);
  for (std::size_t j = 0; j < decomp.sub_functions.size(); ++j) {
    const double hit = cumulative_hit_probability(ranked[j],
                                                  allocation.counts[j]);
    time -= hit * (decomp.sub_functions[j].compute_cost -
                   cost_model.lookup_cost);
  }
  return time;
}

}  // namespace memoplan
