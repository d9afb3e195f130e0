#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memoplan/distributions.hpp"
#include "memoplan/errors.hpp"

namespace memoplan {

/// One enumerated input vector with its probability.
struct RankedEntry {
  InputVector vector;
  double probability = 0.0;
};

/// A sub-function's input vectors sorted by probability (descending, ties
/// lexicographic ascending) together with prefix sums of their mass.
struct RankedVectorList {
  std::vector<RankedEntry> entries;
  std::vector<double> cumulative;

  static RankedVectorList from_entries(std::vector<RankedEntry> entries) {
    RankedVectorList list;
    list.entries = std::move(entries);
    list.cumulative.reserve(list.entries.size());
    double mass = 0.0;
    for (const RankedEntry& entry : list.entries) {
      mass += entry.probability;
      list.cumulative.push_back(mass);
    }
    return list;
  }

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

/// P(X_M | m): total probability of the m highest-ranked vectors.
inline double cumulative_hit_probability(const RankedVectorList& ranked,
                                         std::int64_t m) {
  if (m < 0 || m > static_cast<std::int64_t>(ranked.size())) {
    throw RankOutOfRangeError("rank " + std::to_string(m) + " outside 0.." +
                              std::to_string(ranked.size()));
  }
  return m == 0 ? 0.0 : ranked.cumulative[static_cast<std::size_t>(m) - 1];
}

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 20;

namespace detail {

inline std::uint64_t saturating_pow(std::uint64_t base, std::size_t exponent) {
  std::uint64_t result = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (__builtin_mul_overflow(result, base, &result)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return result;
}

inline void check_var_indices(const MarginalTable& table,
                              std::span<const int> var_indices) {
  if (var_indices.empty()) {
    throw EmptyVariableListError("no variables to enumerate");
  }
  for (std::size_t a = 0; a < var_indices.size(); ++a) {
    const int var = var_indices[a];
    if (var < 0 || var >= table.num_vars) {
      throw IndexOutOfRangeError("variable index " + std::to_string(var) +
                                 " outside 0.." +
                                 std::to_string(table.num_vars - 1));
    }
    // a repeated variable would make the product over rows wrong (the two
    // positions are not independent)
    for (std::size_t b = a + 1; b < var_indices.size(); ++b) {
      if (var_indices[b] == var) {
        throw InvalidArgumentError("variable index " + std::to_string(var) +
                                   " repeats in the enumeration");
      }
    }
  }
}

inline bool lex_less(const InputVector& a, const InputVector& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace detail

/// Trellis for the L-best-paths recursion. Step s assigns the symbol of
/// variable position N_y-1-s, i.e. the recursion runs from the last variable
/// towards the first. That direction makes the local tie-break (smaller
/// symbol, then smaller rank) agree with the global rule "equal-probability
/// vectors in lexicographic order"; running it front-to-back would order ties
/// by their trailing components instead.
///
/// psi[s][i][k] is the probability of the k-th most probable suffix whose
/// step-s symbol is u_i; back_symbol/back_rank point at the predecessor cell.
/// Cells beyond the number of distinct suffixes hold kNullProb and are never
/// selected.
struct TrellisState {
  static constexpr double kNullProb = -1.0;

  int num_steps = 0;    // N_y
  int num_symbols = 0;  // K
  int list_size = 0;    // L after clamping to K^{N_y}

  std::vector<std::vector<std::vector<double>>> psi;
  std::vector<std::vector<std::vector<int>>> back_symbol;  // epsilon
  std::vector<std::vector<std::vector<int>>> back_rank;    // r
};

/// Follows back-pointers from (step, symbol, rank) and returns the assignment
/// for variable positions N_y-1-step .. N_y-1, in original variable order.
inline InputVector reconstruct_path(const TrellisState& state, int step,
                                    int symbol, int rank) {
  InputVector path;
  path.reserve(static_cast<std::size_t>(step) + 1);
  int sym = symbol;
  int rk = rank;
  for (int s = step; s >= 0; --s) {
    path.push_back(sym);
    if (s > 0) {
      const int prev_sym = state.back_symbol[s][sym][rk];
      rk = state.back_rank[s][sym][rk];
      sym = prev_sym;
    }
  }
  return path;
}

namespace detail {

struct Candidate {
  double value = 0.0;
  int symbol = 0;
  int rank = 0;
};

// Orders candidates by probability descending; exact ties compare the
// reconstructed suffixes lexicographically. Suffixes of distinct candidates
// are always distinct, so this is a strict total order. `cache` memoizes
// reconstructions per (symbol, rank) of the predecessor step.
class CandidateOrder {
 public:
  CandidateOrder(const TrellisState& state, int pred_step,
                 std::vector<std::vector<InputVector>>& cache)
      : state_(state), pred_step_(pred_step), cache_(cache) {}

  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.value != b.value) {
      return a.value > b.value;
    }
    return lex_less(suffix(a), suffix(b));
  }

 private:
  const InputVector& suffix(const Candidate& c) const {
    InputVector& cached = cache_[c.symbol][c.rank];
    if (cached.empty()) {
      cached = reconstruct_path(state_, pred_step_, c.symbol, c.rank);
    }
    return cached;
  }

  const TrellisState& state_;
  int pred_step_;
  std::vector<std::vector<InputVector>>& cache_;
};

}  // namespace detail

/// Runs the L-best-paths recursion over `var_indices` and returns the filled
/// trellis. L is clamped to the number of distinct vectors, K^{N_y}.
inline TrellisState build_trellis(const MarginalTable& table,
                                  std::span<const int> var_indices,
                                  std::int64_t requested_l) {
  detail::check_var_indices(table, var_indices);
  if (requested_l < 1) {
    throw RankOutOfRangeError("list size must be at least 1, got " +
                              std::to_string(requested_l));
  }
  const int num_steps = static_cast<int>(var_indices.size());
  const int num_symbols =
      static_cast<int>(table.row(var_indices[0]).size());
  const std::uint64_t total = detail::saturating_pow(
      static_cast<std::uint64_t>(num_symbols), var_indices.size());
  const int list_size = static_cast<int>(
      std::min<std::uint64_t>(static_cast<std::uint64_t>(requested_l), total));

  TrellisState state;
  state.num_steps = num_steps;
  state.num_symbols = num_symbols;
  state.list_size = list_size;
  state.psi.assign(
      num_steps,
      std::vector<std::vector<double>>(
          num_symbols, std::vector<double>(list_size, TrellisState::kNullProb)));
  state.back_symbol.assign(num_steps,
                           std::vector<std::vector<int>>(
                               num_symbols, std::vector<int>(list_size, -1)));
  state.back_rank = state.back_symbol;

  // Step 0 handles the last variable: exactly one length-1 suffix per symbol,
  // so only rank 0 is live.
  {
    const auto& row = table.row(var_indices[num_steps - 1]);
    for (int i = 0; i < num_symbols; ++i) {
      state.psi[0][i][0] = row[i];
    }
  }

  std::vector<detail::Candidate> candidates;
  for (int s = 1; s < num_steps; ++s) {
    const auto& row = table.row(var_indices[num_steps - 1 - s]);
    candidates.clear();
    for (int prev = 0; prev < num_symbols; ++prev) {
      for (int rank = 0; rank < list_size; ++rank) {
        if (state.psi[s - 1][prev][rank] == TrellisState::kNullProb) {
          break;  // ranks are filled densely from 0
        }
        candidates.push_back({state.psi[s - 1][prev][rank], prev, rank});
      }
    }
    // The suffix cache is shared across all K cells of this step: the
    // candidate pool only depends on the predecessor step.
    std::vector<std::vector<InputVector>> cache(
        num_symbols, std::vector<InputVector>(list_size));
    std::vector<detail::Candidate> pool = candidates;
    for (int i = 0; i < num_symbols; ++i) {
      const double p = row[i];
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        pool[c] = candidates[c];
        pool[c].value = candidates[c].value * p;
      }
      const auto keep = std::min<std::size_t>(
          pool.size(), static_cast<std::size_t>(list_size));
      std::partial_sort(pool.begin(), pool.begin() + keep, pool.end(),
                        detail::CandidateOrder(state, s - 1, cache));
      for (std::size_t k = 0; k < keep; ++k) {
        state.psi[s][i][k] = pool[k].value;
        state.back_symbol[s][i][k] = pool[k].symbol;
        state.back_rank[s][i][k] = pool[k].rank;
      }
    }
  }
  return state;
}

/// The single most probable assignment over `var_indices`, ties resolved
/// towards the lexicographically smallest vector.
inline RankedEntry best_vector(const MarginalTable& table,
                               std::span<const int> var_indices) {
  detail::check_var_indices(table, var_indices);
  const int num_steps = static_cast<int>(var_indices.size());
  const int num_symbols = static_cast<int>(table.row(var_indices[0]).size());

  // Single-best slice of the recursion (L=1), again back-to-front.
  std::vector<double> psi(num_symbols);
  std::vector<std::vector<int>> back(
      num_steps, std::vector<int>(num_symbols, -1));
  {
    const auto& row = table.row(var_indices[num_steps - 1]);
    for (int i = 0; i < num_symbols; ++i) {
      psi[i] = row[i];
    }
  }
  std::vector<double> next(num_symbols);
  for (int s = 1; s < num_steps; ++s) {
    const auto& row = table.row(var_indices[num_steps - 1 - s]);
    int arg = 0;
    for (int prev = 1; prev < num_symbols; ++prev) {
      if (psi[prev] > psi[arg]) {
        arg = prev;
      }
    }
    for (int i = 0; i < num_symbols; ++i) {
      next[i] = psi[arg] * row[i];
      back[s][i] = arg;
    }
    psi.swap(next);
  }
  int arg = 0;
  for (int i = 1; i < num_symbols; ++i) {
    if (psi[i] > psi[arg]) {
      arg = i;
    }
  }
  InputVector vector;
  vector.reserve(var_indices.size());
  int sym = arg;
  for (int s = num_steps - 1; s >= 0; --s) {
    vector.push_back(sym);
    if (s > 0) {
      sym = back[s][sym];
    }
  }
  const double prob =
      vector_probability(table, var_indices, std::span<const int>(vector));
  return {std::move(vector), prob};
}

/// The L globally most probable assignments over `var_indices`, via the
/// L-best-paths trellis. Output order is probability descending with
/// lexicographic tie-break; L is clamped to K^{N_y}.
inline RankedVectorList top_l_vectors(const MarginalTable& table,
                                      std::span<const int> var_indices,
                                      std::int64_t requested_l) {
  TrellisState state = build_trellis(table, var_indices, requested_l);
  const int last = state.num_steps - 1;

  std::vector<detail::Candidate> finals;
  for (int i = 0; i < state.num_symbols; ++i) {
    for (int k = 0; k < state.list_size; ++k) {
      if (state.psi[last][i][k] == TrellisState::kNullProb) {
        break;
      }
      finals.push_back({state.psi[last][i][k], i, k});
    }
  }
  std::vector<std::vector<InputVector>> cache(
      state.num_symbols, std::vector<InputVector>(state.list_size));
  const auto keep = std::min<std::size_t>(
      finals.size(), static_cast<std::size_t>(state.list_size));
  std::partial_sort(finals.begin(), finals.begin() + keep, finals.end(),
                    detail::CandidateOrder(state, last, cache));
  finals.resize(keep);

  std::vector<RankedEntry> entries;
  entries.reserve(finals.size());
  for (const detail::Candidate& c : finals) {
    InputVector vec = reconstruct_path(state, last, c.symbol, c.rank);
    const double prob =
        vector_probability(table, var_indices, std::span<const int>(vec));
    entries.push_back({std::move(vec), prob});
  }
  // Selection ranked by trellis scores (products taken back-to-front);
  // presentation uses the front-to-back product so listed probabilities are
  // bit-identical to vector_probability.
  std::sort(entries.begin(), entries.end(),
            [](const RankedEntry& a, const RankedEntry& b) {
              if (a.probability != b.probability) {
                return a.probability > b.probability;
              }
              return detail::lex_less(a.vector, b.vector);
            });
  return RankedVectorList::from_entries(std::move(entries));
}

/// Exhaustive reference enumeration: every vector, sorted by probability
/// descending then lexicographic, truncated to L. Guarded by `cap` since the
/// vector count is K^{N_y}.
inline RankedVectorList brute_force_top_l(
    const MarginalTable& table, std::span<const int> var_indices,
    std::int64_t requested_l, std::uint64_t cap = kDefaultEnumerationCap) {
  detail::check_var_indices(table, var_indices);
  if (requested_l < 1) {
    throw RankOutOfRangeError("list size must be at least 1, got " +
                              std::to_string(requested_l));
  }
  const int num_symbols = static_cast<int>(table.row(var_indices[0]).size());
  const std::uint64_t total = detail::saturating_pow(
      static_cast<std::uint64_t>(num_symbols), var_indices.size());
  if (total > cap) {
    throw OracleCapExceededError("enumeration of " + std::to_string(total) +
                                 " vectors exceeds cap " + std::to_string(cap));
  }

  std::vector<RankedEntry> entries;
  entries.reserve(static_cast<std::size_t>(total));
  InputVector current(var_indices.size(), 0);
  for (std::uint64_t n = 0; n < total; ++n) {
    entries.push_back(
        {current,
         vector_probability(table, var_indices, std::span<const int>(current))});
    for (int pos = static_cast<int>(current.size()) - 1; pos >= 0; --pos) {
      if (++current[pos] < num_symbols) {
        break;
      }
      current[pos] = 0;
    }
  }
  // Enumeration is lexicographic, so a stable sort on probability alone
  // leaves ties in lexicographic order.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) {
                     return a.probability > b.probability;
                   });
  const auto keep = std::min<std::uint64_t>(
      static_cast<std::uint64_t>(requested_l), total);
  entries.resize(static_cast<std::size_t>(keep));
  return RankedVectorList::from_entries(std::move(entries));
}

}  // namespace memoplan
