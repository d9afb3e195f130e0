#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "memoplan/errors.hpp"

namespace memoplan {

/// An assignment of alphabet indices (0..K-1) to an ordered list of variables.
using InputVector = std::vector<int>;

/// Finite input alphabet U = {u_0, ..., u_{K-1}}. Symbols are handled as their
/// indices; labels are optional display names.
struct Alphabet {
  int size = 2;
  std::vector<std::string> labels;  // empty, or exactly `size` distinct names
};

inline const Alphabet& validate_alphabet(const Alphabet& alphabet) {
  if (alphabet.size < 2) {
    throw InvalidArgumentError("alphabet size must be at least 2, got " +
                               std::to_string(alphabet.size));
  }
  if (!alphabet.labels.empty()) {
    if (static_cast<int>(alphabet.labels.size()) != alphabet.size) {
      throw DimensionMismatchError(
          "alphabet has " + std::to_string(alphabet.labels.size()) +
          " labels but size " + std::to_string(alphabet.size));
    }
    for (std::size_t a = 0; a < alphabet.labels.size(); ++a) {
      for (std::size_t b = a + 1; b < alphabet.labels.size(); ++b) {
        if (alphabet.labels[a] == alphabet.labels[b]) {
          throw InvalidArgumentError("duplicate alphabet label '" +
                                     alphabet.labels[a] + "'");
        }
      }
    }
  }
  return alphabet;
}

/// Independent per-variable categorical distributions. probs[i][j] is
/// p_ij = P(x_i = u_j). Immutable after validation.
struct MarginalTable {
  int num_vars = 0;
  std::vector<std::vector<double>> probs;

  const std::vector<double>& row(int var) const { return probs[var]; }
};

/// Absolute tolerance on each row's total mass.
inline constexpr double kRowSumTolerance = 1e-9;

inline const MarginalTable& validate_marginals(const MarginalTable& table,
                                               const Alphabet& alphabet) {
  validate_alphabet(alphabet);
  if (table.num_vars < 1) {
    throw DimensionMismatchError("marginal table needs at least one variable");
  }
  if (static_cast<int>(table.probs.size()) != table.num_vars) {
    throw DimensionMismatchError(
        "marginal table declares " + std::to_string(table.num_vars) +
        " variables but has " + std::to_string(table.probs.size()) + " rows");
  }
  for (int i = 0; i < table.num_vars; ++i) {
    const auto& row = table.probs[i];
    if (static_cast<int>(row.size()) != alphabet.size) {
      throw DimensionMismatchError("row " + std::to_string(i) + " has width " +
                                   std::to_string(row.size()) +
                                   ", expected K=" +
                                   std::to_string(alphabet.size));
    }
    double mass = 0.0;
    for (double p : row) {
      if (p < 0.0) {
        throw NegativeProbabilityError("row " + std::to_string(i) +
                                       " contains negative probability " +
                                       std::to_string(p));
      }
      mass += p;
    }
    if (std::abs(mass - 1.0) > kRowSumTolerance) {
      throw RowSumError("row " + std::to_string(i) + " sums to " +
                        std::to_string(mass) + ", expected 1");
    }
  }
  return table;
}

/// Probability of `vector` as an assignment to `var_indices` (0-based):
/// the product of the per-variable marginals, in the given order.
inline double vector_probability(const MarginalTable& table,
                                 std::span<const int> var_indices,
                                 std::span<const int> vector) {
  if (var_indices.size() != vector.size()) {
    throw DimensionMismatchError(
        "variable list length " + std::to_string(var_indices.size()) +
        " does not match vector length " + std::to_string(vector.size()));
  }
  double prob = 1.0;
  for (std::size_t t = 0; t < var_indices.size(); ++t) {
    const int var = var_indices[t];
    if (var < 0 || var >= table.num_vars) {
      throw IndexOutOfRangeError("variable index " + std::to_string(var) +
                                 " outside 0.." +
                                 std::to_string(table.num_vars - 1));
    }
    const auto& row = table.probs[var];
    const int symbol = vector[t];
    if (symbol < 0 || symbol >= static_cast<int>(row.size())) {
      throw IndexOutOfRangeError("symbol " + std::to_string(symbol) +
                                 " outside alphabet of size " +
                                 std::to_string(row.size()));
    }
    prob *= row[symbol];
  }
  return prob;
}

/// Batch empirical frequency estimate: p_ij = count(x_i = u_j) / num_samples.
/// All samples must bind every variable, so N is taken from the first sample.
inline MarginalTable estimate_marginals(std::span<const InputVector> samples,
                                        const Alphabet& alphabet) {
  validate_alphabet(alphabet);
  if (samples.empty()) {
    throw EmptySampleSetError("no samples to estimate marginals from");
  }
  const std::size_t num_vars = samples.front().size();
  if (num_vars == 0) {
    throw MalformedSampleError("sample 0 is empty");
  }
  std::vector<std::vector<std::uint64_t>> counts(
      num_vars, std::vector<std::uint64_t>(alphabet.size, 0));
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const InputVector& sample = samples[s];
    if (sample.size() != num_vars) {
      throw MalformedSampleError("sample " + std::to_string(s) + " has " +
                                 std::to_string(sample.size()) +
                                 " components, expected " +
                                 std::to_string(num_vars));
    }
    for (std::size_t i = 0; i < num_vars; ++i) {
      const int symbol = sample[i];
      if (symbol < 0 || symbol >= alphabet.size) {
        throw MalformedSampleError("sample " + std::to_string(s) +
                                   " component " + std::to_string(i) +
                                   " is " + std::to_string(symbol) +
                                   ", outside alphabet of size " +
                                   std::to_string(alphabet.size));
      }
      ++counts[i][symbol];
    }
  }
  MarginalTable table;
  table.num_vars = static_cast<int>(num_vars);
  table.probs.resize(num_vars);
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < num_vars; ++i) {
    table.probs[i].resize(alphabet.size);
    for (int j = 0; j < alphabet.size; ++j) {
      table.probs[i][j] = static_cast<double>(counts[i][j]) / n;
    }
  }
  return table;
}

}  // namespace memoplan
