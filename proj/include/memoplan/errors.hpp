#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace memoplan {

// Base class for all library errors. `code()` is a stable, machine-greppable
// identifier; the CLI prints failures as `error[<code>]: <message>`.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define MEMOPLAN_DEFINE_ERROR(NAME, CODE)                          \
  class NAME : public Error {                                      \
   public:                                                         \
    explicit NAME(const std::string& message) : Error(CODE, message) {} \
  }

// distributions
MEMOPLAN_DEFINE_ERROR(RowSumError, "row_sum");
MEMOPLAN_DEFINE_ERROR(NegativeProbabilityError, "negative_probability");
MEMOPLAN_DEFINE_ERROR(DimensionMismatchError, "dimension_mismatch");
MEMOPLAN_DEFINE_ERROR(IndexOutOfRangeError, "index_out_of_range");
MEMOPLAN_DEFINE_ERROR(EmptySampleSetError, "empty_sample_set");
MEMOPLAN_DEFINE_ERROR(MalformedSampleError, "malformed_sample");

// expressions
MEMOPLAN_DEFINE_ERROR(UnboundVariableError, "unbound_variable");
MEMOPLAN_DEFINE_ERROR(ExpressionParseError, "expr_parse");
MEMOPLAN_DEFINE_ERROR(OverflowError, "overflow");

// top_vectors
MEMOPLAN_DEFINE_ERROR(EmptyVariableListError, "empty_variable_list");
MEMOPLAN_DEFINE_ERROR(OracleCapExceededError, "oracle_cap_exceeded");
MEMOPLAN_DEFINE_ERROR(RankOutOfRangeError, "rank_out_of_range");

// allocator
MEMOPLAN_DEFINE_ERROR(InsufficientRankedEntriesError, "insufficient_ranked_entries");
MEMOPLAN_DEFINE_ERROR(CapacityMismatchError, "capacity_mismatch");

// configuration / CLI boundary
MEMOPLAN_DEFINE_ERROR(ConfigError, "config");
MEMOPLAN_DEFINE_ERROR(InvalidArgumentError, "invalid_argument");

#undef MEMOPLAN_DEFINE_ERROR

}  // namespace memoplan
