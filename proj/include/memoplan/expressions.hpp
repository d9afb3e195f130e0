#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memoplan/distributions.hpp"
#include "memoplan/errors.hpp"

namespace memoplan {

/// Arithmetic mode: plain real arithmetic, or addition/multiplication reduced
/// modulo the alphabet size (the ring Z_K on symbol indices).
enum class EvalMode { kReal, kModK };

/// Arithmetic expression tree over positional variables x1..xn (stored
/// 0-based). Only +, * and nonnegative constants; subtraction and division
/// are deliberately unsupported.
struct Expression {
  enum class Kind { kConstant, kVar, kAdd, kMul };

  Kind kind = Kind::kConstant;
  double value = 0.0;                 // kConstant
  int var = 0;                        // kVar, 0-based position
  std::vector<Expression> children;   // kAdd / kMul

  static Expression constant(double v) {
    Expression e;
    e.kind = Kind::kConstant;
    e.value = v;
    return e;
  }
  static Expression variable(int index) {
    Expression e;
    e.kind = Kind::kVar;
    e.var = index;
    return e;
  }
  static Expression add(std::vector<Expression> terms) {
    Expression e;
    e.kind = Kind::kAdd;
    e.children = std::move(terms);
    return e;
  }
  static Expression mul(std::vector<Expression> factors) {
    Expression e;
    e.kind = Kind::kMul;
    e.children = std::move(factors);
    return e;
  }
};

namespace detail {

inline std::int64_t reduce_mod(std::int64_t v, std::int64_t k) {
  std::int64_t r = v % k;
  return r < 0 ? r + k : r;
}

inline std::int64_t eval_mod(const Expression& expr,
                             std::span<const double> bindings,
                             std::int64_t modulus) {
  switch (expr.kind) {
    case Expression::Kind::kConstant:
      return reduce_mod(std::llround(expr.value), modulus);
    case Expression::Kind::kVar:
      if (expr.var < 0 || expr.var >= static_cast<int>(bindings.size())) {
        throw UnboundVariableError("variable x" + std::to_string(expr.var + 1) +
                                   " not bound (" +
                                   std::to_string(bindings.size()) +
                                   " bindings)");
      }
      return reduce_mod(std::llround(bindings[expr.var]), modulus);
    case Expression::Kind::kAdd: {
      std::int64_t acc = 0;
      for (const Expression& child : expr.children) {
        acc = reduce_mod(acc + eval_mod(child, bindings, modulus), modulus);
      }
      return acc;
    }
    case Expression::Kind::kMul: {
      std::int64_t acc = 1;
      for (const Expression& child : expr.children) {
        acc = reduce_mod(acc * eval_mod(child, bindings, modulus), modulus);
      }
      return acc;
    }
  }
  throw InvalidArgumentError("corrupt expression node");
}

inline double eval_real(const Expression& expr,
                        std::span<const double> bindings) {
  switch (expr.kind) {
    case Expression::Kind::kConstant:
      return expr.value;
    case Expression::Kind::kVar:
      if (expr.var < 0 || expr.var >= static_cast<int>(bindings.size())) {
        throw UnboundVariableError("variable x" + std::to_string(expr.var + 1) +
                                   " not bound (" +
                                   std::to_string(bindings.size()) +
                                   " bindings)");
      }
      return bindings[expr.var];
    case Expression::Kind::kAdd: {
      double acc = 0.0;
      for (const Expression& child : expr.children) {
        acc += eval_real(child, bindings);
      }
      return acc;
    }
    case Expression::Kind::kMul: {
      double acc = 1.0;
      for (const Expression& child : expr.children) {
        acc *= eval_real(child, bindings);
      }
      return acc;
    }
  }
  throw InvalidArgumentError("corrupt expression node");
}

}  // namespace detail

/// Evaluates `expr` with positional `bindings`. In ModK mode all values are
/// reduced modulo `modulus` at every node, so the result lies in 0..K-1.
inline double eval_expression(const Expression& expr,
                              std::span<const double> bindings, EvalMode mode,
                              int modulus = 0) {
  if (mode == EvalMode::kModK) {
    if (modulus < 2) {
      throw InvalidArgumentError("ModK evaluation needs modulus >= 2, got " +
                                 std::to_string(modulus));
    }
    return static_cast<double>(detail::eval_mod(expr, bindings, modulus));
  }
  return detail::eval_real(expr, bindings);
}

// --- expression grammar ------------------------------------------------
//
//   expr   := term ('+' term)*
//   term   := factor ('*' factor)*
//   factor := integer | 'x' integer | '(' expr ')'
//
// Whitespace is ignored everywhere. Variables are written 1-based (x1 is the
// first positional argument) and stored 0-based.

namespace detail {

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  Expression parse() {
    Expression e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) {
      fail("unexpected trailing input");
    }
    return e;
  }

 private:
  Expression parse_sum() {
    std::vector<Expression> terms;
    terms.push_back(parse_product());
    while (peek() == '+') {
      ++pos_;
      terms.push_back(parse_product());
    }
    return terms.size() == 1 ? std::move(terms.front())
                             : Expression::add(std::move(terms));
  }

  Expression parse_product() {
    std::vector<Expression> factors;
    factors.push_back(parse_factor());
    while (peek() == '*') {
      ++pos_;
      factors.push_back(parse_factor());
    }
    return factors.size() == 1 ? std::move(factors.front())
                               : Expression::mul(std::move(factors));
  }

  Expression parse_factor() {
    skip_ws();
    if (pos_ >= text_.size()) {
      fail("expected a factor");
    }
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expression inner = parse_sum();
      if (peek() != ')') {
        fail("expected ')'");
      }
      ++pos_;
      return inner;
    }
    if (c == 'x' || c == 'X') {
      ++pos_;
      const std::uint64_t index = parse_integer("variable index");
      if (index < 1) {
        fail("variable indices are 1-based");
      }
      return Expression::variable(static_cast<int>(index - 1));
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      return Expression::constant(
          static_cast<double>(parse_integer("constant")));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::uint64_t parse_integer(const char* what) {
    if (pos_ >= text_.size() ||
        !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      fail(std::string("expected ") + what);
    }
    std::uint64_t value = 0;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + static_cast<std::uint64_t>(text_[pos_] - '0');
      if (value > (std::uint64_t{1} << 53)) {
        fail(std::string(what) + " too large");
      }
      ++pos_;
    }
    return value;
  }

  // Returns the next non-whitespace character without consuming it, or '\0'.
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& message) {
    throw ExpressionParseError(message + " at position " +
                               std::to_string(pos_) + " in \"" +
                               std::string(text_) + "\"");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expression parse_expression(std::string_view text) {
  return detail::ExpressionParser(text).parse();
}

// --- decomposition -----------------------------------------------------

/// One component f_j of a decomposition: an expression over `var_indices`
/// (0-based global variables, referenced positionally as x1..xl inside
/// `body`) plus the abstract cost of computing it from scratch.
struct SubFunction {
  int id = 0;  // 1-based, matches config order
  std::vector<int> var_indices;
  Expression body;
  double compute_cost = 1.0;
};

/// f(x) = combine(f_1(x_1), ..., f_D(x_D)). The combine expression binds the
/// sub-function outputs positionally.
struct Decomposition {
  int num_vars = 0;
  Alphabet alphabet;
  std::vector<SubFunction> sub_functions;
  Expression combine;
  double combine_cost = 0.0;
  EvalMode mode = EvalMode::kReal;
};

inline const Decomposition& validate_decomposition(const Decomposition& decomp) {
  validate_alphabet(decomp.alphabet);
  if (decomp.num_vars < 1) {
    throw InvalidArgumentError("decomposition needs at least one variable");
  }
  if (decomp.sub_functions.empty()) {
    throw InvalidArgumentError("decomposition needs at least one sub-function");
  }
  if (decomp.combine_cost < 0.0) {
    throw InvalidArgumentError("combine cost must be nonnegative");
  }
  for (const SubFunction& sub : decomp.sub_functions) {
    if (sub.var_indices.empty()) {
      throw EmptyVariableListError("sub-function " + std::to_string(sub.id) +
                                   " binds no variables");
    }
    if (sub.compute_cost <= 0.0) {
      throw InvalidArgumentError("sub-function " + std::to_string(sub.id) +
                                 " compute cost must be positive");
    }
    for (std::size_t a = 0; a < sub.var_indices.size(); ++a) {
      const int var = sub.var_indices[a];
      if (var < 0 || var >= decomp.num_vars) {
        throw IndexOutOfRangeError("sub-function " + std::to_string(sub.id) +
                                   " references variable " +
                                   std::to_string(var + 1) + " outside 1.." +
                                   std::to_string(decomp.num_vars));
      }
      for (std::size_t b = a + 1; b < sub.var_indices.size(); ++b) {
        if (sub.var_indices[b] == var) {
          throw InvalidArgumentError("sub-function " + std::to_string(sub.id) +
                                     " repeats variable " +
                                     std::to_string(var + 1));
        }
      }
    }
  }
  return decomp;
}

/// Result of one function evaluation: the value plus the abstract cost
/// charged for producing it.
struct Evaluation {
  double value = 0.0;
  double cost = 0.0;
};

/// T_c(Delta(f)) under the additive model: combine cost plus the cost of
/// computing every sub-function from scratch.
inline double decomposition_cost(const Decomposition& decomp) {
  double total = decomp.combine_cost;
  for (const SubFunction& sub : decomp.sub_functions) {
    total += sub.compute_cost;
  }
  return total;
}

/// Evaluates a sub-function on `sub_input` (its local input vector).
inline double eval_sub_function(const Decomposition& decomp,
                                const SubFunction& sub,
                                std::span<const int> sub_input) {
  if (sub_input.size() != sub.var_indices.size()) {
    throw DimensionMismatchError("sub-function " + std::to_string(sub.id) +
                                 " expects " +
                                 std::to_string(sub.var_indices.size()) +
                                 " components, got " +
                                 std::to_string(sub_input.size()));
  }
  std::vector<double> bindings(sub_input.size());
  for (std::size_t t = 0; t < sub_input.size(); ++t) {
    bindings[t] = static_cast<double>(sub_input[t]);
  }
  return eval_expression(sub.body, bindings, decomp.mode, decomp.alphabet.size);
}

/// Evaluates F(f_1(x_1), ..., f_D(x_D)) without memoization, charging the full
/// decomposition cost.
inline Evaluation evaluate_plain(const Decomposition& decomp,
                                 std::span<const int> input) {
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
  InputVector sub_input;
  for (std::size_t j = 0; j < decomp.sub_functions.size(); ++j) {
    const SubFunction& sub = decomp.sub_functions[j];
    sub_input.clear();
    for (int var : sub.var_indices) {
      sub_input.push_back(input[var]);
    }
    outputs[j] = eval_sub_function(decomp, sub, sub_input);
  }
  Evaluation result;
  result.value =
      eval_expression(decomp.combine, outputs, decomp.mode, decomp.alphabet.size);
  result.cost = decomposition_cost(decomp);
  return result;
}

/// Exact lookup-table entry counts: K^N for the undecomposed function versus
/// sum of K^{l_j} over the sub-functions.
struct TableSizes {
  std::uint64_t monolithic = 0;
  std::uint64_t decomposed = 0;
};

namespace detail {

inline std::uint64_t checked_pow(std::uint64_t base, std::size_t exponent) {
  std::uint64_t result = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (__builtin_mul_overflow(result, base, &result)) {
      throw OverflowError("table size " + std::to_string(base) + "^" +
                          std::to_string(exponent) + " is not representable");
    }
  }
  return result;
}

}  // namespace detail

inline TableSizes table_size(const Decomposition& decomp) {
  const auto base = static_cast<std::uint64_t>(decomp.alphabet.size);
  TableSizes sizes;
  sizes.monolithic =
      detail::checked_pow(base, static_cast<std::size_t>(decomp.num_vars));
  for (const SubFunction& sub : decomp.sub_functions) {
    const std::uint64_t entries =
        detail::checked_pow(base, sub.var_indices.size());
    if (__builtin_add_overflow(sizes.decomposed, entries, &sizes.decomposed)) {
      throw OverflowError("decomposed table size is not representable");
    }
  }
  return sizes;
}

}  // namespace memoplan
