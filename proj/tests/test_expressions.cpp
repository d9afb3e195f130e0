#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "memoplan/expressions.hpp"
#include "support.hpp"

using namespace memoplan;
using namespace memoplan::testing;
using Catch::Matchers::WithinAbs;

TEST_CASE("parse_expression handles the basic grammar") {
  const Expression product = parse_expression("x1*x2*x3");
  CHECK_THAT(
      eval_expression(product, std::vector<double>{1, 1, 1}, EvalMode::kReal),
      WithinAbs(1.0, 0.0));
  CHECK_THAT(
      eval_expression(product, std::vector<double>{1, 0, 1}, EvalMode::kReal),
      WithinAbs(0.0, 0.0));

  const Expression mixed = parse_expression("(x1 + x2) * x3 + 2");
  CHECK_THAT(
      eval_expression(mixed, std::vector<double>{1, 2, 3}, EvalMode::kReal),
      WithinAbs(11.0, 0.0));

  const Expression constant = parse_expression("7");
  CHECK_THAT(eval_expression(constant, std::vector<double>{}, EvalMode::kReal),
             WithinAbs(7.0, 0.0));

  // precedence: multiplication binds tighter than addition
  const Expression prec = parse_expression("x1+x2*x3");
  CHECK_THAT(
      eval_expression(prec, std::vector<double>{1, 2, 3}, EvalMode::kReal),
      WithinAbs(7.0, 0.0));
}

TEST_CASE("parse_expression is whitespace insensitive") {
  const std::vector<double> binding{2, 5};
  const Expression a = parse_expression("x1*x2");
  const Expression b = parse_expression("  x1 *\tx2  ");
  CHECK(eval_expression(a, binding, EvalMode::kReal) ==
        eval_expression(b, binding, EvalMode::kReal));
}

TEST_CASE("parse_expression rejects malformed input") {
  CHECK_THROWS_AS(parse_expression(""), ExpressionParseError);
  CHECK_THROWS_AS(parse_expression("x1+"), ExpressionParseError);
  CHECK_THROWS_AS(parse_expression("x0"), ExpressionParseError);
  CHECK_THROWS_AS(parse_expression("x"), ExpressionParseError);
  CHECK_THROWS_AS(parse_expression("(x1+x2"), ExpressionParseError);
  CHECK_THROWS_AS(parse_expression("x1 x2"), ExpressionParseError);
  CHECK_THROWS_AS(parse_expression("x1-x2"), ExpressionParseError);
  CHECK_THROWS_AS(parse_expression("y1"), ExpressionParseError);
  CHECK_THROWS_AS(parse_expression("x1+x2)"), ExpressionParseError);
  CHECK_THROWS_AS(parse_expression("()"), ExpressionParseError);
}

TEST_CASE("eval_expression in mod-k mode reduces at every step") {
  const Expression sum = parse_expression("x1+x2");
  CHECK_THAT(
      eval_expression(sum, std::vector<double>{1, 1}, EvalMode::kModK, 2),
      WithinAbs(0.0, 0.0));
  CHECK_THAT(
      eval_expression(sum, std::vector<double>{1, 0}, EvalMode::kModK, 2),
      WithinAbs(1.0, 0.0));

  const Expression poly = parse_expression("x1*x2 + x3*2 + 5");
  // real value at (2,2,1) is 4 + 2 + 5 = 11 -> 2 mod 3
  CHECK_THAT(
      eval_expression(poly, std::vector<double>{2, 2, 1}, EvalMode::kModK, 3),
      WithinAbs(2.0, 0.0));
  CHECK_THROWS_AS(
      eval_expression(poly, std::vector<double>{2, 2, 1}, EvalMode::kModK, 0),
      InvalidArgumentError);
}

TEST_CASE("mod-k results always land in the alphabet") {
  std::mt19937_64 rng(314159);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 3);
    const int num_vars = 1 + static_cast<int>(rng() % 4);
    const Expression expr = random_expression(rng, num_vars, 3);
    std::uniform_int_distribution<int> symbol(0, k - 1);
    for (int draw = 0; draw < 10; ++draw) {
      std::vector<double> binding(num_vars);
      for (double& b : binding) {
        b = symbol(rng);
      }
      const double value =
          eval_expression(expr, binding, EvalMode::kModK, k);
      CHECK(value >= 0.0);
      CHECK(value < k);
      CHECK(value == std::floor(value));
      // mod-k value must agree with the real value reduced mod k
      const double real = eval_expression(expr, binding, EvalMode::kReal);
      CHECK_THAT(std::fmod(real, k), WithinAbs(value, 1e-9));
    }
  }
}

TEST_CASE("unbound variables are rejected at evaluation time") {
  const Expression expr = parse_expression("x1+x3");
  CHECK_THROWS_AS(eval_expression(expr, std::vector<double>{1}, EvalMode::kReal),
                  UnboundVariableError);
  CHECK_THROWS_AS(
      eval_expression(expr, std::vector<double>{1, 2}, EvalMode::kModK, 2),
      UnboundVariableError);
  CHECK_NOTHROW(
      eval_expression(expr, std::vector<double>{1, 2, 3}, EvalMode::kReal));
}

TEST_CASE("decomposition_cost sums component costs") {
  const Decomposition decomp = example1_decomposition();
  CHECK_THAT(decomposition_cost(decomp), WithinAbs(21.0, 0.0));

  const Decomposition pricier = example1_decomposition(12.5, 30.0, 2.0);
  CHECK_THAT(decomposition_cost(pricier), WithinAbs(44.5, 0.0));
}

TEST_CASE("evaluate_plain matches the monolithic expression on example 1") {
  const Decomposition decomp = example1_decomposition();
  const Expression direct = parse_expression("x1*x2*x3 + x4*x5*x6");
  for_each_vector(6, 2, [&](const InputVector& input) {
    std::vector<double> binding(input.begin(), input.end());
    const Evaluation got = evaluate_plain(decomp, input);
    CHECK_THAT(got.value,
               WithinAbs(eval_expression(direct, binding, EvalMode::kReal),
                         1e-12));
    CHECK_THAT(got.cost, WithinAbs(21.0, 0.0));
  });
}

TEST_CASE("evaluate_plain respects mod-k mode") {
  Decomposition decomp = example1_decomposition();
  decomp.mode = EvalMode::kModK;
  const Evaluation got = evaluate_plain(decomp, InputVector{1, 1, 1, 1, 1, 1});
  // 1 + 1 reduces to 0 mod 2
  CHECK_THAT(got.value, WithinAbs(0.0, 0.0));
}

TEST_CASE("validate_decomposition rejects inconsistent structures") {
  Decomposition decomp = example1_decomposition();
  CHECK_NOTHROW(validate_decomposition(decomp));

  Decomposition bad_var = decomp;
  bad_var.sub_functions[0].var_indices = {0, 1, 6};
  CHECK_THROWS_AS(validate_decomposition(bad_var), IndexOutOfRangeError);

  Decomposition dup_var = decomp;
  dup_var.sub_functions[0].var_indices = {0, 0, 1};
  CHECK_THROWS_AS(validate_decomposition(dup_var), InvalidArgumentError);

  Decomposition no_vars = decomp;
  no_vars.sub_functions[0].var_indices.clear();
  CHECK_THROWS_AS(validate_decomposition(no_vars), EmptyVariableListError);

  Decomposition neg_cost = decomp;
  neg_cost.sub_functions[1].compute_cost = -1.0;
  CHECK_THROWS_AS(validate_decomposition(neg_cost), InvalidArgumentError);

  Decomposition no_subs = decomp;
  no_subs.sub_functions.clear();
  CHECK_THROWS_AS(validate_decomposition(no_subs), InvalidArgumentError);
}

TEST_CASE("table_size reports monolithic and decomposed footprints") {
  const Decomposition decomp = example1_decomposition();
  const TableSizes sizes = table_size(decomp);
  CHECK(sizes.monolithic == 64);
  CHECK(sizes.decomposed == 16);

  // ternary variant: 3^4 = 81 vs 3^2 + 3^2 = 18
  Decomposition ternary;
  ternary.num_vars = 4;
  ternary.alphabet = Alphabet{3, {}};
  ternary.sub_functions.push_back(
      SubFunction{0, {0, 1}, parse_expression("x1*x2"), 4.0});
  ternary.sub_functions.push_back(
      SubFunction{1, {2, 3}, parse_expression("x1+x2"), 4.0});
  ternary.combine = parse_expression("x1+x2");
  ternary.combine_cost = 1.0;
  ternary.mode = EvalMode::kReal;
  const TableSizes tsizes = table_size(ternary);
  CHECK(tsizes.monolithic == 81);
  CHECK(tsizes.decomposed == 18);
}

TEST_CASE("table_size overflow is reported") {
  Decomposition wide;
  wide.num_vars = 80;
  wide.alphabet = Alphabet{4, {}};
  std::vector<int> vars(80);
  for (int i = 0; i < 80; ++i) {
    vars[i] = i;
  }
  wide.sub_functions.push_back(
      SubFunction{0, vars, parse_expression("x1"), 1.0});
  wide.combine = parse_expression("x1");
  wide.combine_cost = 0.0;
  wide.mode = EvalMode::kReal;
  CHECK_THROWS_AS(table_size(wide), OverflowError);
}
