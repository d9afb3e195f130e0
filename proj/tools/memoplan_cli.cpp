// Command-line front end: plan, simulate, estimate.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "memoplan/memoplan.hpp"

namespace {

void write_output(const std::string& path, const nlohmann::ordered_json& j) {
  const std::string text = j.dump(2) + "\n";
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw memoplan::ConfigError("cannot open output file \"" + path + "\"");
  }
  out << text;
}

int run_plan(const std::string& config_path, const std::string& output_path) {
  const memoplan::ProblemConfig config =
      memoplan::load_problem_config(config_path);
  const memoplan::Problem problem = memoplan::make_problem(config);
  const memoplan::MemoPlan plan =
      memoplan::build_plan(problem.decomposition, problem.marginals,
                           problem.cost_model, problem.budget);
  write_output(output_path, memoplan::plan_report(plan));
  return 0;
}

int run_simulate(const std::string& config_path, std::uint64_t samples,
                 std::uint64_t seed, const std::string& output_path) {
  const memoplan::ProblemConfig config =
      memoplan::load_problem_config(config_path);
  const memoplan::Problem problem = memoplan::make_problem(config);
  const memoplan::MemoPlan plan =
      memoplan::build_plan(problem.decomposition, problem.marginals,
                           problem.cost_model, problem.budget);
  const memoplan::SimulationReport report =
      memoplan::simulate(plan, problem.marginals, samples, seed);
  write_output(output_path, memoplan::simulation_report_json(report));
  return 0;
}

int run_estimate(const std::string& samples_path, int alphabet_size,
                 const std::string& output_path) {
  std::ifstream in(samples_path);
  if (!in) {
    throw memoplan::ConfigError("cannot open samples file \"" + samples_path +
                                "\"");
  }
  const memoplan::Alphabet alphabet{alphabet_size, {}};
  memoplan::validate_alphabet(alphabet);
  const auto samples = memoplan::parse_sample_lines(in, alphabet_size);
  const memoplan::MarginalTable table =
      memoplan::estimate_marginals(samples, alphabet);
  write_output(output_path, memoplan::marginals_report(table, alphabet));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memoization planner for decomposed functions with stochastic input"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_path = "-";
  std::string samples_path;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 0;
  int alphabet_size = 2;

  CLI::App* plan = app.add_subcommand(
      "plan", "build a memoization plan and write the plan report");
  plan->add_option("--config", config_path, "problem config (JSON)")
      ->required();
  plan->add_option("--output", output_path, "report path ('-' for stdout)");

  CLI::App* simulate = app.add_subcommand(
      "simulate", "build a plan and validate it by seeded simulation");
  simulate->add_option("--config", config_path, "problem config (JSON)")
      ->required();
  simulate->add_option("--samples", samples, "number of Monte Carlo samples");
  simulate->add_option("--seed", seed, "64-bit generator seed");
  simulate->add_option("--output", output_path, "report path ('-' for stdout)");

  CLI::App* estimate = app.add_subcommand(
      "estimate", "estimate marginals from a samples file");
  estimate
      ->add_option("samples_file", samples_path,
                   "one input vector per line, space-separated indices")
      ->required();
  estimate->add_option("--k", alphabet_size, "alphabet size")->required();
  estimate->add_option("--output", output_path, "output path ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan->parsed()) {
      return run_plan(config_path, output_path);
    }
    if (simulate->parsed()) {
      return run_simulate(config_path, samples, seed, output_path);
    }
    return run_estimate(samples_path, alphabet_size, output_path);
  } catch (const memoplan::Error& e) {
    std::cerr << "error[" << e.code() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
}
