// Command-line front end. Exit codes: 0 success, 1 check failure, 2 usage
// error, 3 numeric non-convergence.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "edt/commands.hpp"

namespace {

int emit(const edt::cli::CommandResult& result, const std::string& out_path, bool as_csv) {
  const std::string payload = as_csv ? result.csv : result.doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << payload;
  } else {
    std::ofstream file(out_path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot open output file '" << out_path << "'\n";
      return 2;
    }
    file << payload;
  }
  return result.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bounds on the minimum energy of robust Gaussian transmission "
               "with a square-law distortion-noise profile"};
  app.require_subcommand(1);

  double alpha = 1.0;
  double tol = 1e-9;
  double c = edt::cli::kBestGeometricC;
  double d = edt::cli::kBestGeometricD;
  double stair_c = 1.0, stair_d = 0.5;
  double q_max = -1.0, step = -1.0;
  double lemma2_d = -1.0;
  std::size_t layers = 16, levels = 2, samples = 100'000, k_max = 10'000;
  std::uint64_t seed = 42;
  std::string format = "json", stair_format = "csv", out_path, suite = "identities";
  bool optimize = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out", out_path, "write output to this file instead of stdout");
  };

  auto* cmd_bounds = app.add_subcommand("bounds", "lower/upper bounds and improvements");
  cmd_bounds->add_option("--alpha", alpha, "profile coefficient")->check(CLI::PositiveNumber);
  cmd_bounds->add_option("--tol", tol, "series/evaluation tolerance");
  add_common(cmd_bounds);

  auto* cmd_table = app.add_subcommand("table2", "five-alpha bound comparison table");
  cmd_table->add_option("--tol", tol, "series/evaluation tolerance");
  add_common(cmd_table);

  auto* cmd_lower = app.add_subcommand("lower", "optimize the K-level lower bound");
  cmd_lower->add_option("--alpha", alpha, "profile coefficient")->check(CLI::PositiveNumber);
  cmd_lower->add_option("--K", levels, "number of levels")->check(CLI::PositiveNumber);
  cmd_lower->add_option("--tol", tol, "tolerance");
  add_common(cmd_lower);

  auto* cmd_upper = app.add_subcommand("upper", "geometric-schedule upper bound");
  cmd_upper->add_option("--alpha", alpha, "profile coefficient")->check(CLI::PositiveNumber);
  cmd_upper->add_option("--c", c, "geometric parameter c");
  cmd_upper->add_option("--d", d, "geometric parameter d");
  cmd_upper->add_flag("--optimize", optimize, "search (c, d) instead of evaluating once");
  cmd_upper->add_option("--tol", tol, "series tolerance");
  add_common(cmd_upper);

  auto* cmd_stair = app.add_subcommand("staircase", "profile vs scheme fidelity rows");
  cmd_stair->add_option("--alpha", alpha, "profile coefficient")->check(CLI::PositiveNumber);
  cmd_stair->add_option("--c", stair_c, "geometric parameter c");
  cmd_stair->add_option("--d", stair_d, "geometric parameter d");
  cmd_stair->add_option("--layers", layers, "number of ladder layers K");
  cmd_stair->add_option("--qmax", q_max, "largest quality to tabulate (must be < K*Delta)");
  cmd_stair->add_option("--step", step, "quality grid step");
  cmd_stair->add_option("--format", stair_format, "output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd_stair->add_option("--out", out_path, "write output to this file instead of stdout");

  auto* cmd_lemma2 = app.add_subcommand("lemma2", "schedule feasibility inequality sweep");
  cmd_lemma2->add_option("--d", lemma2_d, "check a single d instead of the default grid");
  cmd_lemma2->add_option("--kmax", k_max, "largest k to check")->check(CLI::PositiveNumber);
  add_common(cmd_lemma2);

  auto* cmd_validate = app.add_subcommand("validate", "matrix/rate/mmse validation suites");
  cmd_validate->add_option("--suite", suite, "identities, rates, or mmse")
      ->check(CLI::IsMember({"identities", "rates", "mmse"}));
  cmd_validate->add_option("--seed", seed, "random seed");
  cmd_validate->add_option("--samples", samples, "Monte Carlo samples");
  add_common(cmd_validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    const bool want_csv = format == "csv";
    if (cmd_bounds->parsed() || cmd_table->parsed() || cmd_lower->parsed() ||
        cmd_upper->parsed() || cmd_lemma2->parsed() || cmd_validate->parsed()) {
      if (want_csv) {
        std::cerr << "usage error: csv output is only available for the staircase command\n";
        return 2;
      }
    }

    if (cmd_bounds->parsed()) return emit(edt::cli::cmd_bounds(alpha, tol), out_path, false);
    if (cmd_table->parsed()) return emit(edt::cli::cmd_table2(tol), out_path, false);
    if (cmd_lower->parsed()) return emit(edt::cli::cmd_lower(alpha, levels, tol), out_path, false);
    if (cmd_upper->parsed()) {
      auto progress = [](const std::string& line) { std::cerr << line << "\n"; };
      return emit(edt::cli::cmd_upper(alpha, c, d, optimize, tol, progress), out_path, false);
    }
    if (cmd_stair->parsed()) {
      const edt::cli::StaircaseConfig cfg{
          .alpha = alpha, .c = stair_c, .d = stair_d, .layers = layers, .q_max = q_max,
          .step = step};
      const bool stair_csv = stair_format == "csv";
      return emit(edt::cli::cmd_staircase(cfg, stair_csv), out_path, stair_csv);
    }
    if (cmd_lemma2->parsed()) {
      return emit(edt::cli::cmd_lemma2(k_max, lemma2_d), out_path, false);
    }
    if (cmd_validate->parsed()) {
      return emit(edt::cli::cmd_validate(suite, seed, samples), out_path, false);
    }
  } catch (const edt::numerics::convergence_error& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
