// regtrace: scenario-driven verification runs for the regularized trace
// identities of even-order operators with cosine operator potentials.
//
// Exit codes: 0 success, 1 scenario/validation error, 2 numerical
// failure, 3 a verification identity failed.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "regtrace/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

struct Cli {
  std::string command;
  std::string scenario_path;
  std::string out_dir_override;
  int m_override = -1;
  int nodes_mult_override = -1;
};

int run(const Cli& cli) {
  regtrace::ScenarioFile sc = regtrace::parse_scenario_file(cli.scenario_path);
  if (cli.m_override > 0) sc.run.m_override = cli.m_override;
  if (cli.nodes_mult_override > 0) sc.run.nodes_mult = cli.nodes_mult_override;
  if (!cli.out_dir_override.empty()) sc.run.out_dir = cli.out_dir_override;

  regtrace::Pipeline pipeline(sc.model, sc.run);
  const fs::path out_dir(sc.run.out_dir);

  if (cli.command == "validate") {
    std::cout << pipeline.validate_summary();
    return 0;
  }
  if (cli.command == "assemble") {
    std::cout << pipeline.validate_summary() << pipeline.assemble_summary();
    return 0;
  }
  if (cli.command == "trace1") {
    write_file(out_dir / "ledger_trace1.csv", pipeline.ledger_trace1_csv());
    std::cout << "rhs_first = " << regtrace::format_double(pipeline.rhs1()) << "\n";
    for (const auto& row : pipeline.cut_rows())
      std::cout << "p=" << row.p << " n_p=" << row.n_p
                << " lhs1=" << regtrace::format_double(row.lhs1)
                << " err1=" << regtrace::format_double(row.err1) << "\n";
    std::cout << "wrote " << (out_dir / "ledger_trace1.csv").string() << "\n";
    return 0;
  }
  if (cli.command == "trace2") {
    write_file(out_dir / "ledger_trace2.csv", pipeline.ledger_trace2_csv());
    std::cout << "rhs_second = " << regtrace::format_double(pipeline.rhs2()) << "\n";
    for (const auto& row : pipeline.cut_rows())
      std::cout << "p=" << row.p << " n_p=" << row.n_p
                << " lhs2=" << regtrace::format_double(row.lhs2)
                << " err2=" << regtrace::format_double(row.err2)
                << " remainder=" << regtrace::format_double(row.remainder) << "\n";
    std::cout << "wrote " << (out_dir / "ledger_trace2.csv").string() << "\n";
    return 0;
  }
  if (cli.command == "checks") {
    write_file(out_dir / "checks.csv", pipeline.checks_csv());
    int failed = 0;
    for (const auto& c : pipeline.checks()) {
      if (!c.pass) ++failed;
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name
                << " measured=" << regtrace::format_double(c.measured)
                << " tol=" << regtrace::format_double(c.tolerance) << "\n";
    }
    std::cout << "wrote " << (out_dir / "checks.csv").string() << "\n";
    return failed == 0 ? 0 : 3;
  }
  if (cli.command == "asymptotics") {
    write_file(out_dir / "weyl.csv", pipeline.weyl_csv());
    const auto& w = pipeline.weyl();
    if (w.computed) {
      std::cout << "mu_slope=" << regtrace::format_double(w.mu_fit.slope)
                << " lambda_slope=" << regtrace::format_double(w.lambda_fit.slope)
                << " target_beta=" << regtrace::format_double(w.target_beta) << "\n";
    } else {
      std::cout << "extended spectrum too short for a fit\n";
    }
    std::cout << "wrote " << (out_dir / "weyl.csv").string() << "\n";
    return 0;
  }
  if (cli.command == "report") {
    write_file(out_dir / "ledger_trace1.csv", pipeline.ledger_trace1_csv());
    write_file(out_dir / "ledger_trace2.csv", pipeline.ledger_trace2_csv());
    write_file(out_dir / "checks.csv", pipeline.checks_csv());
    write_file(out_dir / "weyl.csv", pipeline.weyl_csv());
    write_file(out_dir / "report.json", pipeline.report_json());
    std::cout << "wrote " << (out_dir / "report.json").string() << "\n";
    return pipeline.checks_pass() ? 0 : 3;
  }
  throw regtrace::ValidationError("unknown command: " + cli.command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical verification of regularized trace identities"};
  app.require_subcommand(1);

  Cli cli;
  const std::vector<std::string> commands = {"validate",    "assemble", "trace1", "trace2",
                                             "checks",      "asymptotics", "report"};
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--scenario", cli.scenario_path, "scenario file")->required();
    sub->add_option("--out", cli.out_dir_override, "output directory override");
    sub->add_option("--m", cli.m_override, "series cutoff override (>= 2)");
    sub->add_option("--nodes-mult", cli.nodes_mult_override,
                    "quadrature node multiplier override");
    sub->callback([&cli, name]() { cli.command = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return run(cli);
  } catch (const regtrace::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const regtrace::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
