// Command-line interface for the cyclic thermal machine toolkit.
//
// Subcommands: validate, solve, emulate, compare, sweep. Exit codes:
//   0 success, 2 configuration error, 3 solver failure, 4 unsupported topology.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtm/analysis.hpp"
#include "qtm/config_io.hpp"
#include "qtm/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitTopology = 4;

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw qtm::ConfigError(out_path + ": cannot open output file");
  out << content;
  if (!out) throw qtm::ConfigError(out_path + ": write failed");
}

qtm::SweepGrid parse_sweep_spec(const std::string& text) {
  qtm::SweepGrid grid;
  if (text.empty()) return grid;
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    const auto colon = text.find(':', start);
    parts.push_back(text.substr(start, colon == std::string::npos ? colon : colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 4)
    throw qtm::ConfigError("--sweep expects parameter:min:max:count, got '" + text + "'");
  grid.parameter = qtm::parse_sweep_parameter(parts[0]);
  try {
    std::size_t used = 0;
    grid.min = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    grid.max = std::stod(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
    grid.count = std::stoi(parts[3], &used);
    if (used != parts[3].size()) throw std::invalid_argument(parts[3]);
  } catch (const std::exception&) {
    throw qtm::ConfigError("--sweep has a malformed numeric field in '" + text + "'");
  }
  return grid;
}

// The machine argument of `compare` may come in either order; the four-level
// machine is the one with the standard layout.
std::pair<qtm::MachineSpec, qtm::MachineSpec> order_compare_pair(
    const qtm::MachineSpec& a, const qtm::MachineSpec& b) {
  try {
    qtm::extract_four_level_params(b);
    return {a, b};
  } catch (const qtm::ConfigError&) {
    qtm::extract_four_level_params(a);  // throws if neither machine qualifies
    return {b, a};
  }
}

struct Options {
  std::vector<std::string> machines;
  std::string out_path;
  std::string format;
  std::string sweep_spec;
  double separation_factor = 10.0;
};

int run_command(const std::string& command, const Options& opt) {
  using namespace qtm;
  if (command == "validate") {
    const MachineSpec spec = load_machine(opt.machines.at(0));
    const ValidationReport report = validate_spec(spec, opt.separation_factor);
    write_output(opt.out_path, render_validate_text(spec, report));
    return kExitOk;
  }
  if (command == "solve") {
    const MachineSpec spec = load_machine(opt.machines.at(0));
    const SolveOutput out = run_solve(spec);
    write_output(opt.out_path,
                 opt.format == "csv" ? render_solve_csv(out) : render_solve_text(out));
    return kExitOk;
  }
  if (command == "emulate") {
    const MachineSpec spec = load_machine(opt.machines.at(0));
    const EmulateOutput out = run_emulate(spec);
    write_output(opt.out_path,
                 opt.format == "csv" ? render_emulate_csv(out) : render_emulate_text(out));
    return kExitOk;
  }
  if (command == "compare") {
    MachineSpec benchmark, machine;
    if (opt.machines.size() == 1) {
      machine = load_machine(opt.machines[0]);
      benchmark = derive_benchmark(machine);
    } else {
      const MachineSpec a = load_machine(opt.machines[0]);
      const MachineSpec b = load_machine(opt.machines[1]);
      std::tie(benchmark, machine) = order_compare_pair(a, b);
    }
    const CompareOutput out = run_compare(benchmark, machine);
    write_output(opt.out_path,
                 opt.format == "csv" ? render_compare_csv(out) : render_compare_text(out));
    return kExitOk;
  }
  // sweep
  const MachineSpec machine = load_machine(opt.machines.at(0));
  const SweepGrid grid = parse_sweep_spec(opt.sweep_spec);
  const SweepResult result = sweep(machine, grid);
  const std::uint64_t hash4 = machine_hash(machine);
  const std::uint64_t hash3 = machine_hash(derive_benchmark(machine));
  write_output(opt.out_path, opt.format == "text"
                                 ? render_sweep_text(result)
                                 : render_sweep_csv(hash4, hash3, result));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cyclic quantum thermal machines: steady states, classical "
               "emulators, and cycle-resolved heat currents"};
  app.require_subcommand(1);
  Options opt;

  auto add_machine = [&](CLI::App* sub, int max_count) {
    sub->add_option("--machine", opt.machines, "machine description file")
        ->required()
        ->expected(1, max_count);
  };
  auto add_common = [&](CLI::App* sub, const std::string& default_format) {
    opt.format = default_format;
    sub->add_option("--out", opt.out_path, "output file (default: stdout)");
    sub->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "text"}));
  };

  CLI::App* validate = app.add_subcommand("validate", "check a machine description "
                                          "and its time-scale separation");
  add_machine(validate, 1);
  validate->add_option("--separation-factor", opt.separation_factor,
                       "required ratio between ordered time scales")
      ->check(CLI::PositiveNumber);
  validate->add_option("--out", opt.out_path, "output file (default: stdout)");

  CLI::App* solve = app.add_subcommand("solve", "stationary quantum state and "
                                       "thermodynamic bookkeeping");
  add_machine(solve, 1);
  add_common(solve, "text");

  CLI::App* emulate = app.add_subcommand("emulate", "classical stochastic emulator "
                                         "and cycle-resolved currents");
  add_machine(emulate, 1);
  add_common(emulate, "text");

  CLI::App* compare = app.add_subcommand("compare", "four-level machine against its "
                                         "three-level benchmark (one or two machines)");
  add_machine(compare, 2);
  add_common(compare, "text");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "comparison along a parameter grid");
  add_machine(sweep_cmd, 1);
  sweep_cmd->add_option("--sweep", opt.sweep_spec,
                        "parameter:min:max:count (parameter in {epsilon, X_eps, lambda, "
                        "gamma_h, omega_c}; default X_eps:-1:1:201)");
  add_common(sweep_cmd, "csv");

  std::string command;
  try {
    app.parse(argc, argv);
    command = app.get_subcommands().at(0)->get_name();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    return run_command(command, opt);
  } catch (const qtm::TopologyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTopology;
  } catch (const qtm::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qtm::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitSolver;
  }
}
