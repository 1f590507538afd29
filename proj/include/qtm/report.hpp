#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qtm/analysis.hpp"
#include "qtm/emulator.hpp"
#include "qtm/graph.hpp"
#include "qtm/lindblad.hpp"
#include "qtm/model.hpp"

namespace qtm {

inline constexpr char kToolVersion[] = "0.1.0";

// Deterministic rendering: 17 significant digits, C locale, stable
// "nan"/"inf" spellings. Identical inputs give byte-identical output.
std::string format_number(double x);

struct SolveOutput {
  std::uint64_t hash = 0;
  int levels = 0;
  std::vector<double> populations;
  double coherence_imag = 0;  // work-edge off-diagonal, imaginary part
  ThermoReport report;
  double first_law_residual = 0;  // |Qc + Qh + P| / max magnitude
};

SolveOutput run_solve(const MachineSpec& spec);
std::string render_solve_text(const SolveOutput& out);
std::string render_solve_csv(const SolveOutput& out);

struct EmulateOutput {
  std::uint64_t hash = 0;
  int levels = 0;
  BalanceCertificate certificate;
  std::vector<double> populations;
  std::vector<double> fluxes;  // per cycle edge, stored direction
  CurrentDecomposition<Real> currents;
  double denominator = 0;
  long tree_count = 0;
  double work_rate = 0;
  double damping = 0;
};

EmulateOutput run_emulate(const MachineSpec& spec);
std::string render_emulate_text(const EmulateOutput& out);
std::string render_emulate_csv(const EmulateOutput& out);

struct CompareOutput {
  std::uint64_t hash_benchmark = 0;
  std::uint64_t hash_machine = 0;
  ComparisonPoint point;
};

CompareOutput run_compare(const MachineSpec& spec3, const MachineSpec& spec4);
std::string render_compare_text(const CompareOutput& out);
std::string render_compare_csv(const CompareOutput& out);

std::string render_sweep_csv(std::uint64_t hash_machine, std::uint64_t hash_benchmark,
                             const SweepResult& result);
std::string render_sweep_text(const SweepResult& result);

std::string render_validate_text(const MachineSpec& spec, const ValidationReport& report);

}  // namespace qtm
