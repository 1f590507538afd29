#include "qtm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "qtm/config_io.hpp"

namespace qtm {

namespace {

std::string sanitize(const std::string& text) {
  std::string out = text;
  for (char& c : out)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return out;
}

const char* flag(bool b) { return b ? "1" : "0"; }

constexpr char kSweepHeader[] =
    "value,X_eps,R,A,D,AD,cop3,cop4,cop_ratio,Qc3,Qc4,P3,P4,"
    "coherence3,coherence4,in_window3,in_window4,secular_ok,approx_valid,ok,error";

std::string point_row(const ComparisonPoint& p) {
  std::ostringstream os;
  os << format_number(p.value) << ',' << format_number(p.x_eps) << ','
     << format_number(p.ratio) << ',' << format_number(p.a_factor) << ','
     << format_number(p.d_factor) << ',' << format_number(p.ad) << ','
     << format_number(p.cop3) << ',' << format_number(p.cop4) << ','
     << format_number(p.cop_ratio) << ',' << format_number(p.qc3) << ','
     << format_number(p.qc4) << ',' << format_number(p.p3) << ','
     << format_number(p.p4) << ',' << format_number(p.coherence3) << ','
     << format_number(p.coherence4) << ',' << flag(p.in_window3) << ','
     << flag(p.in_window4) << ',' << flag(p.secular_ok) << ','
     << flag(p.approx_valid) << ',' << flag(p.ok) << ',' << sanitize(p.error);
  return os.str();
}

std::string hash_hex(std::uint64_t h) {
  static const char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string tool_line() { return std::string("# tool: qtm ") + kToolVersion + "\n"; }

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

SolveOutput run_solve(const MachineSpec& spec) {
  SolveOutput out;
  out.hash = machine_hash(spec);
  out.levels = spec.num_levels;
  const CMatrix rho = steady_state(build_generator<Real>(spec));
  for (int i = 0; i < spec.num_levels; ++i)
    out.populations.push_back(double(rho(i, i).real()));
  const CycleEdge& work = spec.cycle[work_edge_index(spec)];
  out.coherence_imag = double(rho(work.from, work.to).imag());
  out.report = thermo_report(spec, rho);
  const Real sum = out.report.heat_cold + out.report.heat_hot + out.report.power;
  const Real scale = std::max({std::abs(out.report.heat_cold),
                               std::abs(out.report.heat_hot), std::abs(out.report.power)});
  out.first_law_residual = scale > 0 ? double(std::abs(sum) / scale) : 0.0;
  return out;
}

std::string render_solve_text(const SolveOutput& out) {
  std::ostringstream os;
  os << "qtm " << kToolVersion << " steady-state solve\n";
  os << "machine: " << hash_hex(out.hash) << "\n";
  os << "levels: " << out.levels << "\n";
  os << "mode: " << mode_name(out.report.mode) << "\n";
  for (std::size_t i = 0; i < out.populations.size(); ++i)
    os << "p" << i + 1 << ": " << format_number(out.populations[i]) << "\n";
  os << "work-edge coherence (imag): " << format_number(out.coherence_imag) << "\n";
  os << "coherence l1: " << format_number(double(out.report.coherence)) << "\n";
  os << "heat current (cold): " << format_number(double(out.report.heat_cold)) << "\n";
  os << "heat current (hot): " << format_number(double(out.report.heat_hot)) << "\n";
  os << "power: " << format_number(double(out.report.power)) << "\n";
  os << "drive flux: " << format_number(double(out.report.flux)) << "\n";
  os << "entropy production: " << format_number(double(out.report.entropy_rate)) << "\n";
  os << "cop: " << (out.report.cop ? format_number(double(*out.report.cop)) : "n/a") << "\n";
  os << "first-law residual: " << format_number(out.first_law_residual) << "\n";
  return os.str();
}

std::string render_solve_csv(const SolveOutput& out) {
  std::ostringstream os;
  os << tool_line() << "# machine: " << hash_hex(out.hash) << "\n";
  os << "levels,mode,Qc,Qh,P,flux,sigma,coherence,cop,first_law_residual";
  for (std::size_t i = 0; i < out.populations.size(); ++i) os << ",p" << i + 1;
  os << "\n";
  os << out.levels << ',' << mode_name(out.report.mode) << ','
     << format_number(double(out.report.heat_cold)) << ','
     << format_number(double(out.report.heat_hot)) << ','
     << format_number(double(out.report.power)) << ','
     << format_number(double(out.report.flux)) << ','
     << format_number(double(out.report.entropy_rate)) << ','
     << format_number(double(out.report.coherence)) << ','
     << format_number(out.report.cop ? double(*out.report.cop)
                                     : std::numeric_limits<double>::quiet_NaN())
     << ',' << format_number(out.first_law_residual);
  for (const double p : out.populations) os << ',' << format_number(p);
  os << "\n";
  return os.str();
}

EmulateOutput run_emulate(const MachineSpec& spec) {
  EmulateOutput out;
  out.hash = machine_hash(spec);
  out.levels = spec.num_levels;
  const RealMatrix w = build_rate_matrix<Real>(spec);
  out.certificate = certify_balance(spec, w);
  const RealVector p = classical_steady_state(w);
  for (int i = 0; i < spec.num_levels; ++i) out.populations.push_back(double(p(i)));
  for (const Real f : edge_fluxes(spec, w, p)) out.fluxes.push_back(double(f));
  const RateGraph<Real> graph = from_rate_matrix(spec, w);
  out.currents = circuit_currents(graph);
  out.denominator = double(out.currents.denominator);
  out.tree_count = spanning_tree_count(graph);
  out.work_rate = double(work_edge_rate<Real>(spec));
  out.damping = double(coherence_damping<Real>(spec));
  return out;
}

std::string render_emulate_text(const EmulateOutput& out) {
  std::ostringstream os;
  os << "qtm " << kToolVersion << " classical emulator\n";
  os << "machine: " << hash_hex(out.hash) << "\n";
  os << "levels: " << out.levels << "\n";
  os << "balance certificate: " << (out.certificate.ok ? "ok" : "FAILED") << "\n";
  os << "  worst column sum: " << format_number(double(out.certificate.worst_column_sum))
     << "\n";
  os << "  worst detailed balance: "
     << format_number(double(out.certificate.worst_detailed_balance)) << "\n";
  os << "  worst channel mismatch: "
     << format_number(double(out.certificate.worst_reconstruction)) << "\n";
  for (const std::string& v : out.certificate.violations) os << "  violation: " << v << "\n";
  os << "coherence damping: " << format_number(out.damping) << "\n";
  os << "work-edge rate: " << format_number(out.work_rate) << "\n";
  for (std::size_t i = 0; i < out.populations.size(); ++i)
    os << "p" << i + 1 << ": " << format_number(out.populations[i]) << "\n";
  for (std::size_t i = 0; i < out.fluxes.size(); ++i)
    os << "edge flux " << i + 1 << ": " << format_number(out.fluxes[i]) << "\n";
  os << "spanning trees: " << out.tree_count << "\n";
  os << "denominator: " << format_number(out.denominator) << "\n";
  for (const auto& c : out.currents.circuits) {
    os << "circuit " << c.name << ":\n";
    os << "  flux: " << format_number(double(c.flux)) << "\n";
    os << "  force cold: " << format_number(double(c.force_cold)) << "\n";
    os << "  force hot: " << format_number(double(c.force_hot)) << "\n";
    os << "  heat cold: " << format_number(double(c.heat_cold)) << "\n";
    os << "  heat hot: " << format_number(double(c.heat_hot)) << "\n";
    os << "  power: " << format_number(double(c.power)) << "\n";
  }
  os << "heat current (cold): " << format_number(double(out.currents.heat_cold)) << "\n";
  os << "heat current (hot): " << format_number(double(out.currents.heat_hot)) << "\n";
  os << "power: " << format_number(double(out.currents.power)) << "\n";
  return os.str();
}

std::string render_emulate_csv(const EmulateOutput& out) {
  std::ostringstream os;
  os << tool_line() << "# machine: " << hash_hex(out.hash) << "\n";
  os << "levels,certified,Qc,Qh,P,denominator,trees,work_rate,damping";
  for (std::size_t i = 0; i < out.populations.size(); ++i) os << ",p" << i + 1;
  for (std::size_t i = 0; i < out.fluxes.size(); ++i) os << ",J" << i + 1;
  os << "\n";
  os << out.levels << ',' << flag(out.certificate.ok) << ','
     << format_number(double(out.currents.heat_cold)) << ','
     << format_number(double(out.currents.heat_hot)) << ','
     << format_number(double(out.currents.power)) << ','
     << format_number(out.denominator) << ',' << out.tree_count << ','
     << format_number(out.work_rate) << ',' << format_number(out.damping);
  for (const double p : out.populations) os << ',' << format_number(p);
  for (const double f : out.fluxes) os << ',' << format_number(f);
  os << "\n";
  return os.str();
}

CompareOutput run_compare(const MachineSpec& spec3, const MachineSpec& spec4) {
  CompareOutput out;
  out.hash_benchmark = machine_hash(spec3);
  out.hash_machine = machine_hash(spec4);
  out.point = compare_machines(spec3, spec4);
  return out;
}

std::string render_compare_text(const CompareOutput& out) {
  const ComparisonPoint& p = out.point;
  std::ostringstream os;
  os << "qtm " << kToolVersion << " machine comparison\n";
  os << "machine: " << hash_hex(out.hash_machine) << "\n";
  os << "benchmark: " << hash_hex(out.hash_benchmark) << "\n";
  os << "eps: " << format_number(p.eps) << "\n";
  os << "X_eps: " << format_number(p.x_eps) << "\n";
  os << "cooling ratio R: " << format_number(p.ratio) << "\n";
  os << "A factor: " << format_number(p.a_factor) << "\n";
  os << "D factor: " << format_number(p.d_factor) << "\n";
  os << "A*D: " << format_number(p.ad) << "\n";
  os << "cop (benchmark): " << format_number(p.cop3) << "\n";
  os << "cop (machine): " << format_number(p.cop4) << "\n";
  os << "cop ratio (tight coupling): " << format_number(p.cop_ratio) << "\n";
  os << "Qc (benchmark): " << format_number(p.qc3) << "\n";
  os << "Qc (machine): " << format_number(p.qc4) << "\n";
  os << "P (benchmark): " << format_number(p.p3) << "\n";
  os << "P (machine): " << format_number(p.p4) << "\n";
  os << "coherence (benchmark): " << format_number(p.coherence3) << "\n";
  os << "coherence (machine): " << format_number(p.coherence4) << "\n";
  os << "in cooling window: benchmark " << flag(p.in_window3) << ", machine "
     << flag(p.in_window4) << "\n";
  os << "time scales ok: " << flag(p.secular_ok) << "\n";
  os << "weak-drive premise ok: " << flag(p.approx_valid) << "\n";
  return os.str();
}

std::string render_compare_csv(const CompareOutput& out) {
  std::ostringstream os;
  os << tool_line() << "# machine: " << hash_hex(out.hash_machine) << "\n"
     << "# benchmark: " << hash_hex(out.hash_benchmark) << "\n"
     << kSweepHeader << "\n"
     << point_row(out.point) << "\n";
  return os.str();
}

std::string render_sweep_csv(std::uint64_t hash_machine, std::uint64_t hash_benchmark,
                             const SweepResult& result) {
  std::ostringstream os;
  os << tool_line() << "# machine: " << hash_hex(hash_machine) << "\n"
     << "# benchmark: " << hash_hex(hash_benchmark) << "\n"
     << "# sweep: parameter=" << sweep_parameter_name(result.grid.parameter)
     << " min=" << format_number(result.grid.min) << " max=" << format_number(result.grid.max)
     << " count=" << result.grid.count << "\n"
     << kSweepHeader << "\n";
  for (const ComparisonPoint& p : result.points) os << point_row(p) << "\n";
  return os.str();
}

std::string render_sweep_text(const SweepResult& result) {
  std::ostringstream os;
  os << "qtm " << kToolVersion << " sweep over " << sweep_parameter_name(result.grid.parameter)
     << " [" << format_number(result.grid.min) << ", " << format_number(result.grid.max)
     << "], " << result.grid.count << " points\n";
  for (const ComparisonPoint& p : result.points) {
    os << sweep_parameter_name(result.grid.parameter) << "=" << format_number(p.value);
    if (!p.ok) {
      os << "  FAILED: " << p.error << "\n";
      continue;
    }
    os << "  R=" << format_number(p.ratio) << "  A*D=" << format_number(p.ad)
       << "  Qc4=" << format_number(p.qc4) << "  cop_ratio=" << format_number(p.cop_ratio)
       << "  window=" << flag(p.in_window4) << "\n";
  }
  return os.str();
}

std::string render_validate_text(const MachineSpec& spec, const ValidationReport& report) {
  std::ostringstream os;
  os << "qtm " << kToolVersion << " validation\n";
  os << "machine: " << machine_hash_hex(spec) << "\n";
  os << "levels: " << spec.num_levels << "\n";
  os << "separation factor: " << format_number(report.separation_factor) << "\n";
  os << "tau_bath: " << format_number(double(report.tau_bath)) << "\n";
  os << "tau_system: " << format_number(double(report.tau_system)) << "\n";
  os << "tau_dissipation: " << format_number(double(report.tau_dissipation)) << "\n";
  os << "tau_drive: " << format_number(double(report.tau_drive)) << "\n";
  os << "time scales ok: " << flag(report.ok) << "\n";
  for (const std::string& w : report.warnings) os << "warning: " << w << "\n";
  return os.str();
}

}  // namespace qtm
