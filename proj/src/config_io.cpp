#include "qtm/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qtm {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw ConfigError(context + ": " + what);
}

const ordered_json& require_key(const ordered_json& j, const char* key,
                                const std::string& context) {
  const auto it = j.find(key);
  if (it == j.end()) fail(context, std::string("missing key '") + key + "'");
  return *it;
}

double require_number(const ordered_json& j, const char* key, const std::string& context) {
  const ordered_json& v = require_key(j, key, context);
  if (!v.is_number()) fail(context + "." + key, "expected a number");
  return v.get<double>();
}

int require_integer(const ordered_json& j, const char* key, const std::string& context) {
  const ordered_json& v = require_key(j, key, context);
  if (!v.is_number_integer()) fail(context + "." + key, "expected an integer");
  return v.get<int>();
}

std::string require_string(const ordered_json& j, const char* key,
                           const std::string& context) {
  const ordered_json& v = require_key(j, key, context);
  if (!v.is_string()) fail(context + "." + key, "expected a string");
  return v.get<std::string>();
}

void reject_unknown_keys(const ordered_json& j, const std::set<std::string>& allowed,
                         const std::string& context) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(context, "unknown key '" + it.key() + "'");
}

int level_index(int one_based, int num_levels, const std::string& context) {
  if (one_based < 1 || one_based > num_levels)
    fail(context, "level index " + std::to_string(one_based) + " is out of range 1.." +
                      std::to_string(num_levels));
  return one_based - 1;
}

}  // namespace

MachineSpec parse_machine(const std::string& text, const std::string& context) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(context, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(context, "top level must be an object");
  reject_unknown_keys(j, {"levels", "edges", "lambda", "baths"}, context);

  MachineSpec spec;
  const ordered_json& levels = require_key(j, "levels", context);
  if (!levels.is_array() || levels.empty()) fail(context + ".levels", "expected a non-empty array");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!levels[i].is_number())
      fail(context + ".levels[" + std::to_string(i + 1) + "]", "expected a number");
    spec.energies.push_back(levels[i].get<double>());
  }
  spec.num_levels = static_cast<int>(spec.energies.size());

  spec.lambda = require_number(j, "lambda", context);

  const ordered_json& baths = require_key(j, "baths", context);
  if (!baths.is_array()) fail(context + ".baths", "expected an array");
  for (std::size_t i = 0; i < baths.size(); ++i) {
    const std::string ctx = context + ".baths[" + std::to_string(i + 1) + "]";
    const ordered_json& b = baths[i];
    if (!b.is_object()) fail(ctx, "expected an object");
    reject_unknown_keys(b, {"label", "T", "gamma", "d", "omega0"}, ctx);
    BathParams bath;
    bath.label = require_string(b, "label", ctx);
    bath.temperature = require_number(b, "T", ctx);
    bath.dissipation_rate = require_number(b, "gamma", ctx);
    bath.dimension = require_integer(b, "d", ctx);
    bath.reference_frequency = require_number(b, "omega0", ctx);
    spec.baths.push_back(bath);
  }

  const ordered_json& edges = require_key(j, "edges", context);
  if (!edges.is_array()) fail(context + ".edges", "expected an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string ctx = context + ".edges[" + std::to_string(i + 1) + "]";
    const ordered_json& e = edges[i];
    if (!e.is_object()) fail(ctx, "expected an object");
    reject_unknown_keys(e, {"from", "to", "kind", "bath"}, ctx);
    CycleEdge edge;
    edge.from = level_index(require_integer(e, "from", ctx), spec.num_levels, ctx + ".from");
    edge.to = level_index(require_integer(e, "to", ctx), spec.num_levels, ctx + ".to");
    const std::string kind = require_string(e, "kind", ctx);
    if (kind == "work") {
      edge.kind = EdgeKind::Work;
      if (e.contains("bath")) fail(ctx, "a work edge must not name a bath");
      spec.cycle.push_back(edge);
    } else if (kind == "bath") {
      edge.kind = EdgeKind::Bath;
      edge.bath = require_string(e, "bath", ctx);
      spec.cycle.push_back(edge);
    } else if (kind == "leak") {
      edge.kind = EdgeKind::Bath;
      edge.bath = require_string(e, "bath", ctx);
      if (spec.leak.has_value()) fail(ctx, "at most one leak edge is allowed");
      spec.leak = edge;
    } else {
      fail(ctx + ".kind", "expected \"bath\", \"work\", or \"leak\"");
    }
  }

  try {
    validate_structure(spec);
  } catch (const ConfigError& e) {
    fail(context, e.what());
  }
  return spec;
}

MachineSpec load_machine(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_machine(buffer.str(), path);
}

std::string render_canonical(const MachineSpec& spec) {
  ordered_json j;
  j["levels"] = spec.energies;
  ordered_json edges = ordered_json::array();
  for (const CycleEdge& e : spec.cycle) {
    ordered_json edge;
    edge["from"] = e.from + 1;
    edge["to"] = e.to + 1;
    edge["kind"] = e.kind == EdgeKind::Work ? "work" : "bath";
    if (e.kind == EdgeKind::Bath) edge["bath"] = e.bath;
    edges.push_back(edge);
  }
  if (spec.leak.has_value()) {
    ordered_json edge;
    edge["from"] = spec.leak->from + 1;
    edge["to"] = spec.leak->to + 1;
    edge["kind"] = "leak";
    edge["bath"] = spec.leak->bath;
    edges.push_back(edge);
  }
  j["edges"] = edges;
  j["lambda"] = spec.lambda;
  ordered_json baths = ordered_json::array();
  for (const BathParams& b : spec.baths) {
    ordered_json bath;
    bath["label"] = b.label;
    bath["T"] = b.temperature;
    bath["gamma"] = b.dissipation_rate;
    bath["d"] = b.dimension;
    bath["omega0"] = b.reference_frequency;
    baths.push_back(bath);
  }
  j["baths"] = baths;
  return j.dump(2) + "\n";
}

void save_machine(const MachineSpec& spec, const std::string& path) {
  validate_structure(spec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path + ": cannot open file for writing");
  out << render_canonical(spec);
  if (!out) throw ConfigError(path + ": write failed");
}

std::uint64_t machine_hash(const MachineSpec& spec) {
  const std::string canonical = render_canonical(spec);
  std::uint64_t hash = 1469598103934665603ull;  // FNV-1a 64 offset basis
  for (const unsigned char c : canonical) {
    hash ^= c;
    hash *= 1099511628211ull;  // FNV prime
  }
  return hash;
}

std::string machine_hash_hex(const MachineSpec& spec) {
  static const char digits[] = "0123456789abcdef";
  std::uint64_t h = machine_hash(spec);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace qtm
