#pragma once

#include <cstdint>
#include <string>

#include "qtm/model.hpp"

namespace qtm {

// Machine description files are JSON:
//   {
//     "levels": [0.0, 0.3, 1.0],
//     "edges": [
//       {"from": 1, "to": 2, "kind": "bath", "bath": "cold"},
//       {"from": 2, "to": 3, "kind": "work"},
//       {"from": 3, "to": 1, "kind": "bath", "bath": "hot"}
//     ],
//     "lambda": 1e-08,
//     "baths": [
//       {"label": "cold", "T": 1.5, "gamma": 1e-06, "d": 1, "omega0": 1.0},
//       {"label": "hot",  "T": 3.0, "gamma": 1e-06, "d": 1, "omega0": 1.0}
//     ]
//   }
// Level indices are 1-based in files (0-based in memory). The non-leak edges
// must chain into the machine cycle in file order; at most one edge of kind
// "leak" may appear, anywhere in the list. Unknown keys are rejected.

// Parses a machine description; `context` prefixes error messages (file path).
MachineSpec parse_machine(const std::string& text, const std::string& context);

// Reads and parses the file at `path`.
MachineSpec load_machine(const std::string& path);

// Canonical serialized form: fixed key order, deterministic number rendering.
// load(render(spec)) reproduces spec exactly.
std::string render_canonical(const MachineSpec& spec);

void save_machine(const MachineSpec& spec, const std::string& path);

// FNV-1a 64-bit hash of the canonical form; hex string is 16 lowercase digits.
std::uint64_t machine_hash(const MachineSpec& spec);
std::string machine_hash_hex(const MachineSpec& spec);

}  // namespace qtm
