#pragma once

#include <string>

#include "bipolymer/bigraph.hpp"
#include "bipolymer/spin.hpp"

namespace bipolymer {

// Graphs and spin systems are stored as JSON objects:
//   graph:  {"n": 3, "delta": 3, "adj": [[3,4,5], ...]}      (2n lists)
//   system: {"q": 2, "B": [[1,1],[1,0]], "lambda": [1, 0.5]}
// "B" may also be given flat in row-major order. Malformed input raises
// PreconditionError.

std::string graph_to_json(const BipartiteRegularGraph& g);
BipartiteRegularGraph graph_from_json(const std::string& text);
BipartiteRegularGraph read_graph(const std::string& path);
void write_graph(const std::string& path, const BipartiteRegularGraph& g);

std::string system_to_json(const SpinSystem& system);
SpinSystem system_from_json(const std::string& text);
SpinSystem read_system(const std::string& path);

/// "hardcore:<lambda>", "colorings:<q>", "unconstrained:<q>", or a file path.
SpinSystem resolve_system(const std::string& spec);

}  // namespace bipolymer
