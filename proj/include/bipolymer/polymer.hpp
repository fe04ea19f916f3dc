#pragma once

#include <compare>
#include <cstdint>
#include <utility>
#include <vector>

#include "bipolymer/bigraph.hpp"
#include "bipolymer/spin.hpp"

namespace bipolymer {

/// Relation under which a polymer's vertex set must be connected.
enum class Connectivity {
  /// u ~ v iff 1 ≤ dist(u,v) ≤ 3: the exact complement of compatibility.
  kRadius3,
  /// u ~ v iff 1 ≤ dist(u,v) ≤ 2. Kept for comparison only.
  kRadius2,
};

inline int radius_of(Connectivity c) { return c == Connectivity::kRadius3 ? 3 : 2; }

/// Polymers at distance ≤ this are incompatible.
constexpr int kCompatibilityRadius = 3;

struct Polymer {
  VertexSet vertices;     // sorted
  std::vector<int> spins; // spins[k] is the spin of vertices[k]

  int size() const { return static_cast<int>(vertices.size()); }
  auto operator<=>(const Polymer&) const = default;
};

struct WeightedPolymer {
  Polymer polymer;
  double weight = 0.0;
};

struct PolymerConfiguration {
  std::vector<Polymer> polymers;

  int vertex_count() const;
};

/// Canonical identity of a configuration: its (vertex, spin) pairs sorted by
/// vertex. Configurations decompose uniquely into polymers, so this is exact.
using ConfigurationKey = std::vector<std::pair<Vertex, int>>;
ConfigurationKey configuration_key(const PolymerConfiguration& config);

/// floor(n/(6Δ)).
int size_cap(int n, int degree);

/// Connected components of `vertices` under the given relation, each sorted,
/// ordered by smallest member.
std::vector<VertexSet> components(const BipartiteRegularGraph& g, const VertexSet& vertices,
                                  Connectivity connectivity = Connectivity::kRadius3);

/// Checks the Polymer invariants for biclique `bc`; throws PreconditionError.
/// `cap` < 0 skips the size check.
void validate_polymer(const BipartiteRegularGraph& g, const SpinSystem& system, const Biclique& bc,
                      const Polymer& polymer, int cap = -1,
                      Connectivity connectivity = Connectivity::kRadius3);

/// ln w(γ); −∞ when the weight is zero.
double polymer_log_weight(const BipartiteRegularGraph& g, const SpinSystem& system,
                          const Biclique& bc, const Polymer& polymer);

/// w(γ) from the product formula; exact product for |γ| ≤ 8, via logs above.
double polymer_weight(const BipartiteRegularGraph& g, const SpinSystem& system, const Biclique& bc,
                      const Polymer& polymer);

/// dist(γ1, γ2) > 3.
bool are_compatible(const BipartiteRegularGraph& g, const Polymer& a, const Polymer& b);
/// Same, using a precomputed index of radius ≥ 3.
bool are_compatible(const DistanceIndex& index, const Polymer& a, const Polymer& b);

double configuration_weight(const BipartiteRegularGraph& g, const SpinSystem& system,
                            const Biclique& bc, const PolymerConfiguration& config);

struct EnumerationOptions {
  Connectivity connectivity = Connectivity::kRadius3;
  long long budget = 10'000'000;  // partial states (vertex sets + labelings)
};

/// Every positive-weight polymer containing v with |V_γ| ≤ kmax, sorted by
/// (vertices, spins). Throws BudgetExceeded past the budget.
std::vector<WeightedPolymer> enumerate_polymers_at(const BipartiteRegularGraph& g,
                                                   const SpinSystem& system, const Biclique& bc,
                                                   Vertex v, int kmax,
                                                   const EnumerationOptions& options = {});

/// All positive-weight polymers with |V_γ| ≤ kmax, plus a per-vertex index.
struct PolymerCatalog {
  int kmax = 0;
  std::vector<WeightedPolymer> polymers;       // sorted by (vertices, spins)
  std::vector<std::vector<int>> containing;    // vertex → indices into polymers
};

/// Parallel over root vertices; identical output to the serial build.
PolymerCatalog build_catalog(const BipartiteRegularGraph& g, const SpinSystem& system,
                             const Biclique& bc, int kmax, const EnumerationOptions& options = {});
PolymerCatalog build_catalog_serial(const BipartiteRegularGraph& g, const SpinSystem& system,
                                    const Biclique& bc, int kmax,
                                    const EnumerationOptions& options = {});

}  // namespace bipolymer
