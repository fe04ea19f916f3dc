#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace bipolymer {

using Vertex = int;
using VertexSet = std::vector<Vertex>;  // sorted, no duplicates

/// Simple Δ-regular bipartite graph. L = [0, n), R = [n, 2n).
class BipartiteRegularGraph {
 public:
  /// Validates regularity, bipartiteness, simplicity and symmetry.
  BipartiteRegularGraph(int n, int degree, std::vector<std::vector<Vertex>> adjacency);

  int n() const { return n_; }
  int degree() const { return degree_; }
  int vertex_count() const { return 2 * n_; }
  bool is_left(Vertex v) const { return v < n_; }
  const std::vector<Vertex>& neighbors(Vertex v) const {
    return adjacency_[static_cast<std::size_t>(v)];
  }
  bool adjacent(Vertex u, Vertex v) const;
  const std::vector<std::vector<Vertex>>& adjacency() const { return adjacency_; }

 private:
  int n_;
  int degree_;
  std::vector<std::vector<Vertex>> adjacency_;  // each list sorted
};

enum class GraphModel {
  /// Union of Δ uniform perfect matchings, rejected until simple.
  kPermutationRejection,
  /// Double-edge switch chain from a circulant start; uniform in the limit.
  kSwitchChain,
  /// Rejection when it is feasible (Δ(Δ−1)/2 ≤ 6), switch chain otherwise.
  kAutomatic,
};

/// Random simple Δ-regular bipartite graph; deterministic in `seed`.
BipartiteRegularGraph generate(int n, int degree, std::uint64_t seed,
                               GraphModel model = GraphModel::kAutomatic);

/// ∂U: vertices outside U with a neighbour in U.
VertexSet boundary(const BipartiteRegularGraph& g, const VertexSet& u);

constexpr int kUnreachable = std::numeric_limits<int>::max();

/// BFS distance; kUnreachable if disconnected.
int graph_distance(const BipartiteRegularGraph& g, Vertex u, Vertex v);

/// Vertices at distance 1..radius from v, sorted.
VertexSet ball(const BipartiteRegularGraph& g, Vertex v, int radius);

/// Precomputed radius-r balls for every vertex (the "dist ≤ r" relation).
class DistanceIndex {
 public:
  DistanceIndex(const BipartiteRegularGraph& g, int radius);
  int radius() const { return radius_; }
  /// Vertices at distance 1..radius from v, sorted.
  const VertexSet& near(Vertex v) const { return balls_[static_cast<std::size_t>(v)]; }
  /// 1 ≤ dist(u, v) ≤ radius.
  bool within(Vertex u, Vertex v) const;

 private:
  int radius_;
  std::vector<VertexSet> balls_;
};

enum class ExpansionMode { kPlus, kBoundary };

struct ExpansionReport {
  ExpansionMode mode;
  int side_cap = 0;         // max |U∩L| and |U∩R|
  long long sets_checked = 0;
  double worst_ratio = 0.0; // +inf if no qualifying nonempty U
  double required_ratio = 0.0;
  bool holds = true;
};

/// Exhaustive small-set expansion check. kPlus: caps n/(3Δ), |U⁺|/|U| ≥ (Δ−1)/2.
/// kBoundary: caps n/(6Δ), |∂U|/|U| ≥ Δ/7. Requires 2n ≤ 24.
ExpansionReport check_expansion_smallsets(const BipartiteRegularGraph& g, ExpansionMode mode);

/// Binary entropy in bits, with H(0) = H(1) = 0.
double binary_entropy(double x);

/// Bassalygo's sufficient expansion condition
/// Δ > (H(a)+H(ab)) / (H(a) − ab·H(1/b)). Throws if the denominator is ≤ 0.
bool bassalygo_condition(int degree, double a, double b);

}  // namespace bipolymer
