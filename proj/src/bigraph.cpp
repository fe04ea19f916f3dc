#include "bipolymer/bigraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include "bipolymer/errors.hpp"

namespace bipolymer {

BipartiteRegularGraph::BipartiteRegularGraph(int n, int degree,
                                             std::vector<std::vector<Vertex>> adjacency)
    : n_(n), degree_(degree), adjacency_(std::move(adjacency)) {
  if (n < 1 || degree < 0) throw PreconditionError("graph needs n >= 1 and degree >= 0");
  if (adjacency_.size() != static_cast<std::size_t>(2 * n))
    throw PreconditionError("adjacency must list 2n vertices");
  for (Vertex v = 0; v < 2 * n; ++v) {
    auto& nb = adjacency_[static_cast<std::size_t>(v)];
    std::sort(nb.begin(), nb.end());
    if (static_cast<int>(nb.size()) != degree)
      throw PreconditionError("vertex " + std::to_string(v) + " does not have degree " +
                              std::to_string(degree));
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
      throw PreconditionError("parallel edge at vertex " + std::to_string(v));
    for (Vertex u : nb) {
      if (u < 0 || u >= 2 * n) throw PreconditionError("neighbour id out of range");
      if (is_left(u) == is_left(v)) throw PreconditionError("edge within one side");
    }
  }
  for (Vertex v = 0; v < 2 * n; ++v)
    for (Vertex u : neighbors(v))
      if (!adjacent(u, v)) throw PreconditionError("adjacency is not symmetric");
}

bool BipartiteRegularGraph::adjacent(Vertex u, Vertex v) const {
  const auto& nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

namespace {

constexpr int kMaxRejections = 10000;

std::vector<std::vector<Vertex>> from_left_lists(int n, const std::vector<std::vector<int>>& left) {
  std::vector<std::vector<Vertex>> adj(static_cast<std::size_t>(2 * n));
  for (int l = 0; l < n; ++l) {
    for (int r : left[static_cast<std::size_t>(l)]) {
      adj[static_cast<std::size_t>(l)].push_back(n + r);
      adj[static_cast<std::size_t>(n + r)].push_back(l);
    }
  }
  return adj;
}

BipartiteRegularGraph by_rejection(int n, int degree, std::mt19937_64& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> left(static_cast<std::size_t>(n));
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    for (auto& l : left) l.clear();
    bool simple = true;
    for (int k = 0; k < degree && simple; ++k) {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (int l = 0; l < n; ++l) {
        auto& row = left[static_cast<std::size_t>(l)];
        const int r = perm[static_cast<std::size_t>(l)];
        if (std::find(row.begin(), row.end(), r) != row.end()) {
          simple = false;
          break;
        }
        row.push_back(r);
      }
    }
    if (simple) return BipartiteRegularGraph(n, degree, from_left_lists(n, left));
  }
  throw NumericFailure("permutation-model rejection failed " + std::to_string(kMaxRejections) +
                       " times; degree too large for rejection sampling");
}

BipartiteRegularGraph by_switching(int n, int degree, std::mt19937_64& rng) {
  // Edge list (l, r) with r in [0, n); membership via dense matrix or hash set.
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(n) * degree);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < degree; ++k) edges.emplace_back(l, (l + k) % n);

  const bool dense = n <= 8192;
  std::vector<std::uint8_t> matrix;
  std::unordered_set<std::uint64_t> table;
  auto key = [n](int l, int r) { return static_cast<std::uint64_t>(l) * n + r; };
  auto has = [&](int l, int r) {
    return dense ? matrix[key(l, r)] != 0 : table.count(key(l, r)) != 0;
  };
  auto set = [&](int l, int r, bool on) {
    if (dense) {
      matrix[key(l, r)] = on ? 1 : 0;
    } else if (on) {
      table.insert(key(l, r));
    } else {
      table.erase(key(l, r));
    }
  };
  if (dense) matrix.assign(static_cast<std::size_t>(n) * n, 0);
  for (auto [l, r] : edges) set(l, r, true);

  if (!edges.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    const long long switches = 20LL * static_cast<long long>(edges.size());
    for (long long s = 0; s < switches; ++s) {
      auto& e1 = edges[pick(rng)];
      auto& e2 = edges[pick(rng)];
      if (e1.first == e2.first || e1.second == e2.second) continue;
      if (has(e1.first, e2.second) || has(e2.first, e1.second)) continue;
      set(e1.first, e1.second, false);
      set(e2.first, e2.second, false);
      std::swap(e1.second, e2.second);
      set(e1.first, e1.second, true);
      set(e2.first, e2.second, true);
    }
  }
  std::vector<std::vector<int>> left(static_cast<std::size_t>(n));
  for (auto [l, r] : edges) left[static_cast<std::size_t>(l)].push_back(r);
  return BipartiteRegularGraph(n, degree, from_left_lists(n, left));
}

}  // namespace

BipartiteRegularGraph generate(int n, int degree, std::uint64_t seed, GraphModel model) {
  if (n < 1 || degree < 1) throw PreconditionError("generate needs n >= 1 and degree >= 1");
  if (degree > n) throw PreconditionError("no simple bipartite graph with degree > n");
  std::mt19937_64 rng(seed);
  if (model == GraphModel::kAutomatic)
    model = degree * (degree - 1) / 2 <= 6 ? GraphModel::kPermutationRejection
                                           : GraphModel::kSwitchChain;
  return model == GraphModel::kPermutationRejection ? by_rejection(n, degree, rng)
                                                    : by_switching(n, degree, rng);
}

VertexSet boundary(const BipartiteRegularGraph& g, const VertexSet& u) {
  std::vector<char> in_u(static_cast<std::size_t>(g.vertex_count()), 0);
  for (Vertex v : u) in_u[static_cast<std::size_t>(v)] = 1;
  VertexSet out;
  for (Vertex v : u)
    for (Vertex w : g.neighbors(v))
      if (!in_u[static_cast<std::size_t>(w)]) out.push_back(w);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int graph_distance(const BipartiteRegularGraph& g, Vertex u, Vertex v) {
  if (u == v) return 0;
  std::vector<int> dist(static_cast<std::size_t>(g.vertex_count()), -1);
  std::deque<Vertex> queue{u};
  dist[static_cast<std::size_t>(u)] = 0;
  while (!queue.empty()) {
    const Vertex x = queue.front();
    queue.pop_front();
    for (Vertex y : g.neighbors(x)) {
      if (dist[static_cast<std::size_t>(y)] >= 0) continue;
      dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1;
      if (y == v) return dist[static_cast<std::size_t>(y)];
      queue.push_back(y);
    }
  }
  return kUnreachable;
}

VertexSet ball(const BipartiteRegularGraph& g, Vertex v, int radius) {
  std::vector<int> dist(static_cast<std::size_t>(g.vertex_count()), -1);
  std::vector<Vertex> frontier{v}, next;
  dist[static_cast<std::size_t>(v)] = 0;
  VertexSet out;
  for (int r = 1; r <= radius && !frontier.empty(); ++r) {
    next.clear();
    for (Vertex x : frontier)
      for (Vertex y : g.neighbors(x))
        if (dist[static_cast<std::size_t>(y)] < 0) {
          dist[static_cast<std::size_t>(y)] = r;
          next.push_back(y);
          out.push_back(y);
        }
    frontier.swap(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

DistanceIndex::DistanceIndex(const BipartiteRegularGraph& g, int radius) : radius_(radius) {
  balls_.resize(static_cast<std::size_t>(g.vertex_count()));
#pragma omp parallel for schedule(dynamic, 16)
  for (Vertex v = 0; v < g.vertex_count(); ++v) balls_[static_cast<std::size_t>(v)] = ball(g, v, radius);
}

bool DistanceIndex::within(Vertex u, Vertex v) const {
  const auto& b = near(u);
  return std::binary_search(b.begin(), b.end(), v);
}

namespace {

template <typename Visit>
void for_each_subset_upto(int lo, int count, int cap, std::vector<Vertex>& chosen, int start,
                          Visit&& visit) {
  visit(chosen);
  if (static_cast<int>(chosen.size()) == cap) return;
  for (int i = start; i < count; ++i) {
    chosen.push_back(lo + i);
    for_each_subset_upto(lo, count, cap, chosen, i + 1, visit);
    chosen.pop_back();
  }
}

}  // namespace

ExpansionReport check_expansion_smallsets(const BipartiteRegularGraph& g, ExpansionMode mode) {
  const int n = g.n();
  if (2 * n > 24) throw BudgetExceeded("exhaustive expansion check needs 2n <= 24");
  const int d = g.degree();
  ExpansionReport report{mode};
  // |U∩L| ≤ n/(cΔ) for integers means |U∩L| ≤ floor(n/(cΔ)).
  report.side_cap = mode == ExpansionMode::kPlus ? n / (3 * d) : n / (6 * d);
  report.required_ratio = mode == ExpansionMode::kPlus ? (d - 1) / 2.0 : d / 7.0;
  report.worst_ratio = std::numeric_limits<double>::infinity();

  std::vector<Vertex> left_pick, right_pick;
  std::vector<int> mark(static_cast<std::size_t>(2 * n), 0);
  int stamp = 0;
  for_each_subset_upto(0, n, report.side_cap, left_pick, 0, [&](const std::vector<Vertex>& ls) {
    for_each_subset_upto(n, n, report.side_cap, right_pick, 0, [&](const std::vector<Vertex>& rs) {
      const int size = static_cast<int>(ls.size() + rs.size());
      if (size == 0) return;
      ++stamp;
      for (Vertex v : ls) mark[static_cast<std::size_t>(v)] = stamp;
      for (Vertex v : rs) mark[static_cast<std::size_t>(v)] = stamp;
      int outside = 0;
      auto scan = [&](const std::vector<Vertex>& part) {
        for (Vertex v : part)
          for (Vertex w : g.neighbors(v))
            if (mark[static_cast<std::size_t>(w)] != stamp && mark[static_cast<std::size_t>(w)] != -stamp) {
              mark[static_cast<std::size_t>(w)] = -stamp;
              ++outside;
            }
      };
      scan(ls);
      scan(rs);
      const double ratio = mode == ExpansionMode::kPlus
                               ? static_cast<double>(size + outside) / size
                               : static_cast<double>(outside) / size;
      ++report.sets_checked;
      report.worst_ratio = std::min(report.worst_ratio, ratio);
    });
  });
  report.holds = report.worst_ratio >= report.required_ratio;
  return report;
}

double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

bool bassalygo_condition(int degree, double a, double b) {
  if (!(a > 0.0 && a < 1.0) || !(b >= 1.0) || !(a * b < 1.0))
    throw PreconditionError("bassalygo condition needs 0 < a < 1, b >= 1, ab < 1");
  const double denominator = binary_entropy(a) - a * b * binary_entropy(1.0 / b);
  if (!(denominator > 0.0)) throw PreconditionError("bassalygo condition inapplicable: denominator <= 0");
  return degree > (binary_entropy(a) + binary_entropy(a * b)) / denominator;
}

}  // namespace bipolymer
