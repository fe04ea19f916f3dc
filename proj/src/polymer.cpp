#include "bipolymer/polymer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bipolymer/errors.hpp"

namespace bipolymer {

int PolymerConfiguration::vertex_count() const {
  int total = 0;
  for (const auto& p : polymers) total += p.size();
  return total;
}

ConfigurationKey configuration_key(const PolymerConfiguration& config) {
  ConfigurationKey key;
  for (const auto& p : config.polymers)
    for (int k = 0; k < p.size(); ++k)
      key.emplace_back(p.vertices[static_cast<std::size_t>(k)], p.spins[static_cast<std::size_t>(k)]);
  std::sort(key.begin(), key.end());
  return key;
}

int size_cap(int n, int degree) {
  if (n < 1 || degree < 1) throw PreconditionError("size cap needs n, degree >= 1");
  return n / (6 * degree);
}

std::vector<VertexSet> components(const BipartiteRegularGraph& g, const VertexSet& vertices,
                                  Connectivity connectivity) {
  const int radius = radius_of(connectivity);
  const std::size_t m = vertices.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < m; ++i) {
    const auto near = ball(g, vertices[i], radius);
    for (std::size_t j = i + 1; j < m; ++j)
      if (std::binary_search(near.begin(), near.end(), vertices[j])) parent[find(j)] = find(i);
  }
  std::vector<VertexSet> out;
  std::vector<int> slot(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[static_cast<std::size_t>(slot[root])].push_back(vertices[i]);
  }
  return out;
}

namespace {

SpinSet deviating_spins(const BipartiteRegularGraph& g, const SpinSystem& system, const Biclique& bc,
                        Vertex v) {
  return full_set(system.q()) & ~(g.is_left(v) ? bc.left : bc.right);
}

int spin_of(const Polymer& p, Vertex v) {
  const auto it = std::lower_bound(p.vertices.begin(), p.vertices.end(), v);
  if (it == p.vertices.end() || *it != v) return -1;
  return p.spins[static_cast<std::size_t>(it - p.vertices.begin())];
}

// Per-vertex factors of w(γ): λ_σ(u)/Σ_side for u ∈ V_γ, B over internal
// edges, F_u/Σ_side for u ∈ ∂V_γ. `visit` receives each factor.
template <typename Visit>
void for_each_weight_factor(const BipartiteRegularGraph& g, const SpinSystem& system,
                            const Biclique& bc, const Polymer& p, Visit&& visit) {
  const double sum_left = system.activity_sum(bc.left);
  const double sum_right = system.activity_sum(bc.right);
  // (outside vertex, spin of its neighbour in γ), one entry per edge leaving γ.
  std::vector<std::pair<Vertex, int>> crossing;
  for (int k = 0; k < p.size(); ++k) {
    const Vertex u = p.vertices[static_cast<std::size_t>(k)];
    const int su = p.spins[static_cast<std::size_t>(k)];
    visit(system.lambda(su) / (g.is_left(u) ? sum_left : sum_right));
    for (Vertex w : g.neighbors(u)) {
      const int sw = spin_of(p, w);
      if (sw < 0) {
        crossing.emplace_back(w, su);
      } else if (g.is_left(u)) {
        visit(system.b(su, sw));  // each internal edge once, from its L end
      }
    }
  }
  std::sort(crossing.begin(), crossing.end());
  for (std::size_t lo = 0; lo < crossing.size();) {
    const Vertex x = crossing[lo].first;
    std::size_t hi = lo;
    while (hi < crossing.size() && crossing[hi].first == x) ++hi;
    double f = 0.0;
    for (int i : members(g.is_left(x) ? bc.left : bc.right)) {
      double term = system.lambda(i);
      for (std::size_t e = lo; e < hi; ++e) term *= system.b(i, crossing[e].second);
      f += term;
    }
    visit(f / (g.is_left(x) ? sum_left : sum_right));
    lo = hi;
  }
}

}  // namespace

void validate_polymer(const BipartiteRegularGraph& g, const SpinSystem& system, const Biclique& bc,
                      const Polymer& polymer, int cap, Connectivity connectivity) {
  if (polymer.vertices.empty()) throw PreconditionError("polymer must be nonempty");
  if (polymer.vertices.size() != polymer.spins.size())
    throw PreconditionError("polymer spins do not match its vertices");
  if (!std::is_sorted(polymer.vertices.begin(), polymer.vertices.end()) ||
      std::adjacent_find(polymer.vertices.begin(), polymer.vertices.end()) != polymer.vertices.end())
    throw PreconditionError("polymer vertices must be sorted and distinct");
  for (int k = 0; k < polymer.size(); ++k) {
    const Vertex v = polymer.vertices[static_cast<std::size_t>(k)];
    const int s = polymer.spins[static_cast<std::size_t>(k)];
    if (v < 0 || v >= g.vertex_count()) throw PreconditionError("polymer vertex out of range");
    if (s < 0 || s >= system.q() || !contains(deviating_spins(g, system, bc, v), s))
      throw PreconditionError("polymer vertex " + std::to_string(v) + " has a ground-state spin");
  }
  if (cap >= 0 && polymer.size() > cap) throw PreconditionError("polymer exceeds the size cap");
  if (components(g, polymer.vertices, connectivity).size() != 1)
    throw PreconditionError("polymer vertex set is not connected");
}

double polymer_log_weight(const BipartiteRegularGraph& g, const SpinSystem& system,
                          const Biclique& bc, const Polymer& polymer) {
  double total = 0.0;
  bool zero = false;
  for_each_weight_factor(g, system, bc, polymer, [&](double f) {
    if (f <= 0.0) zero = true;
    else total += std::log(f);
  });
  return zero ? -std::numeric_limits<double>::infinity() : total;
}

double polymer_weight(const BipartiteRegularGraph& g, const SpinSystem& system, const Biclique& bc,
                      const Polymer& polymer) {
  if (polymer.size() > 8) return std::exp(polymer_log_weight(g, system, bc, polymer));
  double product = 1.0;
  for_each_weight_factor(g, system, bc, polymer, [&](double f) { product *= f; });
  return product;
}

bool are_compatible(const BipartiteRegularGraph& g, const Polymer& a, const Polymer& b) {
  std::vector<int> dist(static_cast<std::size_t>(g.vertex_count()), -1);
  std::vector<Vertex> frontier(a.vertices), next;
  for (Vertex v : frontier) dist[static_cast<std::size_t>(v)] = 0;
  for (int r = 1; r <= kCompatibilityRadius; ++r) {
    next.clear();
    for (Vertex x : frontier)
      for (Vertex y : g.neighbors(x))
        if (dist[static_cast<std::size_t>(y)] < 0) {
          dist[static_cast<std::size_t>(y)] = r;
          next.push_back(y);
        }
    frontier.swap(next);
  }
  return std::none_of(b.vertices.begin(), b.vertices.end(),
                      [&](Vertex v) { return dist[static_cast<std::size_t>(v)] >= 0; });
}

bool are_compatible(const DistanceIndex& index, const Polymer& a, const Polymer& b) {
  if (index.radius() < kCompatibilityRadius)
    throw PreconditionError("compatibility needs a distance index of radius >= 3");
  for (Vertex u : a.vertices)
    for (Vertex v : b.vertices) {
      if (u == v) return false;
      if (index.within(u, v)) return false;
    }
  return true;
}

double configuration_weight(const BipartiteRegularGraph& g, const SpinSystem& system,
                            const Biclique& bc, const PolymerConfiguration& config) {
  double product = 1.0;
  for (const auto& p : config.polymers) product *= polymer_weight(g, system, bc, p);
  return product;
}

namespace {

class Enumerator {
 public:
  Enumerator(const BipartiteRegularGraph& g, const SpinSystem& system, const Biclique& bc,
             Vertex root, int kmax, bool root_is_min, const EnumerationOptions& options)
      : g_(g), system_(system), bc_(bc), root_(root), kmax_(kmax), root_is_min_(root_is_min),
        options_(options), radius_(radius_of(options.connectivity)),
        balls_(static_cast<std::size_t>(g.vertex_count())),
        ready_(static_cast<std::size_t>(g.vertex_count()), 0) {}

  std::vector<WeightedPolymer> run() {
    if (kmax_ < 1 || !deviable(root_)) return {};
    std::vector<Vertex> ext;
    if (kmax_ > 1)  // radius-3 balls are costly at large Δ; skip them for singletons
      for (Vertex u : near(root_))
        if (eligible(u)) ext.push_back(u);
    std::sort(ext.begin(), ext.end(), std::greater<>());
    sub_.push_back(root_);
    extend(std::move(ext));
    std::sort(out_.begin(), out_.end(),
              [](const WeightedPolymer& a, const WeightedPolymer& b) { return a.polymer < b.polymer; });
    return std::move(out_);
  }

 private:
  const VertexSet& near(Vertex v) {
    if (!ready_[static_cast<std::size_t>(v)]) {
      balls_[static_cast<std::size_t>(v)] = ball(g_, v, radius_);
      ready_[static_cast<std::size_t>(v)] = 1;
    }
    return balls_[static_cast<std::size_t>(v)];
  }

  bool deviable(Vertex v) const { return deviating_spins(g_, system_, bc_, v) != 0; }

  bool eligible(Vertex u) const { return u != root_ && (!root_is_min_ || u > root_) && deviable(u); }

  bool touches_sub(Vertex u) {
    for (Vertex s : sub_) {
      if (s == u) return true;
      const auto& b = near(s);
      if (std::binary_search(b.begin(), b.end(), u)) return true;
    }
    return false;
  }

  void charge(long long cost) {
    states_ += cost;
    if (states_ > options_.budget)
      throw BudgetExceeded("polymer enumeration exceeded its budget of " +
                           std::to_string(options_.budget) + " partial states");
  }

  void record() {
    Polymer p;
    p.vertices = sub_;
    std::sort(p.vertices.begin(), p.vertices.end());
    std::vector<std::vector<int>> choices;
    for (Vertex v : p.vertices) choices.push_back(members(deviating_spins(g_, system_, bc_, v)));
    p.spins.assign(p.vertices.size(), 0);
    std::vector<std::size_t> digit(p.vertices.size(), 0);
    while (true) {
      charge(1);
      for (std::size_t k = 0; k < digit.size(); ++k) p.spins[k] = choices[k][digit[k]];
      if (p.size() > 8) {
        const double lw = polymer_log_weight(g_, system_, bc_, p);
        if (std::isfinite(lw)) out_.push_back({p, std::exp(lw)});
      } else if (const double w = polymer_weight(g_, system_, bc_, p); w > 0.0) {
        out_.push_back({p, w});
      }
      std::size_t k = 0;
      while (k < digit.size() && ++digit[k] == choices[k].size()) digit[k++] = 0;
      if (k == digit.size()) break;
    }
  }

  void extend(std::vector<Vertex> ext) {
    charge(1);
    record();
    if (static_cast<int>(sub_.size()) == kmax_) return;
    while (!ext.empty()) {
      const Vertex w = ext.back();
      ext.pop_back();
      std::vector<Vertex> next;
      if (static_cast<int>(sub_.size()) + 1 < kmax_) {  // a full child never extends
        next = ext;
        for (Vertex u : near(w))
          if (eligible(u) && !touches_sub(u)) next.push_back(u);
      }
      sub_.push_back(w);
      extend(std::move(next));
      sub_.pop_back();
    }
  }

  const BipartiteRegularGraph& g_;
  const SpinSystem& system_;
  Biclique bc_;
  Vertex root_;
  int kmax_;
  bool root_is_min_;
  EnumerationOptions options_;
  int radius_;
  std::vector<VertexSet> balls_;
  std::vector<char> ready_;
  std::vector<Vertex> sub_;
  std::vector<WeightedPolymer> out_;
  long long states_ = 0;
};

PolymerCatalog assemble(int kmax, int vertex_count, std::vector<std::vector<WeightedPolymer>> rooted) {
  PolymerCatalog catalog;
  catalog.kmax = kmax;
  // Root = smallest vertex, so concatenation in root order is already sorted.
  for (auto& part : rooted)
    for (auto& wp : part) catalog.polymers.push_back(std::move(wp));
  catalog.containing.assign(static_cast<std::size_t>(vertex_count), {});
  for (std::size_t i = 0; i < catalog.polymers.size(); ++i)
    for (Vertex v : catalog.polymers[i].polymer.vertices)
      catalog.containing[static_cast<std::size_t>(v)].push_back(static_cast<int>(i));
  return catalog;
}

}  // namespace

std::vector<WeightedPolymer> enumerate_polymers_at(const BipartiteRegularGraph& g,
                                                   const SpinSystem& system, const Biclique& bc,
                                                   Vertex v, int kmax,
                                                   const EnumerationOptions& options) {
  if (kmax < 1) throw PreconditionError("enumeration needs kmax >= 1");
  if (v < 0 || v >= g.vertex_count()) throw PreconditionError("vertex out of range");
  return Enumerator(g, system, bc, v, kmax, false, options).run();
}

PolymerCatalog build_catalog_serial(const BipartiteRegularGraph& g, const SpinSystem& system,
                                    const Biclique& bc, int kmax, const EnumerationOptions& options) {
  std::vector<std::vector<WeightedPolymer>> rooted(static_cast<std::size_t>(g.vertex_count()));
  if (kmax >= 1)
    for (Vertex v = 0; v < g.vertex_count(); ++v)
      rooted[static_cast<std::size_t>(v)] = Enumerator(g, system, bc, v, kmax, true, options).run();
  return assemble(kmax, g.vertex_count(), std::move(rooted));
}

PolymerCatalog build_catalog(const BipartiteRegularGraph& g, const SpinSystem& system,
                             const Biclique& bc, int kmax, const EnumerationOptions& options) {
  std::vector<std::vector<WeightedPolymer>> rooted(static_cast<std::size_t>(g.vertex_count()));
  if (kmax >= 1) {
    bool failed = false;
    std::string message;
#pragma omp parallel for schedule(dynamic)
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
      try {
        rooted[static_cast<std::size_t>(v)] = Enumerator(g, system, bc, v, kmax, true, options).run();
      } catch (const BudgetExceeded& e) {
#pragma omp critical(catalog_failure)
        {
          failed = true;
          message = e.what();
        }
      }
    }
    if (failed) throw BudgetExceeded(message);
  }
  return assemble(kmax, g.vertex_count(), std::move(rooted));
}

}  // namespace bipolymer
