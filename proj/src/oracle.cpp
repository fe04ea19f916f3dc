#include "bipolymer/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <tuple>
#include <string>

#include "bipolymer/errors.hpp"

namespace bipolymer {

namespace {

// Neumaier's variant of compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) c_ += (sum_ - t) + x;
    else c_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

long long checked_power(int base, int exponent, long long limit, const char* what) {
  long long value = 1;
  for (int k = 0; k < exponent; ++k) {
    value *= base;
    if (value > limit) throw BudgetExceeded(std::string(what) + " exceeds its enumeration budget");
  }
  return value;
}

constexpr long long kPartitionLimit = 100'000'000;
constexpr long long kPhaseLimit = 1'000'000'000;
constexpr int kChunks = 256;

// Assignments of L in base q, vertex 0 least significant.
class LeftOdometer {
 public:
  LeftOdometer(int n, int q, long long index) : q_(q), spins_(static_cast<std::size_t>(n)) {
    for (auto& s : spins_) {
      s = static_cast<int>(index % q);
      index /= q;
    }
  }
  const std::vector<int>& spins() const { return spins_; }
  void next() {
    for (auto& s : spins_) {
      if (++s < q_) return;
      s = 0;
    }
  }

 private:
  int q_;
  std::vector<int> spins_;
};

// Per-R-vertex spin weights a_v(j) = λ_j Π_{u∼v} B(σ_u, j) given σ|L.
void right_weights(const BipartiteRegularGraph& g, const SpinSystem& system,
                   const std::vector<int>& left, std::vector<double>& out) {
  const int q = system.q();
  out.assign(static_cast<std::size_t>(g.n() * q), 0.0);
  for (int r = 0; r < g.n(); ++r)
    for (int j = 0; j < q; ++j) {
      double a = system.lambda(j);
      for (Vertex u : g.neighbors(g.n() + r)) a *= system.b(left[static_cast<std::size_t>(u)], j);
      out[static_cast<std::size_t>(r * q + j)] = a;
    }
}

double left_weight(const SpinSystem& system, const std::vector<int>& left) {
  double w = 1.0;
  for (int s : left) w *= system.lambda(s);
  return w;
}

CompensatedSum partition_chunk(const BipartiteRegularGraph& g, const SpinSystem& system,
                               long long first, long long last) {
  CompensatedSum sum;
  if (first >= last) return sum;
  LeftOdometer sigma(g.n(), system.q(), first);
  std::vector<double> a;
  for (long long idx = first; idx < last; ++idx, sigma.next()) {
    double w = left_weight(system, sigma.spins());
    if (w != 0.0) {
      right_weights(g, system, sigma.spins(), a);
      for (int r = 0; r < g.n() && w != 0.0; ++r) {
        double s = 0.0;
        for (int j = 0; j < system.q(); ++j) s += a[static_cast<std::size_t>(r * system.q() + j)];
        w *= s;
      }
    }
    sum.add(w);
  }
  return sum;
}

int resolve_cap(const BipartiteRegularGraph& g, int kmax) {
  return kmax < 0 ? size_cap(g.n(), g.degree()) : kmax;
}

}  // namespace

double exact_partition_function_serial(const BipartiteRegularGraph& g, const SpinSystem& system) {
  const long long total = checked_power(system.q(), g.n(), kPartitionLimit, "partition function");
  return partition_chunk(g, system, 0, total).value();
}

double exact_partition_function(const BipartiteRegularGraph& g, const SpinSystem& system) {
  const long long total = checked_power(system.q(), g.n(), kPartitionLimit, "partition function");
  std::vector<CompensatedSum> partial(kChunks);
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < kChunks; ++c)
    partial[static_cast<std::size_t>(c)] =
        partition_chunk(g, system, total * c / kChunks, total * (c + 1) / kChunks);
  CompensatedSum sum;
  for (const auto& p : partial) sum.add(p.value());
  return sum.value();
}

// ---- phases ----------------------------------------------------------------

std::vector<double> PhaseHistogram::alpha() const {
  const int n = std::accumulate(alpha_counts.begin(), alpha_counts.end(), 0);
  std::vector<double> out;
  for (int c : alpha_counts) out.push_back(static_cast<double>(c) / n);
  return out;
}

std::vector<double> PhaseHistogram::beta() const {
  const int n = std::accumulate(beta_counts.begin(), beta_counts.end(), 0);
  std::vector<double> out;
  for (int c : beta_counts) out.push_back(static_cast<double>(c) / n);
  return out;
}

namespace {

// α index → dense Z^{α,·} over β count vectors, both in base n+1.
using PhaseTable = std::map<long long, std::vector<double>>;

struct CountCoding {
  int q;
  int base;
  long long size;
  std::vector<long long> stride;

  CountCoding(int q_, int n) : q(q_), base(n + 1), size(1), stride(static_cast<std::size_t>(q_)) {
    for (int j = 0; j < q; ++j) {
      stride[static_cast<std::size_t>(j)] = size;
      size *= base;
    }
  }
  std::vector<int> decode(long long idx) const {
    std::vector<int> out(static_cast<std::size_t>(q));
    for (auto& c : out) {
      c = static_cast<int>(idx % base);
      idx /= base;
    }
    return out;
  }
};

void phase_chunk(const BipartiteRegularGraph& g, const SpinSystem& system, const CountCoding& code,
                 long long first, long long last, PhaseTable& table) {
  if (first >= last) return;
  LeftOdometer sigma(g.n(), system.q(), first);
  std::vector<double> a;
  std::vector<double> dp(static_cast<std::size_t>(code.size)), next(dp.size());
  for (long long idx = first; idx < last; ++idx, sigma.next()) {
    const double wl = left_weight(system, sigma.spins());
    if (wl == 0.0) continue;
    long long alpha = 0;
    for (int s : sigma.spins()) alpha += code.stride[static_cast<std::size_t>(s)];
    right_weights(g, system, sigma.spins(), a);
    std::fill(dp.begin(), dp.end(), 0.0);
    dp[0] = wl;
    for (int r = 0; r < g.n(); ++r) {
      std::fill(next.begin(), next.end(), 0.0);
      for (long long k = 0; k < code.size; ++k) {
        const double x = dp[static_cast<std::size_t>(k)];
        if (x == 0.0) continue;
        for (int j = 0; j < system.q(); ++j)
          next[static_cast<std::size_t>(k + code.stride[static_cast<std::size_t>(j)])] +=
              x * a[static_cast<std::size_t>(r * system.q() + j)];
      }
      dp.swap(next);
    }
    auto& row = table[alpha];
    if (row.empty()) row.assign(dp.size(), 0.0);
    for (std::size_t k = 0; k < dp.size(); ++k) row[k] += dp[k];
  }
}

std::vector<PhaseHistogram> to_histograms(const CountCoding& code, const PhaseTable& table) {
  std::vector<PhaseHistogram> out;
  for (const auto& [alpha, row] : table)
    for (std::size_t k = 0; k < row.size(); ++k)
      if (row[k] > 0.0) out.push_back({code.decode(alpha), code.decode(static_cast<long long>(k)), row[k]});
  std::sort(out.begin(), out.end(), [](const PhaseHistogram& x, const PhaseHistogram& y) {
    return std::tie(x.alpha_counts, x.beta_counts) < std::tie(y.alpha_counts, y.beta_counts);
  });
  return out;
}

CountCoding phase_coding(const BipartiteRegularGraph& g, const SpinSystem& system, long long& total) {
  total = checked_power(system.q(), g.n(), kPhaseLimit, "phase decomposition");
  const long long states = checked_power(g.n() + 1, system.q(), kPhaseLimit, "phase decomposition");
  if (static_cast<double>(total) * static_cast<double>(states) > static_cast<double>(kPhaseLimit))
    throw BudgetExceeded("phase decomposition exceeds its enumeration budget");
  return CountCoding(system.q(), g.n());
}

}  // namespace

std::vector<PhaseHistogram> exact_phase_decomposition_serial(const BipartiteRegularGraph& g,
                                                             const SpinSystem& system) {
  long long total = 0;
  const CountCoding code = phase_coding(g, system, total);
  PhaseTable table;
  phase_chunk(g, system, code, 0, total, table);
  return to_histograms(code, table);
}

std::vector<PhaseHistogram> exact_phase_decomposition(const BipartiteRegularGraph& g,
                                                      const SpinSystem& system) {
  long long total = 0;
  const CountCoding code = phase_coding(g, system, total);
  constexpr int chunks = 64;
  std::vector<PhaseTable> partial(chunks);
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < chunks; ++c)
    phase_chunk(g, system, code, total * c / chunks, total * (c + 1) / chunks,
                partial[static_cast<std::size_t>(c)]);
  PhaseTable table;
  for (const auto& part : partial)
    for (const auto& [alpha, row] : part) {
      auto& into = table[alpha];
      if (into.empty()) into.assign(row.size(), 0.0);
      for (std::size_t k = 0; k < row.size(); ++k) into[k] += row[k];
    }
  return to_histograms(code, table);
}

// ---- polymer partition function -------------------------------------------

namespace {

// Vertex bitsets over [0, 2n) for fast compatibility of catalog entries.
class SetFamily {
 public:
  SetFamily(const BipartiteRegularGraph& g) : index_(g, kCompatibilityRadius), words_((g.vertex_count() + 63) / 64) {}

  /// Adds an entry; returns its id.
  int add(const VertexSet& vertices) {
    const std::size_t base = members_.size();
    members_.resize(base + static_cast<std::size_t>(words_), 0);
    closure_.resize(base + static_cast<std::size_t>(words_), 0);
    for (Vertex v : vertices) {
      set(members_, base, v);
      set(closure_, base, v);
      for (Vertex w : index_.near(v)) set(closure_, base, w);
    }
    return static_cast<int>(base / static_cast<std::size_t>(words_));
  }

  bool compatible(int a, int b) const {
    const std::size_t pa = static_cast<std::size_t>(a) * static_cast<std::size_t>(words_);
    const std::size_t pb = static_cast<std::size_t>(b) * static_cast<std::size_t>(words_);
    for (int k = 0; k < words_; ++k)
      if (closure_[pa + static_cast<std::size_t>(k)] & members_[pb + static_cast<std::size_t>(k)]) return false;
    return true;
  }

 private:
  static void set(std::vector<std::uint64_t>& bits, std::size_t base, Vertex v) {
    bits[base + static_cast<std::size_t>(v / 64)] |= std::uint64_t{1} << (v % 64);
  }

  DistanceIndex index_;
  int words_;
  std::vector<std::uint64_t> members_;
  std::vector<std::uint64_t> closure_;
};

class BudgetCounter {
 public:
  explicit BudgetCounter(long long limit) : limit_(limit) {}
  void charge(const char* what) {
    if (++used_ > limit_) throw BudgetExceeded(std::string(what) + " exceeds its state budget");
  }

 private:
  long long limit_;
  long long used_ = 0;
};

// Σ over compatible families drawn from `candidates` of Π weight.
double family_sum(const SetFamily& family, const std::vector<double>& weight,
                  const std::vector<int>& candidates, BudgetCounter& budget) {
  CompensatedSum sum;
  sum.add(1.0);
  std::vector<int> rest;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    budget.charge("polymer partition function");
    const int a = candidates[k];
    rest.clear();
    for (std::size_t l = k + 1; l < candidates.size(); ++l)
      if (family.compatible(a, candidates[l])) rest.push_back(candidates[l]);
    sum.add(weight[static_cast<std::size_t>(a)] * family_sum(family, weight, rest, budget));
  }
  return sum.value();
}

}  // namespace

double exact_polymer_partition_function(const BipartiteRegularGraph& g, const SpinSystem& system,
                                        const Biclique& bc, int kmax, const OracleBudget& budget) {
  const int cap = resolve_cap(g, kmax);
  if (cap == 0) return 1.0;
  const PolymerCatalog catalog =
      build_catalog(g, system, bc, cap, EnumerationOptions{Connectivity::kRadius3, budget.states});
  // Compatibility depends on vertex sets only, so labelings of a set merge.
  SetFamily family(g);
  std::vector<double> weight;
  std::vector<int> all;
  for (std::size_t i = 0; i < catalog.polymers.size();) {
    CompensatedSum w;
    std::size_t j = i;
    for (; j < catalog.polymers.size() &&
           catalog.polymers[j].polymer.vertices == catalog.polymers[i].polymer.vertices;
         ++j)
      w.add(catalog.polymers[j].weight);
    all.push_back(family.add(catalog.polymers[i].polymer.vertices));
    weight.push_back(w.value());
    i = j;
  }
  BudgetCounter counter(budget.states);
  return family_sum(family, weight, all, counter);
}

// ---- restricted spin sum ---------------------------------------------------

namespace {

std::vector<std::vector<int>> all_pairs_distances(const BipartiteRegularGraph& g) {
  const int m = g.vertex_count();
  std::vector<std::vector<int>> dist(static_cast<std::size_t>(m),
                                     std::vector<int>(static_cast<std::size_t>(m), kUnreachable));
  for (Vertex s = 0; s < m; ++s) {
    auto& d = dist[static_cast<std::size_t>(s)];
    std::deque<Vertex> queue{s};
    d[static_cast<std::size_t>(s)] = 0;
    while (!queue.empty()) {
      const Vertex x = queue.front();
      queue.pop_front();
      for (Vertex y : g.neighbors(x))
        if (d[static_cast<std::size_t>(y)] == kUnreachable) {
          d[static_cast<std::size_t>(y)] = d[static_cast<std::size_t>(x)] + 1;
          queue.push_back(y);
        }
    }
  }
  return dist;
}

class RestrictedSum {
 public:
  RestrictedSum(const BipartiteRegularGraph& g, const SpinSystem& system, const Biclique& bc, int cap,
                long long budget)
      : g_(g), system_(system), bc_(bc), cap_(cap), budget_(budget), dist_(all_pairs_distances(g)),
        spin_(static_cast<std::size_t>(g.vertex_count()), -1) {
    for (Vertex v = 0; v < g.vertex_count(); ++v)
      if (deviating(v) != 0) order_.push_back(v);
  }

  double run() {
    descend(0);
    return total_.value();
  }

 private:
  SpinSet ground(Vertex v) const { return g_.is_left(v) ? bc_.left : bc_.right; }
  SpinSet deviating(Vertex v) const { return full_set(system_.q()) & ~ground(v); }

  // Size of v's component among chosen vertices under 1 ≤ dist ≤ 3.
  int component_size(Vertex v) const {
    std::vector<Vertex> stack{v}, seen{v};
    while (!stack.empty()) {
      const Vertex x = stack.back();
      stack.pop_back();
      for (Vertex y : chosen_)
        if (std::find(seen.begin(), seen.end(), y) == seen.end() &&
            dist_[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] <= kCompatibilityRadius) {
          seen.push_back(y);
          stack.push_back(y);
        }
    }
    return static_cast<int>(seen.size());
  }

  void descend(std::size_t pos) {
    budget_.charge("restricted spin sum");
    if (pos == order_.size()) {
      total_.add(leaf_weight());
      return;
    }
    descend(pos + 1);
    const Vertex v = order_[pos];
    chosen_.push_back(v);
    if (component_size(v) <= cap_) {
      for (int s : members(deviating(v))) {
        spin_[static_cast<std::size_t>(v)] = s;
        descend(pos + 1);
      }
      spin_[static_cast<std::size_t>(v)] = -1;
    }
    chosen_.pop_back();
  }

  // Normalised w_G summed over ground spins of every non-deviating vertex.
  double leaf_weight() const {
    const double sum_left = system_.activity_sum(bc_.left);
    const double sum_right = system_.activity_sum(bc_.right);
    double w = 1.0;
    for (Vertex u = 0; u < g_.vertex_count(); ++u) {
      const int su = spin_[static_cast<std::size_t>(u)];
      const double side = g_.is_left(u) ? sum_left : sum_right;
      if (su >= 0) {
        w *= system_.lambda(su) / side;
        if (g_.is_left(u))
          for (Vertex x : g_.neighbors(u)) {
            const int sx = spin_[static_cast<std::size_t>(x)];
            if (sx >= 0) w *= system_.b(su, sx);
          }
        continue;
      }
      double f = 0.0;
      for (int i : members(ground(u))) {
        double term = system_.lambda(i);
        for (Vertex x : g_.neighbors(u)) {
          const int sx = spin_[static_cast<std::size_t>(x)];
          if (sx >= 0) term *= system_.b(i, sx);
        }
        f += term;
      }
      w *= f / side;
    }
    return w;
  }

  const BipartiteRegularGraph& g_;
  const SpinSystem& system_;
  Biclique bc_;
  int cap_;
  BudgetCounter budget_;
  std::vector<std::vector<int>> dist_;
  std::vector<Vertex> order_;
  std::vector<Vertex> chosen_;
  std::vector<int> spin_;
  CompensatedSum total_;
};

}  // namespace

double restricted_spin_sum(const BipartiteRegularGraph& g, const SpinSystem& system,
                           const Biclique& bc, int kmax, const OracleBudget& budget) {
  return RestrictedSum(g, system, bc, resolve_cap(g, kmax), budget.states).run();
}

double exact_log_z_pmer(const BipartiteRegularGraph& g, const SpinSystem& system,
                        const std::vector<Biclique>& bicliques, int kmax,
                        const OracleBudget& budget) {
  if (bicliques.empty()) throw PreconditionError("at least one biclique is required");
  std::vector<double> terms;
  for (const auto& bc : bicliques)
    terms.push_back(g.n() * std::log(system.activity_sum(bc.left)) +
                    g.n() * std::log(system.activity_sum(bc.right)) +
                    std::log(exact_polymer_partition_function(g, system, bc, kmax, budget)));
  const double top = *std::max_element(terms.begin(), terms.end());
  CompensatedSum sum;
  for (double t : terms) sum.add(std::exp(t - top));
  return top + std::log(sum.value());
}

// ---- μ^{S,T} ---------------------------------------------------------------

namespace {

void collect_configurations(const PolymerCatalog& catalog, const SetFamily& family,
                            const std::vector<int>& candidates, std::vector<int>& chosen,
                            double weight, long long max_states,
                            std::vector<ConfigurationProbability>& out) {
  ConfigurationProbability entry;
  for (int id : chosen) entry.configuration.polymers.push_back(catalog.polymers[static_cast<std::size_t>(id)].polymer);
  entry.key = configuration_key(entry.configuration);
  entry.weight = weight;
  out.push_back(std::move(entry));
  if (static_cast<long long>(out.size()) > max_states)
    throw BudgetExceeded("configuration space exceeds " + std::to_string(max_states) + " states");
  std::vector<int> rest;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const int a = candidates[k];
    rest.clear();
    for (std::size_t l = k + 1; l < candidates.size(); ++l)
      if (family.compatible(a, candidates[l])) rest.push_back(candidates[l]);
    chosen.push_back(a);
    collect_configurations(catalog, family, rest, chosen,
                           weight * catalog.polymers[static_cast<std::size_t>(a)].weight, max_states, out);
    chosen.pop_back();
  }
}

}  // namespace

std::vector<ConfigurationProbability> exact_mu_st(const BipartiteRegularGraph& g,
                                                  const SpinSystem& system, const Biclique& bc,
                                                  int kmax, long long max_states) {
  const int cap = resolve_cap(g, kmax);
  std::vector<ConfigurationProbability> out;
  if (cap == 0) {
    out.push_back({{}, {}, 1.0, 1.0});
    return out;
  }
  const PolymerCatalog catalog = build_catalog(g, system, bc, cap);
  SetFamily family(g);
  std::vector<int> all;
  for (const auto& wp : catalog.polymers) all.push_back(family.add(wp.polymer.vertices));
  std::vector<int> chosen;
  collect_configurations(catalog, family, all, chosen, 1.0, max_states, out);
  CompensatedSum z;
  for (const auto& e : out) z.add(e.weight);
  for (auto& e : out) e.probability = e.weight / z.value();
  std::sort(out.begin(), out.end(),
            [](const ConfigurationProbability& a, const ConfigurationProbability& b) { return a.key < b.key; });
  return out;
}

std::map<SpinAssignment, double> exact_pmer_spin_distribution(const BipartiteRegularGraph& g,
                                                              const SpinSystem& system,
                                                              const std::vector<Biclique>& bicliques,
                                                              int kmax, long long max_states) {
  if (bicliques.empty()) throw PreconditionError("at least one biclique is required");
  std::vector<std::vector<ConfigurationProbability>> measures;
  std::vector<double> log_terms;
  for (const auto& bc : bicliques) {
    measures.push_back(exact_mu_st(g, system, bc, kmax, max_states));
    CompensatedSum z;
    for (const auto& e : measures.back()) z.add(e.weight);
    log_terms.push_back(g.n() * std::log(system.activity_sum(bc.left)) +
                        g.n() * std::log(system.activity_sum(bc.right)) + std::log(z.value()));
  }
  const double top = *std::max_element(log_terms.begin(), log_terms.end());
  double norm = 0.0;
  for (double t : log_terms) norm += std::exp(t - top);

  std::map<SpinAssignment, double> law;
  for (std::size_t b = 0; b < bicliques.size(); ++b) {
    const Biclique& bc = bicliques[b];
    const double mix = std::exp(log_terms[b] - top) / norm;
    for (const auto& e : measures[b]) {
      SpinAssignment sigma(static_cast<std::size_t>(g.vertex_count()), -1);
      for (const auto& [v, s] : e.key) sigma[static_cast<std::size_t>(v)] = s;
      std::vector<Vertex> free;
      std::vector<std::vector<int>> options;
      for (Vertex v = 0; v < g.vertex_count(); ++v)
        if (sigma[static_cast<std::size_t>(v)] < 0) {
          free.push_back(v);
          options.push_back(members(g.is_left(v) ? bc.left : bc.right));
        }
      std::vector<std::size_t> digit(free.size(), 0);
      while (true) {
        double p = mix * e.probability;
        for (std::size_t k = 0; k < free.size(); ++k) {
          const int s = options[k][digit[k]];
          sigma[static_cast<std::size_t>(free[k])] = s;
          p *= system.lambda(s) / system.activity_sum(g.is_left(free[k]) ? bc.left : bc.right);
        }
        law[sigma] += p;
        if (static_cast<long long>(law.size()) > max_states)
          throw BudgetExceeded("spin distribution exceeds its state budget");
        std::size_t k = 0;
        while (k < digit.size() && ++digit[k] == options[k].size()) digit[k++] = 0;
        if (k == digit.size()) break;
      }
    }
  }
  return law;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw PreconditionError("distributions have different lengths");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

}  // namespace bipolymer
