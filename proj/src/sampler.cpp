#include "bipolymer/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "bipolymer/errors.hpp"
#include "bipolymer/rng.hpp"

namespace bipolymer {

namespace {

// Portable draws: the standard distributions are implementation-defined, and
// reports must reproduce bit-for-bit from a seed.
double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("eps must lie in (0,1)");
}

void check_configuration_size(const BipartiteRegularGraph& g, int kmax,
                              const PolymerConfiguration& config) {
  if (kmax > size_cap(g.n(), g.degree())) return;  // the bound is only proved for capped polymers
  if (static_cast<long long>(config.vertex_count()) * g.degree() > 12LL * g.n())
    throw std::logic_error("sampled configuration violates |V_Γ| ≤ 12n/Δ");
}

long long spacing(const BipartiteRegularGraph& g, const SamplerOptions& options) {
  return options.steps_per_sample > 0 ? options.steps_per_sample : g.vertex_count();
}

}  // namespace

int resolve_kmax(int n, int degree, double eps, std::optional<int> kmax_override) {
  if (kmax_override) {
    if (*kmax_override < 0) throw PreconditionError("kmax override must be nonnegative");
    return *kmax_override;
  }
  check_eps(eps);
  const int cap = size_cap(n, degree);
  if (cap == 0) return 0;
  const int k = std::max(1, static_cast<int>(std::ceil(std::log(2.0 * n / eps) / 4.0)));
  return std::min(k, cap);
}

long long burn_in_steps(int n, double eps, double mixing_constant) {
  check_eps(eps);
  if (!(mixing_constant > 0.0)) throw PreconditionError("mixing constant must be positive");
  return static_cast<long long>(std::ceil(mixing_constant * n * std::log(n / eps)));
}

bool check_sampling_condition(const SpinSystem& system, int degree, const SamplerOptions& options) {
  const double margin = polymer_condition_margin(system, degree);
  if (margin >= 0.0) return true;
  if (options.allow_uncertified) return false;
  throw PreconditionError("polymer condition margin is negative (" + std::to_string(margin) +
                          "); the uncertified override is required to run the chain");
}

// ---- chain -----------------------------------------------------------------

PolymerChain::PolymerChain(const BipartiteRegularGraph& g, const PolymerCatalog& catalog,
                           Vertex first_vertex, std::shared_ptr<const DistanceIndex> index)
    : g_(&g), catalog_(&catalog), index_(std::move(index)),
      local_(static_cast<std::size_t>(g.vertex_count())) {
  if (!index_) index_ = std::make_shared<const DistanceIndex>(g, kCompatibilityRadius);
  if (index_->radius() < kCompatibilityRadius)
    throw PreconditionError("chain needs a distance index of radius >= 3");
  double largest = 0.0;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    auto& list = local_[static_cast<std::size_t>(v)];
    double total = 0.0;
    for (int id : catalog.containing[static_cast<std::size_t>(v)]) {
      const auto& wp = catalog.polymers[static_cast<std::size_t>(id)];
      if (wp.polymer.vertices.front() < first_vertex) continue;
      total += wp.weight / wp.polymer.size();
      list.push_back({id, total});
    }
    largest = std::max(largest, total);
  }
  if (largest > 0.0) normaliser_ = largest;
  for (auto& list : local_)
    for (auto& p : list) p.cumulative /= normaliser_;
}

ChainState PolymerChain::empty_state() const {
  ChainState s;
  s.covered.assign(static_cast<std::size_t>(g_->vertex_count()), -1);
  return s;
}

ChainState PolymerChain::state_from(const PolymerConfiguration& config) const {
  ChainState s = empty_state();
  for (const auto& p : config.polymers) {
    if (!insertable(s, p)) throw PreconditionError("configuration polymers are not compatible");
    insert(s, p);
  }
  return s;
}

bool PolymerChain::insertable(const ChainState& state, const Polymer& p) const {
  for (Vertex u : p.vertices) {
    if (state.covered[static_cast<std::size_t>(u)] >= 0) return false;
    for (Vertex w : index_->near(u))
      if (state.covered[static_cast<std::size_t>(w)] >= 0) return false;
  }
  return true;
}

void PolymerChain::insert(ChainState& state, const Polymer& p) {
  const int slot = static_cast<int>(state.configuration.polymers.size());
  state.configuration.polymers.push_back(p);
  for (Vertex u : p.vertices) state.covered[static_cast<std::size_t>(u)] = slot;
}

void PolymerChain::remove(ChainState& state, int slot) {
  auto& polymers = state.configuration.polymers;
  for (Vertex u : polymers[static_cast<std::size_t>(slot)].vertices)
    state.covered[static_cast<std::size_t>(u)] = -1;
  const int last = static_cast<int>(polymers.size()) - 1;
  if (slot != last) {
    polymers[static_cast<std::size_t>(slot)] = std::move(polymers.back());
    for (Vertex u : polymers[static_cast<std::size_t>(slot)].vertices)
      state.covered[static_cast<std::size_t>(u)] = slot;
  }
  polymers.pop_back();
}

void PolymerChain::step(ChainState& state, Rng& rng) const {
  ++state.step_count;
  const auto v = static_cast<Vertex>(uniform_index(rng, static_cast<std::size_t>(g_->vertex_count())));
  const bool removal = (rng() >> 63) != 0;
  if (removal) {
    const int slot = state.covered[static_cast<std::size_t>(v)];
    if (slot < 0) return;
    const double a = 1.0 / (normaliser_ * state.configuration.polymers[static_cast<std::size_t>(slot)].size());
    if (a >= 1.0 || unit(rng) < a) remove(state, slot);
    return;
  }
  const auto& list = local_[static_cast<std::size_t>(v)];
  if (list.empty()) return;
  const double u = unit(rng);
  const auto it = std::upper_bound(list.begin(), list.end(), u,
                                   [](double x, const Proposal& p) { return x < p.cumulative; });
  if (it == list.end()) return;  // the null proposal
  const Polymer& p = catalog_->polymers[static_cast<std::size_t>(it->polymer)].polymer;
  if (!insertable(state, p)) return;
  const double a = normaliser_ * p.size();
  if (a >= 1.0 || unit(rng) < a) insert(state, p);
}

std::vector<std::pair<PolymerConfiguration, double>> PolymerChain::transitions(
    const ChainState& state) const {
  std::map<ConfigurationKey, std::pair<PolymerConfiguration, double>> law;
  auto add = [&](const PolymerConfiguration& c, double p) {
    if (p <= 0.0) return;
    auto [it, fresh] = law.try_emplace(configuration_key(c), c, 0.0);
    it->second.second += p;
  };
  const double half = 0.5 / g_->vertex_count();
  for (Vertex v = 0; v < g_->vertex_count(); ++v) {
    const int slot = state.covered[static_cast<std::size_t>(v)];
    if (slot < 0) {
      add(state.configuration, half);
    } else {
      const int k = state.configuration.polymers[static_cast<std::size_t>(slot)].size();
      const double a = std::min(1.0, 1.0 / (normaliser_ * k));
      ChainState next = state;
      remove(next, slot);
      add(next.configuration, half * a);
      add(state.configuration, half * (1.0 - a));
    }
    double previous = 0.0;
    for (const auto& proposal : local_[static_cast<std::size_t>(v)]) {
      const double q = proposal.cumulative - previous;
      previous = proposal.cumulative;
      const Polymer& p = catalog_->polymers[static_cast<std::size_t>(proposal.polymer)].polymer;
      if (!insertable(state, p)) {
        add(state.configuration, half * q);
        continue;
      }
      const double a = std::min(1.0, normaliser_ * p.size());
      ChainState next = state;
      insert(next, p);
      add(next.configuration, half * q * a);
      add(state.configuration, half * q * (1.0 - a));
    }
    add(state.configuration, half * std::max(0.0, 1.0 - previous));
  }
  std::vector<std::pair<PolymerConfiguration, double>> out;
  out.reserve(law.size());
  for (auto& [key, entry] : law) out.push_back(std::move(entry));
  return out;
}

void chain_step(const PolymerChain& chain, ChainState& state, Rng& rng) { chain.step(state, rng); }

// ---- sampling --------------------------------------------------------------

std::vector<PolymerConfiguration> sample_configurations(const BipartiteRegularGraph& g,
                                                        const SpinSystem& system, const Biclique& bc,
                                                        long long count, double eps,
                                                        std::uint64_t seed,
                                                        const SamplerOptions& options) {
  if (count < 0) throw PreconditionError("sample count must be nonnegative");
  check_sampling_condition(system, g.degree(), options);
  const int kmax = resolve_kmax(g.n(), g.degree(), eps, options.kmax_override);
  const long long burn_in = burn_in_steps(g.n(), eps, options.mixing_constant);
  std::vector<PolymerConfiguration> out;
  out.reserve(static_cast<std::size_t>(count));
  if (kmax == 0) {
    out.resize(static_cast<std::size_t>(count));
    return out;
  }
  const PolymerCatalog catalog = build_catalog(g, system, bc, kmax, options.enumeration);
  const PolymerChain chain(g, catalog);
  Rng rng(seed);
  ChainState state = chain.empty_state();
  for (long long t = 0; t < burn_in; ++t) chain.step(state, rng);
  const long long gap = spacing(g, options);
  for (long long c = 0; c < count; ++c) {
    if (c > 0)
      for (long long t = 0; t < gap; ++t) chain.step(state, rng);
    check_configuration_size(g, kmax, state.configuration);
    out.push_back(state.configuration);
  }
  return out;
}

PolymerConfiguration sample_configuration(const BipartiteRegularGraph& g, const SpinSystem& system,
                                          const Biclique& bc, double eps, std::uint64_t seed,
                                          const SamplerOptions& options) {
  return sample_configurations(g, system, bc, 1, eps, seed, options).front();
}

// ---- counting --------------------------------------------------------------

long long samples_per_ratio(int n, double eps, double fail_prob) {
  check_eps(eps);
  if (!(fail_prob > 0.0 && fail_prob < 1.0)) throw PreconditionError("fail_prob must lie in (0,1)");
  const double variance = std::exp(-3.0);
  const double s = eps / (4.0 * n) * (1.0 - std::exp(-3.0));
  const double m = (2.0 * variance + 2.0 * s / 3.0) * std::log(4.0 * n / fail_prob) / (s * s);
  return static_cast<long long>(std::ceil(m));
}

EstimateReport estimate_z_st(const BipartiteRegularGraph& g, const SpinSystem& system,
                             const Biclique& bc, double eps, double fail_prob, std::uint64_t seed,
                             const SamplerOptions& options) {
  EstimateReport report;
  report.biclique = bc;
  report.eps = eps;
  report.fail_prob = fail_prob;
  report.seed = seed;
  report.certified = check_sampling_condition(system, g.degree(), options);
  report.kmax = resolve_kmax(g.n(), g.degree(), eps, options.kmax_override);
  report.samples_per_ratio = samples_per_ratio(g.n(), eps, fail_prob);
  const int count = g.vertex_count();
  report.per_vertex_ratios.assign(static_cast<std::size_t>(count), 1.0);
  if (report.kmax == 0) return report;

  const PolymerCatalog catalog = build_catalog(g, system, bc, report.kmax, options.enumeration);
  const auto index = std::make_shared<const DistanceIndex>(g, kCompatibilityRadius);
  const long long burn_in = burn_in_steps(g.n(), eps, options.mixing_constant);
  const long long gap = spacing(g, options);
  const long long m = report.samples_per_ratio;
  std::vector<long long> used(static_cast<std::size_t>(count), 0);

  // Ratio i is μ_i(vertex i uncovered), where model i keeps polymers inside
  // {i, …, 2n−1}; the product of the ratios is Z_{2n}/Z_0 = 1/Z^{S,T}.
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    const PolymerChain chain(g, catalog, i, index);
    if (!chain.can_cover(i)) continue;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    ChainState state = chain.empty_state();
    for (long long t = 0; t < burn_in; ++t) chain.step(state, rng);
    long long uncovered = 0;
    for (long long s = 0; s < m; ++s) {
      for (long long t = 0; t < gap; ++t) chain.step(state, rng);
      if (state.covered[static_cast<std::size_t>(i)] < 0) ++uncovered;
    }
    report.per_vertex_ratios[static_cast<std::size_t>(i)] =
        static_cast<double>(uncovered) / static_cast<double>(m);
    used[static_cast<std::size_t>(i)] = m;
  }

  double log_z = 0.0;
  for (int i = 0; i < count; ++i) {
    const double r = report.per_vertex_ratios[static_cast<std::size_t>(i)];
    if (r <= 0.5)
      throw NumericFailure("estimated ratio at vertex " + std::to_string(i) + " is " +
                           std::to_string(r) + " <= 1/2; the weight-decay condition likely fails");
    log_z -= std::log(r);
    report.samples_used += used[static_cast<std::size_t>(i)];
  }
  report.log_z_st_estimate = log_z;
  report.z_st_estimate = std::exp(log_z);
  return report;
}

PmerEstimate estimate_z_pmer(const BipartiteRegularGraph& g, const SpinSystem& system,
                             const std::vector<Biclique>& bicliques, double eps, double fail_prob,
                             std::uint64_t seed, const SamplerOptions& options) {
  if (bicliques.empty()) throw PreconditionError("at least one biclique is required");
  PmerEstimate out;
  const double per_fail = fail_prob / static_cast<double>(bicliques.size());
  for (std::size_t k = 0; k < bicliques.size(); ++k) {
    const Biclique& bc = bicliques[k];
    if (!is_biclique(system, bc.left, bc.right) || bc.left == 0 || bc.right == 0)
      throw PreconditionError("not a nonempty biclique: " + format_biclique(bc));
    out.reports.push_back(estimate_z_st(g, system, bc, eps, per_fail, derive_seed(seed, k), options));
    out.log_terms.push_back(g.n() * std::log(system.activity_sum(bc.left)) +
                            g.n() * std::log(system.activity_sum(bc.right)) +
                            out.reports.back().log_z_st_estimate);
  }
  const double top = *std::max_element(out.log_terms.begin(), out.log_terms.end());
  double sum = 0.0;
  for (double t : out.log_terms) sum += std::exp(t - top);
  out.log_z_pmer = top + std::log(sum);
  return out;
}

std::vector<std::vector<int>> sample_spin_assignments(const BipartiteRegularGraph& g,
                                                      const SpinSystem& system,
                                                      const PmerEstimate& estimate, long long count,
                                                      double eps, std::uint64_t seed,
                                                      const SamplerOptions& options) {
  if (estimate.reports.empty()) throw PreconditionError("estimate has no bicliques");
  const std::size_t b = estimate.reports.size();
  std::vector<double> cumulative(b);
  double total = 0.0;
  for (std::size_t k = 0; k < b; ++k) {
    total += std::exp(estimate.log_terms[k] - estimate.log_z_pmer);
    cumulative[k] = total;
  }
  Rng rng(derive_seed(seed, 0));
  std::vector<std::size_t> choice(static_cast<std::size_t>(count));
  std::vector<long long> per(b, 0);
  for (auto& c : choice) {
    const double u = unit(rng) * total;
    c = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                 cumulative.begin());
    c = std::min(c, b - 1);
    ++per[c];
  }
  std::vector<std::vector<PolymerConfiguration>> drawn(b);
  for (std::size_t k = 0; k < b; ++k)
    if (per[k] > 0)
      drawn[k] = sample_configurations(g, system, estimate.reports[k].biclique, per[k], eps,
                                       derive_seed(seed, 1 + k), options);

  auto ground_draw = [&](SpinSet support) {
    const double mass = system.activity_sum(support);
    double u = unit(rng) * mass;
    int last = -1;
    for (int i : members(support)) {
      last = i;
      u -= system.lambda(i);
      if (u < 0.0) return i;
    }
    return last;
  };

  std::vector<std::size_t> next(b, 0);
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::size_t c : choice) {
    const Biclique& bc = estimate.reports[c].biclique;
    const PolymerConfiguration& config = drawn[c][next[c]++];
    std::vector<int> sigma(static_cast<std::size_t>(g.vertex_count()), -1);
    for (const auto& p : config.polymers)
      for (int k = 0; k < p.size(); ++k)
        sigma[static_cast<std::size_t>(p.vertices[static_cast<std::size_t>(k)])] =
            p.spins[static_cast<std::size_t>(k)];
    for (Vertex v = 0; v < g.vertex_count(); ++v)
      if (sigma[static_cast<std::size_t>(v)] < 0)
        sigma[static_cast<std::size_t>(v)] = ground_draw(g.is_left(v) ? bc.left : bc.right);
    out.push_back(std::move(sigma));
  }
  return out;
}

std::vector<int> sample_spin_assignment(const BipartiteRegularGraph& g, const SpinSystem& system,
                                        const std::vector<Biclique>& bicliques, double eps,
                                        std::uint64_t seed, const SamplerOptions& options) {
  const PmerEstimate estimate = estimate_z_pmer(g, system, bicliques, eps, 0.1, derive_seed(seed, 0), options);
  return sample_spin_assignments(g, system, estimate, 1, eps, derive_seed(seed, 1), options).front();
}

}  // namespace bipolymer
