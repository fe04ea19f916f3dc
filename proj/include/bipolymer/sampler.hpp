#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "bipolymer/bigraph.hpp"
#include "bipolymer/polymer.hpp"
#include "bipolymer/spin.hpp"

namespace bipolymer {

using Rng = std::mt19937_64;

struct SamplerOptions {
  /// Replaces the default truncation size; may exceed the size cap on tiny
  /// instances where the cap is 0.
  std::optional<int> kmax_override;
  /// Burn-in is ceil(C·n·ln(n/eps)) steps.
  double mixing_constant = 100.0;
  /// Chain steps between consecutive recorded samples; 0 means 2n.
  long long steps_per_sample = 0;
  /// Run even when polymer_condition_margin < 0. Results are then uncertified.
  bool allow_uncertified = false;
  EnumerationOptions enumeration{};
};

/// max(1, ceil(ln(2n/eps)/4)) capped by size_cap(n, Δ), or the override.
int resolve_kmax(int n, int degree, double eps, std::optional<int> kmax_override);

long long burn_in_steps(int n, double eps, double mixing_constant);

struct ChainState {
  PolymerConfiguration configuration;
  std::vector<int> covered;  // vertex → index into configuration.polymers, or −1
  long long step_count = 0;
};

/// The polymer chain for one biclique, truncated to |V_γ| ≤ kmax and to
/// polymers whose vertices are all ≥ `first_vertex` (the telescoping models).
///
/// A step picks v uniformly and flips a fair coin. Remove: the polymer covering
/// v, accepted with min(1, 1/(M|γ|)). Insert: γ ∋ v with probability
/// w(γ)/(M|γ|), otherwise nothing, accepted with min(1, M|γ|) if compatible.
/// M = max_v Σ_{γ∋v} w(γ)/|γ| makes the proposals sub-stochastic, and the
/// acceptance ratios give detailed balance for μ(Γ) ∝ Π w(γ).
class PolymerChain {
 public:
  /// `index` (radius ≥ 3) may be shared between chains on the same graph.
  PolymerChain(const BipartiteRegularGraph& g, const PolymerCatalog& catalog, Vertex first_vertex = 0,
               std::shared_ptr<const DistanceIndex> index = nullptr);

  ChainState empty_state() const;
  /// Builds the state (with its inverse index) for a valid configuration.
  ChainState state_from(const PolymerConfiguration& config) const;

  void step(ChainState& state, Rng& rng) const;

  /// Exact one-step law from `state`, aggregated by configuration key
  /// (the holding probability included).
  std::vector<std::pair<PolymerConfiguration, double>> transitions(const ChainState& state) const;

  /// True if some admissible polymer contains v.
  bool can_cover(Vertex v) const { return !local_[static_cast<std::size_t>(v)].empty(); }
  double normaliser() const { return normaliser_; }

 private:
  struct Proposal {
    int polymer;        // index into the catalog
    double cumulative;  // running sum of w/(M|γ|)
  };

  bool insertable(const ChainState& state, const Polymer& p) const;
  static void insert(ChainState& state, const Polymer& p);
  static void remove(ChainState& state, int slot);

  const BipartiteRegularGraph* g_;
  const PolymerCatalog* catalog_;
  std::shared_ptr<const DistanceIndex> index_;
  std::vector<std::vector<Proposal>> local_;
  double normaliser_ = 1.0;  // M
};

void chain_step(const PolymerChain& chain, ChainState& state, Rng& rng);

/// Final state of a chain run from empty for the burn-in time.
PolymerConfiguration sample_configuration(const BipartiteRegularGraph& g, const SpinSystem& system,
                                          const Biclique& bc, double eps, std::uint64_t seed,
                                          const SamplerOptions& options = {});

/// `count` configurations from one chain: burn-in, then one sample every
/// steps_per_sample steps.
std::vector<PolymerConfiguration> sample_configurations(const BipartiteRegularGraph& g,
                                                        const SpinSystem& system, const Biclique& bc,
                                                        long long count, double eps,
                                                        std::uint64_t seed,
                                                        const SamplerOptions& options = {});

struct EstimateReport {
  Biclique biclique;
  double z_st_estimate = 1.0;
  double log_z_st_estimate = 0.0;
  double eps = 0.0;
  double fail_prob = 0.0;
  long long samples_used = 0;
  std::uint64_t seed = 0;
  std::vector<double> per_vertex_ratios;  // ρ_1..ρ_2n, exactly 1 where no polymer fits
  int kmax = 0;
  long long samples_per_ratio = 0;
  bool certified = true;
};

/// Telescoping product over the vertex order 0..2n−1. Throws NumericFailure if
/// some estimated ratio is ≤ 1/2.
EstimateReport estimate_z_st(const BipartiteRegularGraph& g, const SpinSystem& system,
                             const Biclique& bc, double eps, double fail_prob, std::uint64_t seed,
                             const SamplerOptions& options = {});

/// Samples per ratio so that 2n ratio estimates, each within relative
/// eps/(4n) by Bernstein's inequality with variance ≤ e⁻³, hold jointly with
/// probability ≥ 1 − fail_prob.
long long samples_per_ratio(int n, double eps, double fail_prob);

struct PmerEstimate {
  double log_z_pmer = 0.0;
  std::vector<EstimateReport> reports;  // one per biclique
  /// ln((Σ_Sλ)ⁿ(Σ_Tλ)ⁿ Ẑ^{S,T}) per biclique.
  std::vector<double> log_terms;
};

PmerEstimate estimate_z_pmer(const BipartiteRegularGraph& g, const SpinSystem& system,
                             const std::vector<Biclique>& bicliques, double eps, double fail_prob,
                             std::uint64_t seed, const SamplerOptions& options = {});

/// Draws from the mixture induced by the estimate: biclique by its term, Γ by
/// the chain, ground spins from g_S / g_T on uncovered vertices.
std::vector<std::vector<int>> sample_spin_assignments(const BipartiteRegularGraph& g,
                                                      const SpinSystem& system,
                                                      const PmerEstimate& estimate, long long count,
                                                      double eps, std::uint64_t seed,
                                                      const SamplerOptions& options = {});

/// One draw, estimating the biclique terms first with fail_prob 0.1.
std::vector<int> sample_spin_assignment(const BipartiteRegularGraph& g, const SpinSystem& system,
                                        const std::vector<Biclique>& bicliques, double eps,
                                        std::uint64_t seed, const SamplerOptions& options = {});

/// Throws PreconditionError unless the margin is ≥ 0 or the override is set.
/// Returns whether the run is certified.
bool check_sampling_condition(const SpinSystem& system, int degree, const SamplerOptions& options);

}  // namespace bipolymer
