#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "bipolymer/bigraph.hpp"
#include "bipolymer/polymer.hpp"
#include "bipolymer/spin.hpp"

namespace bipolymer {

// Brute-force ground truth. Every routine here is exhaustive and guarded by a
// budget; none of them is meant to scale.

/// Z_G by enumerating σ|L; the R side factorises given σ|L. Requires qⁿ ≤ 10⁸.
/// Parallel over fixed chunks of L-assignments with a fixed reduction order,
/// so the result does not depend on the thread count.
double exact_partition_function(const BipartiteRegularGraph& g, const SpinSystem& system);
double exact_partition_function_serial(const BipartiteRegularGraph& g, const SpinSystem& system);

struct PhaseHistogram {
  std::vector<int> alpha_counts;  // n·α
  std::vector<int> beta_counts;   // n·β
  double mass = 0.0;              // Z^{α,β}

  std::vector<double> alpha() const;
  std::vector<double> beta() const;
};

/// Z^{α,β} for every achievable (α,β), sorted by (α, β) counts. R side by a
/// dynamic program over count vectors. Requires qⁿ(n+1)^q ≤ 10⁹.
std::vector<PhaseHistogram> exact_phase_decomposition(const BipartiteRegularGraph& g,
                                                      const SpinSystem& system);
std::vector<PhaseHistogram> exact_phase_decomposition_serial(const BipartiteRegularGraph& g,
                                                             const SpinSystem& system);

struct OracleBudget {
  long long states = 50'000'000;
};

/// Exact Z^{S,T} over polymers of size ≤ kmax (kmax < 0: the size cap), by
/// summing over compatible families of polymer vertex sets.
double exact_polymer_partition_function(const BipartiteRegularGraph& g, const SpinSystem& system,
                                        const Biclique& bc, int kmax = -1,
                                        const OracleBudget& budget = {});

/// Σ_{σ∈Σ^{S,T}} w_G(σ) / ((Σ_Sλ)ⁿ(Σ_Tλ)ⁿ), where Σ^{S,T} holds the
/// assignments whose deviating vertices split into radius-3 components of
/// size ≤ kmax. Computed without any polymer code: enumerate deviating sets
/// and labels, then sum the ground spins of every other vertex in closed form.
double restricted_spin_sum(const BipartiteRegularGraph& g, const SpinSystem& system,
                           const Biclique& bc, int kmax = -1, const OracleBudget& budget = {});

/// ln Σ_bc (Σ_Sλ)ⁿ(Σ_Tλ)ⁿ Z^{S,T} with exact Z^{S,T}.
double exact_log_z_pmer(const BipartiteRegularGraph& g, const SpinSystem& system,
                        const std::vector<Biclique>& bicliques, int kmax = -1,
                        const OracleBudget& budget = {});

struct ConfigurationProbability {
  PolymerConfiguration configuration;
  ConfigurationKey key;
  double weight = 0.0;
  double probability = 0.0;
};

/// μ^{S,T} over configurations of polymers of size ≤ kmax, sorted by key.
/// Throws BudgetExceeded past `max_states` configurations.
std::vector<ConfigurationProbability> exact_mu_st(const BipartiteRegularGraph& g,
                                                  const SpinSystem& system, const Biclique& bc,
                                                  int kmax = -1, long long max_states = 5000);

using SpinAssignment = std::vector<int>;

/// Law of sample_spin_assignments when every Ẑ^{S,T} is exact.
std::map<SpinAssignment, double> exact_pmer_spin_distribution(const BipartiteRegularGraph& g,
                                                              const SpinSystem& system,
                                                              const std::vector<Biclique>& bicliques,
                                                              int kmax = -1,
                                                              long long max_states = 1'000'000);

/// ½ Σ|p − q| over aligned vectors; throws PreconditionError on length mismatch.
double total_variation(std::span<const double> p, std::span<const double> q);

/// ½ Σ|p − q| over the union of the supports.
template <typename Key>
double total_variation(const std::map<Key, double>& p, const std::map<Key, double>& q) {
  double sum = 0.0;
  auto a = p.begin();
  auto b = q.begin();
  while (a != p.end() || b != q.end()) {
    if (b == q.end() || (a != p.end() && a->first < b->first)) {
      sum += std::abs(a->second);
      ++a;
    } else if (a == p.end() || b->first < a->first) {
      sum += std::abs(b->second);
      ++b;
    } else {
      sum += std::abs(a->second - b->second);
      ++a;
      ++b;
    }
  }
  return 0.5 * sum;
}

}  // namespace bipolymer
