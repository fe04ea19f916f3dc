#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bipolymer {

/// Set of spins in [q] as a bitmask; bit i is spin i. Limits q to 64.
using SpinSet = std::uint64_t;

constexpr int kMaxSpins = 64;

inline constexpr bool contains(SpinSet s, int spin) { return spin >= 0 && spin < 64 && ((s >> spin) & 1U); }
inline constexpr SpinSet singleton(int spin) { return SpinSet{1} << spin; }
inline constexpr SpinSet full_set(int q) {
  return q >= 64 ? ~SpinSet{0} : (SpinSet{1} << q) - 1;
}
SpinSet make_set(std::initializer_list<int> spins);
std::vector<int> members(SpinSet s);
int cardinality(SpinSet s);
/// "{0,1}"-style rendering.
std::string format_set(SpinSet s);

/// q-spin system with symmetric interaction matrix B in [0,1] and activities
/// λ in (0,1], both normalised to have maximum entry exactly 1.
class SpinSystem {
 public:
  /// `interaction` is row-major q×q. Throws PreconditionError on any
  /// violated invariant (asymmetry, range, normalisation, λ > 1).
  SpinSystem(int q, std::vector<double> interaction, std::vector<double> activity);

  static SpinSystem colorings(int q);
  /// Spin 0 is unoccupied (activity 1), spin 1 occupied (activity λ).
  static SpinSystem hardcore(double lambda);
  /// All-ones interaction with unit activities: no constraints at all.
  static SpinSystem unconstrained(int q);

  int q() const { return q_; }
  double b(int i, int j) const { return interaction_[static_cast<std::size_t>(i * q_ + j)]; }
  double lambda(int i) const { return activity_[static_cast<std::size_t>(i)]; }
  std::span<const double> interaction() const { return interaction_; }
  std::span<const double> activities() const { return activity_; }
  double min_lambda() const;
  double activity_sum(SpinSet s) const;

 private:
  int q_;
  std::vector<double> interaction_;
  std::vector<double> activity_;
};

struct Biclique {
  SpinSet left = 0;   // S: spins allowed on L in the ground state
  SpinSet right = 0;  // T: spins allowed on R in the ground state

  auto operator<=>(const Biclique&) const = default;
};

std::string format_biclique(const Biclique& bc);

bool is_biclique(const SpinSystem& system, SpinSet left, SpinSet right);

/// All maximal bicliques, sorted by (S, T) bitmask. Requires q ≤ 20.
std::vector<Biclique> enumerate_maximal_bicliques(const SpinSystem& system);

/// Largest entry of B strictly below 1, or 0 when every such entry is 0.
/// Empty when every entry of B equals 1 (δ undefined).
std::optional<double> delta_of_matrix(const SpinSystem& system);

/// g_S: λ restricted to S and renormalised. Throws on empty S.
std::vector<double> ground_state_vector(const SpinSystem& system, SpinSet support);

/// Δ(1−δ)min(λ) − 7q(5 + ln((q−1)Δ³/min λ)); nonnegative iff the polymer
/// weight-decay condition is certified. +∞ when δ is undefined (no spin can
/// ever deviate from a ground state, so there are no polymers).
double polymer_condition_margin(const SpinSystem& system, int delta);

/// τ = 5 + 3 ln((q−1)Δ³), the decay rate required of polymer weights.
double required_decay_rate(int q, int delta);

}  // namespace bipolymer
