#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bipolymer/spin.hpp"

namespace bipolymer {

/// (B, λ) as used by the tree recursions. Unlike SpinSystem, activities are
/// not normalised: the hard-core analysis needs λ > 1 (e.g. λ = 5 at Δ = 3).
struct SpinWeights {
  int q = 0;
  std::vector<double> interaction;  // row-major q×q
  std::vector<double> activity;

  SpinWeights() = default;
  SpinWeights(const SpinSystem& system);  // NOLINT: implicit by intent
  SpinWeights(int q, std::vector<double> interaction, std::vector<double> activity);
  static SpinWeights hardcore(double lambda);

  double b(int i, int j) const { return interaction[static_cast<std::size_t>(i * q + j)]; }
};

struct ProbabilityPair {
  std::vector<double> r;
  std::vector<double> c;
};

/// One simultaneous update of the tree recursions
/// r_i ∝ λ_i (Σ_j B_ij c_j)^{Δ−1}, c_j ∝ λ_j (Σ_i B_ij r_i)^{Δ−1}.
ProbabilityPair tree_recursion_step(const SpinWeights& model, int delta, const ProbabilityPair& pair);

/// Sup-norm distance between a pair and its image under one recursion step.
double fixpoint_residual(const SpinWeights& model, int delta, const ProbabilityPair& pair);

/// Φ(r,c) = rᵀBc / (‖Λ⁻¹r‖_p ‖Λ⁻¹c‖_p), p = Δ/(Δ−1), Λ = diag(λ^{1/Δ}).
double phi_value(const SpinWeights& model, int delta, const ProbabilityPair& pair);

/// α_i = (λ_i^{−1/Δ} v_i / ‖Λ⁻¹v‖_p)^p; a probability vector.
std::vector<double> map_f(std::span<const double> activity, int delta, std::span<const double> v);

struct FixpointReport {
  ProbabilityPair pair;
  double phi = 0.0;
  /// Singular values of L, descending. The largest is 1 for every valid pair.
  std::vector<double> l_spectrum;
  bool hessian_dominant = false;
  std::vector<double> alpha_star;
  std::vector<double> beta_star;
  double residual = 0.0;
};

constexpr double kVectorFixpointTolerance = 1e-9;

/// Spectrum of L = {B_ij r_i c_j / √(r'_i c'_j)} with the Hessian-dominance
/// verdict (all but the top singular value below 1/(Δ−1)), Φ and (f(r), f(c)).
/// Throws NumericFailure if the pair is not a fixpoint within `tolerance`.
FixpointReport l_matrix_spectrum(const SpinWeights& model, int delta, const ProbabilityPair& pair,
                                 double tolerance = kVectorFixpointTolerance);

// ---- q-colorings, even q --------------------------------------------------

struct ColoringFixpointSolution {
  int q = 0;
  int delta = 0;
  double t = 0.0;     // 1 − 2/q
  int d = 0;          // Δ − 1
  double log_h = 0.0; // h = a/b may overflow a double at large Δ
  double h = 0.0;
  double a = 0.0;
  double b = 0.0;
  double a_prime = 0.0;
  double b_prime = 0.0;
  double residual = 0.0;  // |f(h) − h| / h

  /// Maximiser for biclique (S, [q]\S): r = a on S, b off S; c swapped.
  ProbabilityPair pair(SpinSet s) const;
};

/// Fixpoint h > 1 of x ↦ ((x+t)/(tx+1))^d, solved in log space.
ColoringFixpointSolution solve_coloring_fixpoint(int q, int delta);

struct ColoringMaximalityVerdict {
  bool verdict = false;       // bound_holds && hessian_dominant
  bool bound_holds = false;   // b' ≤ 1/(15Δq)
  double margin = 0.0;        // 1/(15Δq) − b'
  double b_prime = 0.0;
  bool hessian_dominant = false;
  ColoringFixpointSolution solution;
};

ColoringMaximalityVerdict verify_coloring_maximality(int q, int delta);

struct ColoringFailureVerdict {
  bool verdict = false;  // b' > 1/(Δq)
  double b_prime = 0.0;
  double threshold = 0.0;
  ColoringFixpointSolution solution;
};

/// Requires 4Δ/ln Δ ≤ q < Δ.
ColoringFailureVerdict verify_coloring_failure(int q, int delta);

// ---- hard-core --------------------------------------------------------------

/// λ_c(Δ) = (Δ−1)^{Δ−1}/(Δ−2)^Δ; +∞ for Δ ≤ 2.
double hardcore_critical_activity(int delta);

struct HardcoreFixpointSolution {
  int delta = 0;
  double lambda = 0.0;
  double x0 = 0.0;          // symmetric fixpoint of x ↦ λ/(1+x)^{Δ−1}
  bool nontrivial = false;  // false in the uniqueness regime λ ≤ λ_c(Δ)
  double x = 0.0;           // nontrivial pair, x < 1/(Δ−2) < y
  double y = 0.0;
  double residual = 0.0;    // |g(g(x)) − x| / x
  ProbabilityPair pair;     // r = (1,x)/(1+x), c = (1,y)/(1+y)
  std::vector<double> alpha_star;
  std::vector<double> beta_star;

  ProbabilityPair symmetric_pair() const;
};

HardcoreFixpointSolution solve_hardcore_fixpoints(int delta, double lambda);

struct HardcoreMaximalityVerdict {
  bool verdict = false;        // deviation ≤ 1/(30Δ) && hessian_dominant
  double deviation = 0.0;      // max(α*_1, λ/(1+λ) − β*_1)
  double threshold = 0.0;      // 1/(30Δ)
  bool x_bound_holds = false;  // x ≤ 1/(30λΔ²)
  bool hessian_dominant = false;
  HardcoreFixpointSolution solution;
};

/// Requires Δ ≥ 50 and λΔ ≥ 50; throws if λ is in the uniqueness regime.
HardcoreMaximalityVerdict verify_hardcore_maximality(int delta, double lambda);

// ---- general systems --------------------------------------------------------

struct MaximizerSearchOptions {
  int starts = 100;
  std::uint64_t seed = 1;
  int max_iterations = 50000;
  double gradient_tolerance = 1e-12;
  double merge_tolerance = 1e-6;
};

/// Multi-start exponentiated-gradient ascent of log Φ over the product of
/// simplices. Returns distinct local maxima sorted by Φ (descending), then
/// lexicographically. Completeness is not certified.
std::vector<FixpointReport> find_phi_maximizers(const SpinWeights& model, int delta,
                                                const MaximizerSearchOptions& options = {});

/// ∂ log Φ / ∂ log r_i and ∂ log Φ / ∂ log c_j (each block sums to zero).
ProbabilityPair log_phi_gradient(const SpinWeights& model, int delta, const ProbabilityPair& pair);

}  // namespace bipolymer
