#pragma once

#include <string>
#include <vector>

#include "bipolymer/bigraph.hpp"
#include "bipolymer/spin.hpp"

namespace bipolymer {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

constexpr int kCriterionCount = 11;

CriterionResult run_criterion(int id);
/// `ids` empty runs all criteria in order.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {});

/// Small instances whose configuration spaces are exhaustively enumerable.
/// The size cap is 0 at this scale, so each carries an explicit kmax.
struct TinyInstance {
  std::string name;
  BipartiteRegularGraph graph;
  SpinSystem system;
  Biclique biclique;
  int kmax = 1;
};

std::vector<TinyInstance> tiny_instances();

/// Exact transition matrix of the chain against μ^{S,T}.
struct ChainExactness {
  std::size_t states = 0;
  double balance_violation = 0.0;  // max |μ(x)P(x,y) − μ(y)P(y,x)|
  double row_sum_error = 0.0;      // max |Σ_y P(x,y) − 1|
  double stationary_tv = 0.0;      // TV(solved stationary vector, μ)
  bool closed = true;              // every transition stays in μ's support
};

ChainExactness check_chain_exactness(const BipartiteRegularGraph& g, const SpinSystem& system,
                                     const Biclique& bc, int kmax);

struct PmerDiagnostic {
  std::string name;
  int kmax = 0;
  double log_z_pmer = 0.0;
  double log_z = 0.0;
  double ratio = 0.0;  // Z^pmer / Z_G
};

/// Z^pmer/Z_G on the tiny suite, at the size cap and at each instance's kmax.
std::vector<PmerDiagnostic> pmer_diagnostics();

}  // namespace bipolymer
