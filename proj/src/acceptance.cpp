#include "bipolymer/acceptance.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "bipolymer/errors.hpp"
#include "bipolymer/oracle.hpp"
#include "bipolymer/phases.hpp"
#include "bipolymer/polymer.hpp"
#include "bipolymer/rng.hpp"
#include "bipolymer/sampler.hpp"

namespace bipolymer {

namespace {

const Biclique kHardcoreLeftDeviates{make_set({0}), make_set({0, 1})};
const Biclique kHardcoreRightDeviates{make_set({0, 1}), make_set({0})};
const Biclique kColoringSplit{make_set({0, 1}), make_set({2, 3})};

double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(6);
  out << x;
  return out.str();
}

SamplerOptions tiny_options(int kmax) {
  SamplerOptions options;
  options.kmax_override = kmax;
  options.allow_uncertified = true;  // Δ = 3 is far outside the certified regime
  return options;
}

// ---- 1: polymer partition function vs restricted spin sum ------------------

CriterionResult polymer_identity() {
  CriterionResult r{1, "polymer partition function equals restricted spin sum", true, "", 0.0};
  const std::vector<SpinSystem> models{SpinSystem::hardcore(1.0), SpinSystem::hardcore(0.5),
                                       SpinSystem::colorings(4)};
  double worst = 0.0;
  long long comparisons = 0;
  int graphs = 0;
  for (int n : {4, 6, 8, 12})
    for (int s = 0; s < 5; ++s, ++graphs) {
      const auto g = generate(n, 3, derive_seed(1, static_cast<std::uint64_t>(graphs)));
      for (const auto& system : models)
        for (const auto& bc : enumerate_maximal_bicliques(system))
          for (int cap : {size_cap(n, 3), 1, 2, 3}) {
            const double z = exact_polymer_partition_function(g, system, bc, cap);
            const double direct = restricted_spin_sum(g, system, bc, cap);
            worst = std::max(worst, relative_error(z, direct));
            ++comparisons;
          }
    }
  r.passed = worst <= 1e-9;
  r.detail = std::to_string(graphs) + " graphs, " + std::to_string(comparisons) +
             " comparisons (caps: default cap and 1..3), max relative error " + fmt(worst);
  return r;
}

// ---- 2: chain transition matrix --------------------------------------------

CriterionResult chain_exactness() {
  CriterionResult r{2, "chain detailed balance and stationarity", true, "", 0.0};
  double balance = 0.0, tv = 0.0;
  int used = 0;
  std::ostringstream states;
  for (const auto& inst : tiny_instances()) {
    const auto check = check_chain_exactness(inst.graph, inst.system, inst.biclique, inst.kmax);
    if (check.states > 5000) continue;
    ++used;
    balance = std::max(balance, check.balance_violation);
    tv = std::max(tv, check.stationary_tv);
    if (!check.closed || check.row_sum_error > 1e-12) r.passed = false;
    states << (used > 1 ? "," : "") << check.states;
  }
  r.passed = r.passed && used >= 5 && balance <= 1e-12 && tv <= 1e-10;
  r.detail = std::to_string(used) + " instances (states " + states.str() + "), max balance violation " +
             fmt(balance) + ", max stationary TV " + fmt(tv);
  return r;
}

// ---- 3: sampling accuracy ---------------------------------------------------

CriterionResult sampling_accuracy() {
  CriterionResult r{3, "sampling accuracy on a tiny hard-core instance", true, "", 0.0};
  const TinyInstance inst = tiny_instances().front();
  std::map<ConfigurationKey, double> exact;
  for (const auto& e : exact_mu_st(inst.graph, inst.system, inst.biclique, inst.kmax))
    exact[e.key] = e.probability;
  constexpr long long kSamples = 100000;
  int successes = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto draws = sample_configurations(inst.graph, inst.system, inst.biclique, kSamples, 0.05,
                                             derive_seed(3, static_cast<std::uint64_t>(trial)),
                                             tiny_options(inst.kmax));
    std::map<ConfigurationKey, double> empirical;
    for (const auto& c : draws) empirical[configuration_key(c)] += 1.0 / kSamples;
    const double d = total_variation(empirical, exact);
    worst = std::max(worst, d);
    if (d <= 0.05) ++successes;
  }
  r.passed = successes >= 18;
  r.detail = inst.name + ": " + std::to_string(successes) + "/20 trials with TV <= 0.05 (" +
             std::to_string(kSamples) + " samples each), worst TV " + fmt(worst);
  return r;
}

// ---- 4: counting accuracy ---------------------------------------------------

CriterionResult counting_accuracy() {
  CriterionResult r{4, "counting accuracy of the telescoping estimator", true, "", 0.0};
  std::ostringstream detail;
  const auto instances = tiny_instances();
  for (const std::size_t pick : {std::size_t{0}, std::size_t{3}}) {
    const auto& inst = instances[pick];
    const double exact = exact_polymer_partition_function(inst.graph, inst.system, inst.biclique, inst.kmax);
    int within = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const auto report = estimate_z_st(inst.graph, inst.system, inst.biclique, 0.05, 0.1,
                                        derive_seed(4, static_cast<std::uint64_t>(trial)),
                                        tiny_options(inst.kmax));
      const double err = relative_error(report.z_st_estimate, exact);
      worst = std::max(worst, err);
      if (err <= 0.05) ++within;
    }
    if (within < 18) r.passed = false;
    detail << inst.name << ": " << within << "/20 within 5% (Z=" << fmt(exact)
           << ", worst relative error " << fmt(worst) << "); ";
  }
  r.detail = detail.str();
  return r;
}

// ---- 5–7: closed-form fixpoint bounds --------------------------------------

CriterionResult coloring_maximality() {
  CriterionResult r{5, "coloring maximality bounds, q = 4", true, "", 0.0};
  std::ostringstream detail;
  for (int delta : {170, 200, 300, 556, 1000}) {
    const auto v = verify_coloring_maximality(4, delta);
    const bool ok = v.solution.log_h > (delta - 1) / 8.0 && v.bound_holds && v.solution.residual <= 1e-12;
    if (!ok) r.passed = false;
    detail << "Δ=" << delta << ": ln h=" << fmt(v.solution.log_h) << " b'=" << fmt(v.b_prime)
           << (ok ? " ok; " : " FAIL; ");
  }
  r.detail = detail.str();
  return r;
}

CriterionResult coloring_failure() {
  CriterionResult r{6, "maximality failure for large q", true, "", 0.0};
  std::ostringstream detail;
  for (auto [q, delta] : {std::pair{88, 100}, std::pair{90, 100}, std::pair{120, 130}}) {
    const auto v = verify_coloring_failure(q, delta);
    const bool ok = v.solution.log_h < 4.0 * (delta - 1) / q && v.verdict;
    if (!ok) r.passed = false;
    detail << "(q,Δ)=(" << q << "," << delta << "): ln h=" << fmt(v.solution.log_h)
           << " b'=" << fmt(v.b_prime) << " > " << fmt(v.threshold) << (ok ? " ok; " : " FAIL; ");
  }
  r.detail = detail.str();
  return r;
}

CriterionResult hardcore_bounds() {
  CriterionResult r{7, "hard-core fixpoint bounds", true, "", 0.0};
  std::ostringstream detail;
  for (auto [delta, lambda] : {std::pair{50, 1.0}, std::pair{100, 0.5}, std::pair{200, 0.25}, std::pair{60, 1.0}}) {
    const auto v = verify_hardcore_maximality(delta, lambda);
    const bool ok = v.x_bound_holds && v.deviation <= v.threshold;
    if (!ok) r.passed = false;
    detail << "(Δ,λ)=(" << delta << "," << lambda << "): x=" << fmt(v.solution.x)
           << " dev=" << fmt(v.deviation) << (ok ? " ok; " : " FAIL; ");
  }
  r.detail = detail.str();
  return r;
}

// ---- 8: Hessian dominance ---------------------------------------------------

CriterionResult hessian_dominance() {
  CriterionResult r{8, "Hessian dominance", true, "", 0.0};
  double worst = 0.0;
  for (int q = 3; q <= 10; ++q) {
    const std::vector<double> uniform(static_cast<std::size_t>(q), 1.0 / q);
    const auto report = l_matrix_spectrum(SpinSystem::colorings(q), 3, {uniform, uniform});
    worst = std::max(worst, std::abs(report.l_spectrum.at(1) - 1.0 / (q - 1)));
  }
  const auto asym = verify_hardcore_maximality(50, 1.0);
  const auto sym = solve_hardcore_fixpoints(3, 5.0);
  const auto sym_report = l_matrix_spectrum(SpinWeights::hardcore(5.0), 3, sym.symmetric_pair());
  r.passed = worst <= 1e-8 && asym.hessian_dominant && !sym_report.hessian_dominant;
  r.detail = "uniform colorings q=3..10: max |s2 - 1/(q-1)| = " + fmt(worst) +
             "; hard-core (50,1) asymmetric dominant=" + (asym.hessian_dominant ? "yes" : "no") +
             "; hard-core (3,5) symmetric dominant=" + (sym_report.hessian_dominant ? "yes" : "no") +
             " (s2=" + fmt(sym_report.l_spectrum.at(1)) + ")";
  return r;
}

// ---- 9: expansion -----------------------------------------------------------

CriterionResult expansion() {
  CriterionResult r{9, "expansion conditions", true, "", 0.0};
  int failures = 0;
  for (int delta = 3; delta <= 1000; ++delta) {
    if (!bassalygo_condition(delta, 1.0 / (3 * delta), (delta - 1) / 2.0)) ++failures;
    if (!bassalygo_condition(delta, 1.0 / (6 * delta), delta / 7.0 + 1.0)) ++failures;
  }
  long long sets = 0;
  int graph_failures = 0;
  for (int seed = 0; seed < 10; ++seed)
    for (int n : {9, 12}) {
      const auto g = generate(n, 3, derive_seed(9, static_cast<std::uint64_t>(seed * 100 + n)));
      for (auto mode : {ExpansionMode::kPlus, ExpansionMode::kBoundary}) {
        const auto report = check_expansion_smallsets(g, mode);
        sets += report.sets_checked;
        if (!report.holds) ++graph_failures;
      }
    }
  r.passed = failures == 0 && graph_failures == 0;
  r.detail = "Bassalygo failures over Δ=3..1000: " + std::to_string(failures) +
             "; small-set checks on 20 graphs (n=9,12, Δ=3, both modes): " + std::to_string(graph_failures) +
             " failures, " + std::to_string(sets) + " sets examined";
  return r;
}

// ---- 10: weight decay -------------------------------------------------------

CriterionResult weight_decay() {
  CriterionResult r{10, "polymer weight decay", true, "", 0.0};
  const int n = 2400, delta = 400;
  const auto g = generate(n, delta, 10);
  const auto system = SpinSystem::hardcore(1.0);
  const double tau = required_decay_rate(system.q(), delta);
  const int cap = size_cap(n, delta);
  long long polymers = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();  // max of ln w + τ|γ|
  for (const auto& bc : {kHardcoreLeftDeviates, kHardcoreRightDeviates}) {
    const auto catalog = build_catalog(g, system, bc, cap);
    for (const auto& wp : catalog.polymers) {
      ++polymers;
      worst_excess = std::max(worst_excess, polymer_log_weight(g, system, bc, wp.polymer) + tau * wp.polymer.size());
    }
  }
  const bool decay_ok = polymers > 0 && worst_excess <= 0.0;

  long long tiny_polymers = 0;
  double worst_ratio = 0.0;  // max w / analytic bound
  auto check_bound = [&](const BipartiteRegularGraph& tg, const SpinSystem& s, const Biclique& bc, int kmax) {
    const double delta_b = delta_of_matrix(s).value_or(0.0);
    const double shrink = 1.0 - (1.0 - delta_b) * s.min_lambda() / s.q();
    for (const auto& wp : build_catalog(tg, s, bc, kmax).polymers) {
      ++tiny_polymers;
      const auto size = static_cast<double>(wp.polymer.size());
      const auto edge = static_cast<double>(boundary(tg, wp.polymer.vertices).size());
      const double bound = std::pow(s.min_lambda(), -size) * std::pow(shrink, edge);
      worst_ratio = std::max(worst_ratio, wp.weight / bound);
    }
  };
  for (const auto& inst : tiny_instances())
    for (const auto& bc : enumerate_maximal_bicliques(inst.system))
      check_bound(inst.graph, inst.system, bc, inst.kmax);
  const bool analytic_ok = worst_ratio <= 1.0 + 1e-12;
  r.passed = decay_ok && analytic_ok;
  r.detail = "n=2400, Δ=400, size cap " + std::to_string(cap) + ": " + std::to_string(polymers) +
             " polymers, max ln w + τ|γ| = " + fmt(worst_excess) + " (τ=" + fmt(tau) + "); tiny suite: " +
             std::to_string(tiny_polymers) + " polymers, max w / analytic bound = " + fmt(worst_ratio);
  return r;
}

// ---- 11: Z^pmer / Z_G -------------------------------------------------------

CriterionResult pmer_ratio() {
  CriterionResult r{11, "Z^pmer / Z_G diagnostic (report only)", true, "", 0.0};
  std::ostringstream detail;
  for (const auto& d : pmer_diagnostics()) {
    if (!(std::isfinite(d.ratio) && d.ratio > 0.0)) r.passed = false;
    detail << d.name << " kmax=" << d.kmax << ": " << fmt(d.ratio) << "; ";
  }
  r.detail = detail.str();
  return r;
}

}  // namespace

std::vector<TinyInstance> tiny_instances() {
  std::vector<TinyInstance> out;
  const auto hc1 = SpinSystem::hardcore(1.0);
  const auto hc05 = SpinSystem::hardcore(0.5);
  const auto col4 = SpinSystem::colorings(4);
  out.push_back({"hardcore(1) n=6 kmax=1", generate(6, 3, 601), hc1, kHardcoreLeftDeviates, 1});
  out.push_back({"hardcore(1) n=6 kmax=2", generate(6, 3, 602), hc1, kHardcoreLeftDeviates, 2});
  out.push_back({"hardcore(0.5) n=6 kmax=2", generate(6, 3, 603), hc05, kHardcoreRightDeviates, 2});
  out.push_back({"colorings(4) n=8 kmax=1", generate(8, 3, 801), col4, kColoringSplit, 1});
  out.push_back({"hardcore(1) n=8 kmax=2", generate(8, 3, 802), hc1, kHardcoreRightDeviates, 2});
  out.push_back({"colorings(4) n=4 kmax=2", generate(4, 3, 401), col4, kColoringSplit, 2});
  return out;
}

ChainExactness check_chain_exactness(const BipartiteRegularGraph& g, const SpinSystem& system,
                                     const Biclique& bc, int kmax) {
  const auto mu = exact_mu_st(g, system, bc, kmax);
  std::map<ConfigurationKey, int> position;
  for (std::size_t i = 0; i < mu.size(); ++i) position.emplace(mu[i].key, static_cast<int>(i));
  const auto catalog = build_catalog(g, system, bc, kmax);
  const PolymerChain chain(g, catalog);

  ChainExactness out;
  out.states = mu.size();
  const int m = static_cast<int>(mu.size());
  std::vector<Eigen::Triplet<double>> entries;
  for (int x = 0; x < m; ++x) {
    double row = 0.0;
    for (const auto& [config, p] : chain.transitions(chain.state_from(mu[static_cast<std::size_t>(x)].configuration))) {
      const auto it = position.find(configuration_key(config));
      if (it == position.end()) {
        out.closed = false;
        continue;
      }
      entries.emplace_back(x, it->second, p);
      row += p;
    }
    out.row_sum_error = std::max(out.row_sum_error, std::abs(row - 1.0));
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> p(m, m);
  p.setFromTriplets(entries.begin(), entries.end());
  for (const auto& t : entries) {
    const double forward = mu[static_cast<std::size_t>(t.row())].probability * t.value();
    const double backward = mu[static_cast<std::size_t>(t.col())].probability * p.coeff(t.col(), t.row());
    out.balance_violation = std::max(out.balance_violation, std::abs(forward - backward));
  }

  // Stationary vector: (Pᵀ − I)π = 0 with the last equation replaced by Σπ = 1.
  std::vector<Eigen::Triplet<double>> system_entries;
  for (const auto& t : entries)
    if (t.col() != m - 1) system_entries.emplace_back(t.col(), t.row(), t.value());
  for (int x = 0; x < m - 1; ++x) system_entries.emplace_back(x, x, -1.0);
  for (int x = 0; x < m; ++x) system_entries.emplace_back(m - 1, x, 1.0);
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(system_entries.begin(), system_entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(a);
  if (solver.info() != Eigen::Success) throw NumericFailure("stationary system is singular");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(m - 1) = 1.0;
  const Eigen::VectorXd pi = solver.solve(rhs);
  std::vector<double> exact(static_cast<std::size_t>(m)), solved(static_cast<std::size_t>(m));
  for (int x = 0; x < m; ++x) {
    exact[static_cast<std::size_t>(x)] = mu[static_cast<std::size_t>(x)].probability;
    solved[static_cast<std::size_t>(x)] = pi(x);
  }
  out.stationary_tv = total_variation(solved, exact);
  return out;
}

std::vector<PmerDiagnostic> pmer_diagnostics() {
  std::vector<PmerDiagnostic> out;
  for (const auto& inst : tiny_instances()) {
    const auto bicliques = enumerate_maximal_bicliques(inst.system);
    const double log_z = std::log(exact_partition_function(inst.graph, inst.system));
    for (int kmax : {size_cap(inst.graph.n(), inst.graph.degree()), inst.kmax}) {
      PmerDiagnostic d{inst.name, kmax, exact_log_z_pmer(inst.graph, inst.system, bicliques, kmax), log_z, 0.0};
      d.ratio = std::exp(d.log_z_pmer - d.log_z);
      out.push_back(d);
    }
  }
  return out;
}

CriterionResult run_criterion(int id) {
  static const std::vector<std::function<CriterionResult()>> table{
      polymer_identity, chain_exactness, sampling_accuracy, counting_accuracy,
      coloring_maximality, coloring_failure, hardcore_bounds, hessian_dominance,
      expansion, weight_decay, pmer_ratio};
  if (id < 1 || id > kCriterionCount) throw PreconditionError("no acceptance criterion " + std::to_string(id));
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = table[static_cast<std::size_t>(id - 1)]();
  } catch (const std::exception& e) {
    r = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what(), 0.0};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids) {
  std::vector<CriterionResult> out;
  if (ids.empty())
    for (int id = 1; id <= kCriterionCount; ++id) out.push_back(run_criterion(id));
  else
    for (int id : ids) out.push_back(run_criterion(id));
  return out;
}

}  // namespace bipolymer
