#include "bipolymer/phases.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "bipolymer/errors.hpp"
#include "bipolymer/rng.hpp"

namespace bipolymer {

SpinWeights::SpinWeights(const SpinSystem& system)
    : q(system.q()),
      interaction(system.interaction().begin(), system.interaction().end()),
      activity(system.activities().begin(), system.activities().end()) {}

SpinWeights::SpinWeights(int q_, std::vector<double> interaction_, std::vector<double> activity_)
    : q(q_), interaction(std::move(interaction_)), activity(std::move(activity_)) {
  if (q < 1 || interaction.size() != static_cast<std::size_t>(q) * q ||
      activity.size() != static_cast<std::size_t>(q))
    throw PreconditionError("spin weights have inconsistent dimensions");
  for (double l : activity)
    if (!(l > 0.0)) throw PreconditionError("activities must be positive");
}

SpinWeights SpinWeights::hardcore(double lambda) {
  return SpinWeights(2, {1.0, 1.0, 1.0, 0.0}, {1.0, lambda});
}

namespace {

void require_degree(int delta) {
  if (delta < 2) throw PreconditionError("tree recursions need delta >= 2");
}

void require_pair(const SpinWeights& model, const ProbabilityPair& pair) {
  if (pair.r.size() != static_cast<std::size_t>(model.q) ||
      pair.c.size() != static_cast<std::size_t>(model.q))
    throw PreconditionError("probability pair has wrong dimension");
}

// (B c)_i for the row side, (Bᵀ r)_j for the column side.
std::vector<double> row_fields(const SpinWeights& m, std::span<const double> c) {
  std::vector<double> out(static_cast<std::size_t>(m.q), 0.0);
  for (int i = 0; i < m.q; ++i)
    for (int j = 0; j < m.q; ++j) out[static_cast<std::size_t>(i)] += m.b(i, j) * c[static_cast<std::size_t>(j)];
  return out;
}

std::vector<double> col_fields(const SpinWeights& m, std::span<const double> r) {
  std::vector<double> out(static_cast<std::size_t>(m.q), 0.0);
  for (int i = 0; i < m.q; ++i)
    for (int j = 0; j < m.q; ++j) out[static_cast<std::size_t>(j)] += m.b(i, j) * r[static_cast<std::size_t>(i)];
  return out;
}

std::vector<double> normalized_power(const SpinWeights& m, int delta, const std::vector<double>& field) {
  const double d = delta - 1;
  std::vector<double> logw(field.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < field.size(); ++i) {
    logw[i] = field[i] > 0.0 ? std::log(m.activity[i]) + d * std::log(field[i])
                             : -std::numeric_limits<double>::infinity();
    top = std::max(top, logw[i]);
  }
  if (!std::isfinite(top)) throw NumericFailure("tree recursion normalisation constant is zero");
  std::vector<double> out(field.size());
  double total = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) total += out[i] = std::exp(logw[i] - top);
  for (double& v : out) v /= total;
  return out;
}

double p_norm_scaled(std::span<const double> activity, int delta, std::span<const double> v) {
  const double p = static_cast<double>(delta) / (delta - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    total += std::pow(std::pow(activity[i], -1.0 / delta) * std::abs(v[i]), p);
  return std::pow(total, 1.0 / p);
}

double bilinear(const SpinWeights& m, const ProbabilityPair& pair) {
  double total = 0.0;
  for (int i = 0; i < m.q; ++i)
    for (int j = 0; j < m.q; ++j)
      total += pair.r[static_cast<std::size_t>(i)] * m.b(i, j) * pair.c[static_cast<std::size_t>(j)];
  return total;
}

FixpointReport make_report(const SpinWeights& model, int delta, const ProbabilityPair& pair) {
  FixpointReport report;
  report.pair = pair;
  report.residual = fixpoint_residual(model, delta, pair);
  report.phi = phi_value(model, delta, pair);
  report.alpha_star = map_f(model.activity, delta, pair.r);
  report.beta_star = map_f(model.activity, delta, pair.c);

  const auto bc = row_fields(model, pair.c);
  const auto br = col_fields(model, pair.r);
  // L_ij = B_ij r_i c_j / √(r'_i c'_j) = B_ij √(r_i/(Bc)_i) √(c_j/(Bᵀr)_j).
  Eigen::MatrixXd l(model.q, model.q);
  for (int i = 0; i < model.q; ++i) {
    const double ri = pair.r[static_cast<std::size_t>(i)];
    const double left = ri > 0.0 ? std::sqrt(ri / bc[static_cast<std::size_t>(i)]) : 0.0;
    for (int j = 0; j < model.q; ++j) {
      const double cj = pair.c[static_cast<std::size_t>(j)];
      const double right = cj > 0.0 ? std::sqrt(cj / br[static_cast<std::size_t>(j)]) : 0.0;
      l(i, j) = model.b(i, j) * left * right;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(l);
  const auto& sv = svd.singularValues();
  report.l_spectrum.assign(sv.data(), sv.data() + sv.size());
  std::sort(report.l_spectrum.begin(), report.l_spectrum.end(), std::greater<>());
  const double limit = 1.0 / (delta - 1);
  report.hessian_dominant =
      std::all_of(report.l_spectrum.begin() + 1, report.l_spectrum.end(),
                  [limit](double s) { return s < limit; });
  return report;
}

}  // namespace

ProbabilityPair tree_recursion_step(const SpinWeights& model, int delta, const ProbabilityPair& pair) {
  require_degree(delta);
  require_pair(model, pair);
  return {normalized_power(model, delta, row_fields(model, pair.c)),
          normalized_power(model, delta, col_fields(model, pair.r))};
}

double fixpoint_residual(const SpinWeights& model, int delta, const ProbabilityPair& pair) {
  const auto next = tree_recursion_step(model, delta, pair);
  double worst = 0.0;
  for (int i = 0; i < model.q; ++i) {
    worst = std::max(worst, std::abs(next.r[static_cast<std::size_t>(i)] - pair.r[static_cast<std::size_t>(i)]));
    worst = std::max(worst, std::abs(next.c[static_cast<std::size_t>(i)] - pair.c[static_cast<std::size_t>(i)]));
  }
  return worst;
}

double phi_value(const SpinWeights& model, int delta, const ProbabilityPair& pair) {
  require_degree(delta);
  require_pair(model, pair);
  const double denominator =
      p_norm_scaled(model.activity, delta, pair.r) * p_norm_scaled(model.activity, delta, pair.c);
  if (!(denominator > 0.0)) throw NumericFailure("phi denominator is zero");
  return bilinear(model, pair) / denominator;
}

std::vector<double> map_f(std::span<const double> activity, int delta, std::span<const double> v) {
  require_degree(delta);
  if (activity.size() != v.size()) throw PreconditionError("map_f dimension mismatch");
  const double p = static_cast<double>(delta) / (delta - 1);
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) throw PreconditionError("map_f needs a nonnegative vector");
    total += out[i] = std::pow(std::pow(activity[i], -1.0 / delta) * v[i], p);
  }
  if (!(total > 0.0)) throw PreconditionError("map_f needs a positive entry");
  for (double& a : out) a /= total;
  return out;
}

FixpointReport l_matrix_spectrum(const SpinWeights& model, int delta, const ProbabilityPair& pair,
                                 double tolerance) {
  require_degree(delta);
  require_pair(model, pair);
  auto report = make_report(model, delta, pair);
  if (report.residual > tolerance)
    throw NumericFailure("pair is not a tree-recursion fixpoint (residual " +
                         std::to_string(report.residual) + ")");
  return report;
}

// ---- colorings ---------------------------------------------------------------

namespace {

// ln((h+t)/(th+1)) with h = e^u, written to avoid overflow and cancellation.
double log_ratio(double u, double t) {
  const double em = std::exp(-u);
  return std::log1p((1.0 - t) * (-std::expm1(-u)) / (t + em));
}

double log_ratio_derivative(double u, double t) {
  const double em = std::exp(-u);
  return em / (t + em) - t * em / (1.0 + t * em);
}

void require_even_colorings(int q, int delta) {
  if (q < 4 || q % 2 != 0) throw PreconditionError("coloring analysis needs even q >= 4");
  if (delta <= q) throw PreconditionError("coloring analysis needs delta > q (non-uniqueness)");
}

}  // namespace

ProbabilityPair ColoringFixpointSolution::pair(SpinSet s) const {
  ProbabilityPair out{std::vector<double>(static_cast<std::size_t>(q)),
                      std::vector<double>(static_cast<std::size_t>(q))};
  for (int i = 0; i < q; ++i) {
    out.r[static_cast<std::size_t>(i)] = contains(s, i) ? a : b;
    out.c[static_cast<std::size_t>(i)] = contains(s, i) ? b : a;
  }
  return out;
}

ColoringFixpointSolution solve_coloring_fixpoint(int q, int delta) {
  require_even_colorings(q, delta);
  ColoringFixpointSolution s;
  s.q = q;
  s.delta = delta;
  s.t = 1.0 - 2.0 / q;
  s.d = delta - 1;
  const double d = s.d;
  const double t = s.t;
  // g(u) = ln f(e^u) − u; positive just above u = 0, negative at the top.
  auto g = [&](double u) { return d * log_ratio(u, t) - u; };
  double lo = 1e-9;
  double hi = -d * std::log(t) + std::log(2.0);
  if (!(g(lo) > 0.0)) throw NumericFailure("no coloring fixpoint h > 1 (uniqueness regime)");
  if (!(g(hi) < 0.0)) throw NumericFailure("coloring fixpoint bracket is invalid");
  for (int it = 0; it < 400 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 5; ++it) {
    const double step = g(u) / (d * log_ratio_derivative(u, t) - 1.0);
    const double candidate = u - step;
    if (!(candidate > lo - 1e-9) || std::abs(g(candidate)) >= std::abs(g(u))) break;
    u = candidate;
  }
  s.log_h = u;
  s.h = std::exp(u);
  s.residual = std::abs(std::expm1(g(u)));
  if (s.residual > 1e-12) throw NumericFailure("coloring fixpoint residual above 1e-12");
  const double total = 2.0 / q;
  const double em = std::exp(-u);
  s.a = total / (1.0 + em);
  s.b = total * em / (1.0 + em);
  const double p = static_cast<double>(delta) / (delta - 1);
  const double emp = std::exp(-p * u);
  s.a_prime = total / (1.0 + emp);
  s.b_prime = total * emp / (1.0 + emp);
  return s;
}

ColoringMaximalityVerdict verify_coloring_maximality(int q, int delta) {
  ColoringMaximalityVerdict v;
  v.solution = solve_coloring_fixpoint(q, delta);
  v.b_prime = v.solution.b_prime;
  const double bound = 1.0 / (15.0 * delta * q);
  v.margin = bound - v.b_prime;
  v.bound_holds = v.b_prime <= bound;
  const auto report = l_matrix_spectrum(SpinSystem::colorings(q), delta,
                                        v.solution.pair(full_set(q / 2)));
  v.hessian_dominant = report.hessian_dominant;
  v.verdict = v.bound_holds && v.hessian_dominant;
  return v;
}

ColoringFailureVerdict verify_coloring_failure(int q, int delta) {
  require_even_colorings(q, delta);
  if (q < 4.0 * delta / std::log(static_cast<double>(delta)))
    throw PreconditionError("failure analysis needs q >= 4 delta / ln delta");
  ColoringFailureVerdict v;
  v.solution = solve_coloring_fixpoint(q, delta);
  v.b_prime = v.solution.b_prime;
  v.threshold = 1.0 / (static_cast<double>(delta) * q);
  v.verdict = v.b_prime > v.threshold;
  return v;
}

// ---- hard-core ---------------------------------------------------------------

double hardcore_critical_activity(int delta) {
  if (delta <= 2) return std::numeric_limits<double>::infinity();
  const double d = delta;
  return std::exp((d - 1.0) * std::log(d - 1.0) - d * std::log(d - 2.0));
}

ProbabilityPair HardcoreFixpointSolution::symmetric_pair() const {
  std::vector<double> v{1.0 / (1.0 + x0), x0 / (1.0 + x0)};
  return {v, v};
}

HardcoreFixpointSolution solve_hardcore_fixpoints(int delta, double lambda) {
  if (delta < 2) throw PreconditionError("hard-core recursion needs delta >= 2");
  if (!(lambda > 0.0)) throw PreconditionError("hard-core recursion needs lambda > 0");
  HardcoreFixpointSolution s;
  s.delta = delta;
  s.lambda = lambda;
  const double d = delta - 1;
  const double log_lambda = std::log(lambda);
  // log g(x) as a function of log x; g(x) = λ/(1+x)^{Δ−1}.
  auto log_g = [&](double log_x) { return log_lambda - d * std::log1p(std::exp(log_x)); };

  double lo = 0.0;
  double hi = lambda;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    (lambda / std::pow(1.0 + mid, d) > mid ? lo : hi) = mid;
  }
  s.x0 = 0.5 * (lo + hi);

  if (lambda <= hardcore_critical_activity(delta)) return s;

  // Nontrivial root of g(g(x)) = x on (0, x0), bisected in log x.
  auto f = [&](double log_x) { return log_g(log_g(log_x)) - log_x; };
  double llo = log_g(log_lambda) - std::log(2.0);  // g(g(x)) ≥ g(λ) > x here
  double lhi = std::log(s.x0);
  double gap = 1e-6;
  while (!(f(lhi + std::log1p(-gap)) < 0.0) && gap > 1e-15) gap *= 1e-2;
  lhi += std::log1p(-gap);
  if (!(f(llo) > 0.0) || !(f(lhi) < 0.0))
    throw NumericFailure("could not bracket the nontrivial hard-core fixpoint");
  for (int it = 0; it < 400 && lhi - llo > 1e-15 * std::max(1.0, std::abs(llo)); ++it) {
    const double mid = 0.5 * (llo + lhi);
    (f(mid) > 0.0 ? llo : lhi) = mid;
  }
  const double log_x = 0.5 * (llo + lhi);
  s.residual = std::abs(std::expm1(f(log_x)));
  if (s.residual > 1e-12) throw NumericFailure("hard-core fixpoint residual above 1e-12");
  s.nontrivial = true;
  s.x = std::exp(log_x);
  s.y = std::exp(log_g(log_x));
  s.pair = {{1.0 / (1.0 + s.x), s.x / (1.0 + s.x)}, {1.0 / (1.0 + s.y), s.y / (1.0 + s.y)}};
  const std::vector<double> activity{1.0, lambda};
  s.alpha_star = map_f(activity, delta, s.pair.r);
  s.beta_star = map_f(activity, delta, s.pair.c);
  return s;
}

HardcoreMaximalityVerdict verify_hardcore_maximality(int delta, double lambda) {
  if (delta < 50) throw PreconditionError("hard-core maximality analysis needs delta >= 50");
  if (lambda * delta < 50.0) throw PreconditionError("hard-core maximality analysis needs lambda*delta >= 50");
  HardcoreMaximalityVerdict v;
  v.solution = solve_hardcore_fixpoints(delta, lambda);
  if (!v.solution.nontrivial) throw PreconditionError("lambda is in the uniqueness regime");
  const auto& s = v.solution;
  v.deviation = std::max(s.alpha_star[1], lambda / (1.0 + lambda) - s.beta_star[1]);
  v.threshold = 1.0 / (30.0 * delta);
  v.x_bound_holds = s.x <= 1.0 / (30.0 * lambda * delta * delta);
  v.hessian_dominant = l_matrix_spectrum(SpinWeights::hardcore(lambda), delta, s.pair).hessian_dominant;
  v.verdict = v.deviation <= v.threshold && v.hessian_dominant;
  return v;
}

// ---- general search ----------------------------------------------------------------

ProbabilityPair log_phi_gradient(const SpinWeights& model, int delta, const ProbabilityPair& pair) {
  require_degree(delta);
  require_pair(model, pair);
  const double total = bilinear(model, pair);
  const auto bc = row_fields(model, pair.c);
  const auto br = col_fields(model, pair.r);
  const auto alpha = map_f(model.activity, delta, pair.r);
  const auto beta = map_f(model.activity, delta, pair.c);
  ProbabilityPair g{std::vector<double>(static_cast<std::size_t>(model.q)),
                    std::vector<double>(static_cast<std::size_t>(model.q))};
  for (std::size_t i = 0; i < g.r.size(); ++i) {
    g.r[i] = pair.r[i] * bc[i] / total - alpha[i];
    g.c[i] = pair.c[i] * br[i] / total - beta[i];
  }
  return g;
}

namespace {

std::vector<double> softmax(const std::vector<double>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) total += out[i] = std::exp(logits[i] - top);
  for (double& v : out) v /= total;
  return out;
}

double max_abs(const ProbabilityPair& g) {
  double worst = 0.0;
  for (std::size_t i = 0; i < g.r.size(); ++i) worst = std::max({worst, std::abs(g.r[i]), std::abs(g.c[i])});
  return worst;
}

struct AscentResult {
  ProbabilityPair pair;
  bool converged = false;
};

AscentResult ascend(const SpinWeights& model, int delta, std::uint64_t seed,
                    const MaximizerSearchOptions& options) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> lr(static_cast<std::size_t>(model.q)), lc(lr.size());
  for (auto& v : lr) v = std::log(expo(rng));
  for (auto& v : lc) v = std::log(expo(rng));
  ProbabilityPair pair{softmax(lr), softmax(lc)};
  double value = std::log(phi_value(model, delta, pair));
  double step = 1.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const auto grad = log_phi_gradient(model, delta, pair);
    const double gmax = max_abs(grad);
    if (gmax < options.gradient_tolerance) return {pair, true};
    bool moved = false;
    while (step > 1e-16) {
      std::vector<double> nr(lr), nc(lc);
      for (std::size_t i = 0; i < lr.size(); ++i) {
        nr[i] += step * grad.r[i];
        nc[i] += step * grad.c[i];
      }
      ProbabilityPair trial{softmax(nr), softmax(nc)};
      const double trial_value = std::log(phi_value(model, delta, trial));
      // Close to a maximum the change in log Φ drops below rounding, so a step
      // that is flat in value is still taken when it shrinks the gradient.
      bool accept = trial_value > value;
      if (!accept && trial_value >= value - 1e-14 * std::max(1.0, std::abs(value)))
        accept = max_abs(log_phi_gradient(model, delta, trial)) < gmax;
      if (accept) {
        lr.swap(nr);
        lc.swap(nc);
        pair = std::move(trial);
        value = trial_value;
        step *= 1.5;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) return {pair, gmax < 1e3 * options.gradient_tolerance};
  }
  return {pair, false};
}

double sup_distance(const ProbabilityPair& a, const ProbabilityPair& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.r.size(); ++i)
    worst = std::max({worst, std::abs(a.r[i] - b.r[i]), std::abs(a.c[i] - b.c[i])});
  return worst;
}

}  // namespace

std::vector<FixpointReport> find_phi_maximizers(const SpinWeights& model, int delta,
                                                const MaximizerSearchOptions& options) {
  require_degree(delta);
  std::vector<AscentResult> runs(static_cast<std::size_t>(options.starts));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < options.starts; ++i)
    runs[static_cast<std::size_t>(i)] = ascend(model, delta, derive_seed(options.seed, static_cast<std::uint64_t>(i)), options);

  std::vector<FixpointReport> found;
  for (const auto& run : runs) {
    if (!run.converged) continue;
    const bool seen = std::any_of(found.begin(), found.end(), [&](const FixpointReport& r) {
      return sup_distance(r.pair, run.pair) < options.merge_tolerance;
    });
    if (!seen) found.push_back(make_report(model, delta, run.pair));
  }
  std::sort(found.begin(), found.end(), [](const FixpointReport& a, const FixpointReport& b) {
    if (std::abs(a.phi - b.phi) > 1e-12 * std::max(a.phi, b.phi)) return a.phi > b.phi;
    if (a.pair.r != b.pair.r) return a.pair.r < b.pair.r;
    return a.pair.c < b.pair.c;
  });
  return found;
}

}  // namespace bipolymer
