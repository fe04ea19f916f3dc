#include "bipolymer/spin.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "bipolymer/errors.hpp"

namespace bipolymer {

SpinSet make_set(std::initializer_list<int> spins) {
  SpinSet s = 0;
  for (int i : spins) s |= singleton(i);
  return s;
}

std::vector<int> members(SpinSet s) {
  std::vector<int> out;
  while (s != 0) {
    out.push_back(std::countr_zero(s));
    s &= s - 1;
  }
  return out;
}

int cardinality(SpinSet s) { return std::popcount(s); }

std::string format_set(SpinSet s) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int i : members(s)) {
    if (!first) os << ',';
    os << i;
    first = false;
  }
  os << '}';
  return os.str();
}

std::string format_biclique(const Biclique& bc) {
  return "(" + format_set(bc.left) + "," + format_set(bc.right) + ")";
}

SpinSystem::SpinSystem(int q, std::vector<double> interaction, std::vector<double> activity)
    : q_(q), interaction_(std::move(interaction)), activity_(std::move(activity)) {
  if (q < 2) throw PreconditionError("spin system needs q >= 2");
  if (interaction_.size() != static_cast<std::size_t>(q) * q)
    throw PreconditionError("interaction matrix must be q x q");
  if (activity_.size() != static_cast<std::size_t>(q))
    throw PreconditionError("activity vector must have length q");
  double bmax = 0.0;
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      const double v = b(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError("interaction entries must lie in [0,1]");
      if (v != b(j, i)) throw PreconditionError("interaction matrix must be symmetric");
      bmax = std::max(bmax, v);
    }
  }
  if (bmax != 1.0) throw PreconditionError("interaction matrix must have maximum entry 1");
  double lmax = 0.0;
  for (double l : activity_) {
    if (!(l > 0.0)) throw PreconditionError("activities must be strictly positive");
    if (l > 1.0) throw PreconditionError("activities must be at most 1 (normalised form)");
    lmax = std::max(lmax, l);
  }
  if (lmax != 1.0) throw PreconditionError("activity vector must have maximum entry 1");
}

SpinSystem SpinSystem::colorings(int q) {
  std::vector<double> interaction(static_cast<std::size_t>(q) * q, 1.0);
  for (int i = 0; i < q; ++i) interaction[static_cast<std::size_t>(i * q + i)] = 0.0;
  return SpinSystem(q, std::move(interaction), std::vector<double>(static_cast<std::size_t>(q), 1.0));
}

SpinSystem SpinSystem::hardcore(double lambda) {
  return SpinSystem(2, {1.0, 1.0, 1.0, 0.0}, {1.0, lambda});
}

SpinSystem SpinSystem::unconstrained(int q) {
  return SpinSystem(q, std::vector<double>(static_cast<std::size_t>(q) * q, 1.0),
                    std::vector<double>(static_cast<std::size_t>(q), 1.0));
}

double SpinSystem::min_lambda() const {
  return *std::min_element(activity_.begin(), activity_.end());
}

double SpinSystem::activity_sum(SpinSet s) const {
  double total = 0.0;
  for (int i : members(s)) total += activity_[static_cast<std::size_t>(i)];
  return total;
}

bool is_biclique(const SpinSystem& system, SpinSet left, SpinSet right) {
  for (int i : members(left))
    for (int j : members(right))
      if (system.b(i, j) != 1.0) return false;
  return true;
}

namespace {

// Spins j with B[i][j] = 1 for every i in s.
SpinSet common_partners(const SpinSystem& system, SpinSet s) {
  SpinSet out = full_set(system.q());
  for (int i : members(s))
    for (int j = 0; j < system.q(); ++j)
      if (system.b(i, j) != 1.0) out &= ~singleton(j);
  return out;
}

}  // namespace

std::vector<Biclique> enumerate_maximal_bicliques(const SpinSystem& system) {
  const int q = system.q();
  if (q > 20) throw PreconditionError("maximal biclique enumeration supports q <= 20");
  // (S,T) is maximal iff T = N(S) and S = N(T); one closure per nonempty S.
  std::vector<Biclique> out;
  for (SpinSet s = 1; s <= full_set(q); ++s) {
    const SpinSet t = common_partners(system, s);
    if (t == 0) continue;
    if (common_partners(system, t) == s) out.push_back({s, t});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<double> delta_of_matrix(const SpinSystem& system) {
  std::optional<double> best;
  for (double v : system.interaction())
    if (v < 1.0 && (!best || v > *best)) best = v;
  return best;
}

std::vector<double> ground_state_vector(const SpinSystem& system, SpinSet support) {
  support &= full_set(system.q());
  if (support == 0) throw PreconditionError("ground state vector needs a nonempty spin set");
  const double z = system.activity_sum(support);
  std::vector<double> g(static_cast<std::size_t>(system.q()), 0.0);
  for (int i : members(support)) g[static_cast<std::size_t>(i)] = system.lambda(i) / z;
  return g;
}

double required_decay_rate(int q, int delta) {
  return 5.0 + 3.0 * std::log(static_cast<double>(q - 1) * std::pow(static_cast<double>(delta), 3));
}

double polymer_condition_margin(const SpinSystem& system, int delta) {
  if (delta < 3) throw PreconditionError("polymer condition needs delta >= 3");
  const auto d = delta_of_matrix(system);
  if (!d) return std::numeric_limits<double>::infinity();
  const double q = system.q();
  const double lmin = system.min_lambda();
  const double dd = delta;
  return dd * (1.0 - *d) * lmin - 7.0 * q * (5.0 + std::log((q - 1.0) * dd * dd * dd / lmin));
}

}  // namespace bipolymer
