#include <doctest.h>

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "bipolymer/acceptance.hpp"
#include "bipolymer/errors.hpp"
#include "bipolymer/oracle.hpp"

using namespace bipolymer;

namespace {

BipartiteRegularGraph complete(int n) {
  std::vector<std::vector<Vertex>> adj(static_cast<std::size_t>(2 * n));
  for (int l = 0; l < n; ++l)
    for (int r = n; r < 2 * n; ++r) {
      adj[static_cast<std::size_t>(l)].push_back(r);
      adj[static_cast<std::size_t>(r)].push_back(l);
    }
  return BipartiteRegularGraph(n, n, adj);
}

// Sum over all q^{2n} assignments; usable for 2n ≤ 12 with small q.
double brute_z(const BipartiteRegularGraph& g, const SpinSystem& s,
               const std::function<void(const std::vector<int>&, double)>& visit = {}) {
  const int m = g.vertex_count();
  std::vector<int> sigma(static_cast<std::size_t>(m), 0);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (Vertex v = 0; v < m && w > 0; ++v) {
      w *= s.lambda(sigma[static_cast<std::size_t>(v)]);
      if (g.is_left(v))
        for (Vertex u : g.neighbors(v)) w *= s.b(sigma[static_cast<std::size_t>(v)], sigma[static_cast<std::size_t>(u)]);
    }
    total += w;
    if (visit) visit(sigma, w);
    int k = 0;
    while (k < m && ++sigma[static_cast<std::size_t>(k)] == s.q()) sigma[static_cast<std::size_t>(k++)] = 0;
    if (k == m) break;
  }
  return total;
}

const SpinSystem kGeneral(3, {1, 0.2, 0.7, 0.2, 1, 0, 0.7, 0, 0.4}, {1, 0.6, 0.3});

}  // namespace

TEST_CASE("partition function: closed forms") {
  const auto k33 = complete(3);
  // Independent sets of K_{3,3}: 2³ + 2³ − 1.
  CHECK(exact_partition_function(k33, SpinSystem::hardcore(1.0)) == 15.0);
  // λ-weighted: (1+λ)³ twice, minus the shared empty set.
  CHECK(exact_partition_function(k33, SpinSystem::hardcore(0.5)) == doctest::Approx(2 * 1.5 * 1.5 * 1.5 - 1));
  for (int q : {2, 3, 5}) CHECK(exact_partition_function(k33, SpinSystem::unconstrained(q)) == std::pow(q, 6));
  // Proper 4-colourings of K_{3,3}: colour L, then R avoids every used colour.
  double want = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) want += std::pow(4 - static_cast<int>(std::set<int>{a, b, c}.size()), 3);
  CHECK(exact_partition_function(k33, SpinSystem::colorings(4)) == want);
}

TEST_CASE("partition function: agrees with the full sum over assignments") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto g = generate(5, 3, seed);
    for (const auto& s : {kGeneral, SpinSystem::colorings(3), SpinSystem::hardcore(0.8)}) {
      const double z = exact_partition_function(g, s);
      CHECK(z == doctest::Approx(brute_z(g, s)).epsilon(1e-12));
      CHECK(exact_partition_function_serial(g, s) == z);
    }
  }
}

TEST_CASE("partition function: budget guard") {
  CHECK_THROWS_AS(exact_partition_function(generate(30, 3, 1), SpinSystem::colorings(4)), BudgetExceeded);
}

TEST_CASE("phase decomposition") {
  const auto g = generate(5, 3, 7);
  SUBCASE("masses agree with bucketed assignments") {
    std::map<std::pair<std::vector<int>, std::vector<int>>, double> want;
    const double z = brute_z(g, kGeneral, [&](const std::vector<int>& sigma, double w) {
      std::vector<int> a(3), b(3);
      for (Vertex v = 0; v < 10; ++v) ++(v < 5 ? a : b)[static_cast<std::size_t>(sigma[static_cast<std::size_t>(v)])];
      if (w > 0) want[{a, b}] += w;
    });
    const auto phases = exact_phase_decomposition(g, kGeneral);
    double total = 0;
    std::size_t positive = 0;
    for (const auto& ph : phases) {
      total += ph.mass;
      if (ph.mass > 0) {
        ++positive;
        CHECK(ph.mass == doctest::Approx(want.at({ph.alpha_counts, ph.beta_counts})).epsilon(1e-12));
      }
    }
    CHECK(positive == want.size());
    CHECK(total == doctest::Approx(z).epsilon(1e-12));
  }
  SUBCASE("hard-core: the all-unoccupied phase has mass 1") {
    const auto phases = exact_phase_decomposition(g, SpinSystem::hardcore(0.9));
    const auto it = std::find_if(phases.begin(), phases.end(), [](const PhaseHistogram& p) {
      return p.alpha_counts == std::vector<int>{5, 0} && p.beta_counts == std::vector<int>{5, 0};
    });
    REQUIRE(it != phases.end());
    CHECK(it->mass == 1.0);
    CHECK(it->alpha() == std::vector<double>{1.0, 0.0});
  }
  SUBCASE("serial equals parallel and output is sorted") {
    const auto a = exact_phase_decomposition(g, SpinSystem::colorings(4));
    const auto b = exact_phase_decomposition_serial(g, SpinSystem::colorings(4));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].alpha_counts == b[i].alpha_counts);
      CHECK(a[i].beta_counts == b[i].beta_counts);
      CHECK(a[i].mass == b[i].mass);
      if (i > 0)
        CHECK(std::tie(a[i - 1].alpha_counts, a[i - 1].beta_counts) < std::tie(a[i].alpha_counts, a[i].beta_counts));
    }
  }
  SUBCASE("colourings concentrate on two colours per side") {
    const auto g4 = generate(6, 4, 3);
    const auto phases = exact_phase_decomposition(g4, SpinSystem::colorings(4));
    const auto top = *std::max_element(phases.begin(), phases.end(),
                                       [](const auto& x, const auto& y) { return x.mass < y.mass; });
    const auto used = std::count_if(top.alpha_counts.begin(), top.alpha_counts.end(), [](int c) { return c > 0; });
    CHECK(used == 2);
  }
}

TEST_CASE("polymer partition function") {
  const auto hc = SpinSystem::hardcore(1.0);
  const Biclique bc{make_set({0}), make_set({0, 1})};
  CHECK(exact_polymer_partition_function(generate(12, 3, 1), hc, bc) == 1.0);  // size cap 0

  SUBCASE("singletons: independence polynomial of the distance-2 graph on L") {
    // With kmax = 1 only L vertices deviate (weight 1/8 each); two of them
    // conflict iff they share a neighbour.
    const auto g = generate(18, 3, 4);
    std::vector<std::uint64_t> conflict(18, 0);
    for (Vertex u = 0; u < 18; ++u)
      for (Vertex v = 0; v < 18; ++v)
        if (u != v && graph_distance(g, u, v) <= 3) conflict[static_cast<std::size_t>(u)] |= std::uint64_t{1} << v;
    std::function<double(int, std::uint64_t)> poly = [&](int v, std::uint64_t banned) -> double {
      if (v == 18) return 1.0;
      double s = poly(v + 1, banned);
      if (!((banned >> v) & 1U)) s += poly(v + 1, banned | conflict[static_cast<std::size_t>(v)]) / 8.0;
      return s;
    };
    CHECK(exact_polymer_partition_function(g, hc, bc, 1) == doctest::Approx(poly(0, 0)).epsilon(1e-13));
  }
  SUBCASE("matches the polymer-free restricted spin sum") {
    for (const auto& inst : tiny_instances())
      CHECK(exact_polymer_partition_function(inst.graph, inst.system, inst.biclique, inst.kmax) ==
            doctest::Approx(restricted_spin_sum(inst.graph, inst.system, inst.biclique, inst.kmax)).epsilon(1e-12));
  }
  SUBCASE("budget") {
    OracleBudget tight;
    tight.states = 10;
    CHECK_THROWS_AS(exact_polymer_partition_function(generate(30, 3, 2), SpinSystem::colorings(4),
                                                     {make_set({0, 1}), make_set({2, 3})}, 2, tight),
                    BudgetExceeded);
  }
}

TEST_CASE("restricted spin sum: full ground sets") {
  // Nothing can deviate when S and T are everything, so the sum is
  // q^{2n} / (q^n q^n) = 1.
  const auto g = generate(4, 3, 2);
  CHECK(restricted_spin_sum(g, SpinSystem::unconstrained(3), {full_set(3), full_set(3)}, 8) == doctest::Approx(1.0));
}

TEST_CASE("Z^pmer") {
  const auto g = generate(12, 3, 1);
  const auto hc = SpinSystem::hardcore(1.0);
  const auto bcs = enumerate_maximal_bicliques(hc);
  CHECK(exact_log_z_pmer(g, hc, bcs) == doctest::Approx(13 * std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(exact_log_z_pmer(g, hc, {}), PreconditionError);
  for (const auto& d : pmer_diagnostics()) {
    CAPTURE(d.name);
    CHECK(std::isfinite(d.ratio));
    CHECK(d.ratio > 0.0);
  }
}

TEST_CASE("configuration law μ") {
  const auto hc = SpinSystem::hardcore(1.0);
  const Biclique bc{make_set({0}), make_set({0, 1})};
  SUBCASE("size cap 0 leaves only the empty configuration") {
    const auto mu = exact_mu_st(generate(12, 3, 1), hc, bc);
    REQUIRE(mu.size() == 1);
    CHECK(mu[0].configuration.polymers.empty());
    CHECK(mu[0].probability == 1.0);
  }
  SUBCASE("singleton hard-core configurations weigh 8^{-|Γ|}") {
    const auto inst = tiny_instances()[0];
    const auto mu = exact_mu_st(inst.graph, inst.system, inst.biclique, 1);
    double total = 0.0, z = 0.0;
    for (const auto& c : mu) {
      CHECK(c.weight == doctest::Approx(std::pow(8.0, -static_cast<double>(c.configuration.polymers.size()))));
      total += c.probability;
      z += c.weight;
      CHECK(c.key == configuration_key(c.configuration));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(z == doctest::Approx(exact_polymer_partition_function(inst.graph, inst.system, inst.biclique, 1)));
    for (std::size_t i = 1; i < mu.size(); ++i) CHECK(mu[i - 1].key < mu[i].key);
  }
  SUBCASE("state budget") {
    CHECK_THROWS_AS(exact_mu_st(generate(18, 3, 4), hc, bc, 1, 10), BudgetExceeded);
  }
}

TEST_CASE("mixture spin law") {
  const auto inst = tiny_instances()[0];
  const auto bcs = enumerate_maximal_bicliques(inst.system);
  const auto law = exact_pmer_spin_distribution(inst.graph, inst.system, bcs, inst.kmax);
  double total = 0.0;
  for (const auto& [s, p] : law) {
    CHECK(p > 0.0);
    CHECK(s.size() == static_cast<std::size_t>(inst.graph.vertex_count()));
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("total variation") {
  const std::array<double, 2> a{0.5, 0.5}, b{1.0, 0.0};
  CHECK(total_variation(a, b) == 0.5);
  CHECK(total_variation(a, a) == 0.0);
  const std::array<double, 3> c{0.2, 0.3, 0.5};
  CHECK_THROWS_AS(total_variation(a, c), PreconditionError);
  const std::map<int, double> p{{1, 0.5}, {2, 0.5}}, q{{2, 0.5}, {3, 0.5}};
  CHECK(total_variation(p, q) == 0.5);
  CHECK(total_variation(p, std::map<int, double>{}) == 0.5);
}
