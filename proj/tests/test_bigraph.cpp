#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "bipolymer/bigraph.hpp"
#include "bipolymer/errors.hpp"

using namespace bipolymer;

namespace {

void check_invariants(const BipartiteRegularGraph& g) {
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const auto& nb = g.neighbors(v);
    REQUIRE(static_cast<int>(nb.size()) == g.degree());
    CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
    for (Vertex w : nb) {
      CHECK(g.is_left(v) != g.is_left(w));
      CHECK(g.adjacent(w, v));
    }
  }
}

double h2(double x) { return x <= 0 || x >= 1 ? 0.0 : -x * std::log2(x) - (1 - x) * std::log2(1 - x); }

}  // namespace

TEST_CASE("construction validates the graph") {
  CHECK_NOTHROW(BipartiteRegularGraph(1, 1, {{1}, {0}}));
  CHECK_THROWS_AS(BipartiteRegularGraph(2, 1, {{2}, {2}, {0}, {1}}), PreconditionError);  // irregular
  CHECK_THROWS_AS(BipartiteRegularGraph(2, 1, {{1}, {0}, {3}, {2}}), PreconditionError);  // same side
  CHECK_THROWS_AS(BipartiteRegularGraph(2, 2, {{2, 2}, {3, 3}, {0, 0}, {1, 1}}), PreconditionError);  // parallel
  CHECK_THROWS_AS(BipartiteRegularGraph(2, 1, {{2}, {3}, {1}, {0}}), PreconditionError);  // asymmetric
}

TEST_CASE("generate") {
  SUBCASE("n = Δ = 3 gives K_{3,3}") {
    const auto g = generate(3, 3, 5);
    for (Vertex v = 0; v < 3; ++v) CHECK(g.neighbors(v) == std::vector<Vertex>{3, 4, 5});
  }
  SUBCASE("Δ = 1 gives a perfect matching") {
    const auto g = generate(4, 1, 9);
    check_invariants(g);
  }
  SUBCASE("n = 100, Δ = 3 has 300 edges") {
    const auto g = generate(100, 3, 42);
    check_invariants(g);
    long long edges = 0;
    for (Vertex v = 0; v < g.n(); ++v) edges += static_cast<long long>(g.neighbors(v).size());
    CHECK(edges == 300);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(generate(3, 4, 1), PreconditionError);
    CHECK_THROWS_AS(generate(10, 9, 1, GraphModel::kPermutationRejection), NumericFailure);
  }
  SUBCASE("deterministic in the seed") {
    CHECK(generate(20, 4, 11).adjacency() == generate(20, 4, 11).adjacency());
    CHECK(generate(20, 4, 11).adjacency() != generate(20, 4, 12).adjacency());
  }
}

TEST_CASE("property: generated graphs satisfy the invariants") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    check_invariants(generate(12, 3, seed));
    check_invariants(generate(15, 6, seed));
    check_invariants(generate(9, 3, seed, GraphModel::kSwitchChain));
  }
}

TEST_CASE("property: both models are close to uniform on 2-regular graphs with n = 3") {
  // There are exactly 6 such graphs: K_{3,3} minus a perfect matching.
  for (auto model : {GraphModel::kPermutationRejection, GraphModel::kSwitchChain}) {
    std::map<std::vector<std::vector<Vertex>>, int> counts;
    constexpr int kDraws = 6000;
    for (int s = 0; s < kDraws; ++s) counts[generate(3, 2, static_cast<std::uint64_t>(s), model).adjacency()]++;
    CHECK(counts.size() == 6);
    double chi2 = 0.0;
    for (const auto& [adj, c] : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
    CHECK(chi2 < 25.0);  // 5 degrees of freedom; p ≈ 1e-4
  }
}

TEST_CASE("boundary") {
  const auto k33 = generate(3, 3, 1);
  CHECK(boundary(k33, {}).empty());
  CHECK(boundary(k33, {0}) == VertexSet{3, 4, 5});
  CHECK(boundary(k33, {0, 1, 2, 3, 4, 5}).empty());
}

TEST_CASE("property: boundary is disjoint from U and touches it") {
  const auto g = generate(10, 3, 4);
  for (std::uint64_t mask = 1; mask < (1u << 12); mask += 7) {
    VertexSet u;
    for (int b = 0; b < 12; ++b)
      if (mask >> b & 1) u.push_back(b < 6 ? b : 10 + b - 6);
    for (Vertex x : boundary(g, u)) {
      CHECK_FALSE(std::binary_search(u.begin(), u.end(), x));
      const auto& nb = g.neighbors(x);
      CHECK(std::any_of(nb.begin(), nb.end(), [&](Vertex y) { return std::binary_search(u.begin(), u.end(), y); }));
    }
  }
}

TEST_CASE("graph distance") {
  const auto k33 = generate(3, 3, 1);
  CHECK(graph_distance(k33, 2, 2) == 0);
  CHECK(graph_distance(k33, 0, 4) == 1);
  CHECK(graph_distance(k33, 0, 1) == 2);
  const auto matching = generate(3, 1, 2);
  CHECK(graph_distance(matching, 0, 1) == kUnreachable);
}

TEST_CASE("property: distances obey the triangle inequality and agree with balls") {
  const auto g = generate(16, 3, 8);
  const DistanceIndex index(g, 3);
  for (Vertex u = 0; u < g.vertex_count(); u += 3)
    for (Vertex v = 0; v < g.vertex_count(); v += 2) {
      const int d = graph_distance(g, u, v);
      CHECK(index.within(u, v) == (d >= 1 && d <= 3));
      for (Vertex w = 1; w < g.vertex_count(); w += 5) CHECK(d <= graph_distance(g, u, w) + graph_distance(g, w, v));
    }
  for (Vertex v = 0; v < g.vertex_count(); ++v) CHECK(index.near(v) == ball(g, v, 3));
}

TEST_CASE("small-set expansion") {
  SUBCASE("K_{3,3} is vacuous") {
    const auto r = check_expansion_smallsets(generate(3, 3, 1), ExpansionMode::kPlus);
    CHECK(r.holds);
    CHECK(r.sets_checked == 0);
    CHECK(std::isinf(r.worst_ratio));
  }
  SUBCASE("n = 12, Δ = 3 agrees with a direct enumeration") {
    const auto g = generate(12, 3, 77);
    const auto r = check_expansion_smallsets(g, ExpansionMode::kPlus);
    // Caps are 1 per side: U is a singleton or one L plus one R vertex.
    double worst = std::numeric_limits<double>::infinity();
    auto plus_size = [&](const VertexSet& u) { return static_cast<double>(u.size() + boundary(g, u).size()); };
    for (Vertex a = 0; a < 24; ++a) worst = std::min(worst, plus_size({a}));
    for (Vertex a = 0; a < 12; ++a)
      for (Vertex b = 12; b < 24; ++b) worst = std::min(worst, plus_size({a, b}) / 2.0);
    CHECK(r.worst_ratio == doctest::Approx(worst));
    CHECK(r.holds);
    CHECK(r.required_ratio == 1.0);
    const auto rb = check_expansion_smallsets(g, ExpansionMode::kBoundary);
    CHECK(rb.holds);
  }
  SUBCASE("cost guard") {
    CHECK_THROWS_AS(check_expansion_smallsets(generate(13, 3, 1), ExpansionMode::kPlus), BudgetExceeded);
  }
}

TEST_CASE("Bassalygo condition") {
  auto direct = [](int delta, double a, double b) {
    const double den = h2(a) - a * b * h2(1.0 / b);
    return delta > (h2(a) + h2(a * b)) / den;
  };
  CHECK(bassalygo_condition(3, 1.0 / 9, 1.0));
  CHECK(bassalygo_condition(50, 1.0 / 150, 24.5));
  CHECK(bassalygo_condition(50, 1.0 / 150, 24.5) == direct(50, 1.0 / 150, 24.5));
  CHECK(bassalygo_condition(50, 1.0 / 300, 50.0 / 7 + 1));
  CHECK_FALSE(bassalygo_condition(3, 0.3, 2.0));
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK_THROWS_AS(bassalygo_condition(3, 1.2, 2.0), PreconditionError);
  CHECK_THROWS_AS(bassalygo_condition(3, 0.5, 2.0), PreconditionError);  // ab = 1
}

TEST_CASE("property: Bassalygo items hold for every Δ in [3, 1000]") {
  for (int delta = 3; delta <= 1000; ++delta) {
    CHECK(bassalygo_condition(delta, 1.0 / (3 * delta), (delta - 1) / 2.0));
    CHECK(bassalygo_condition(delta, 1.0 / (6 * delta), delta / 7.0 + 1.0));
  }
}
