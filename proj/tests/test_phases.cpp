#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bipolymer/errors.hpp"
#include "bipolymer/phases.hpp"

using namespace bipolymer;

namespace {

// Plain-arithmetic references, deliberately not shared with the library.
ProbabilityPair reference_step(const SpinWeights& m, int delta, const ProbabilityPair& p) {
  ProbabilityPair out{std::vector<double>(static_cast<std::size_t>(m.q)), std::vector<double>(static_cast<std::size_t>(m.q))};
  double zr = 0, zc = 0;
  for (int i = 0; i < m.q; ++i) {
    double fr = 0, fc = 0;
    for (int j = 0; j < m.q; ++j) {
      fr += m.b(i, j) * p.c[static_cast<std::size_t>(j)];
      fc += m.b(j, i) * p.r[static_cast<std::size_t>(j)];
    }
    out.r[static_cast<std::size_t>(i)] = m.activity[static_cast<std::size_t>(i)] * std::pow(fr, delta - 1);
    out.c[static_cast<std::size_t>(i)] = m.activity[static_cast<std::size_t>(i)] * std::pow(fc, delta - 1);
    zr += out.r[static_cast<std::size_t>(i)];
    zc += out.c[static_cast<std::size_t>(i)];
  }
  for (auto& x : out.r) x /= zr;
  for (auto& x : out.c) x /= zc;
  return out;
}

double reference_phi(const SpinWeights& m, int delta, const ProbabilityPair& pr) {
  const double p = static_cast<double>(delta) / (delta - 1);
  double num = 0, nr = 0, nc = 0;
  for (int i = 0; i < m.q; ++i) {
    const double scale = std::pow(m.activity[static_cast<std::size_t>(i)], -1.0 / delta);
    nr += std::pow(scale * pr.r[static_cast<std::size_t>(i)], p);
    nc += std::pow(scale * pr.c[static_cast<std::size_t>(i)], p);
    for (int j = 0; j < m.q; ++j) num += pr.r[static_cast<std::size_t>(i)] * m.b(i, j) * pr.c[static_cast<std::size_t>(j)];
  }
  return num / (std::pow(nr, 1 / p) * std::pow(nc, 1 / p));
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

ProbabilityPair uniform(int q) {
  return {std::vector<double>(static_cast<std::size_t>(q), 1.0 / q), std::vector<double>(static_cast<std::size_t>(q), 1.0 / q)};
}

}  // namespace

TEST_CASE("tree recursion step") {
  SUBCASE("uniform is fixed for colorings") {
    const auto out = tree_recursion_step(SpinSystem::colorings(5), 7, uniform(5));
    CHECK(sup_diff(out.r, uniform(5).r) < 1e-15);
    CHECK(sup_diff(out.c, uniform(5).c) < 1e-15);
  }
  SUBCASE("hard-core Δ=2, λ=2 fixes (1/2, 1/2)") {
    const ProbabilityPair half{{0.5, 0.5}, {0.5, 0.5}};
    const auto out = tree_recursion_step(SpinWeights::hardcore(2.0), 2, half);
    CHECK(sup_diff(out.r, half.r) < 1e-15);
  }
  SUBCASE("matches the direct formula on a general system") {
    const SpinWeights m(3, {1, 0.2, 0.7, 0.2, 1, 0, 0.7, 0, 0.4}, {1, 0.6, 0.3});
    const ProbabilityPair p{{0.2, 0.5, 0.3}, {0.6, 0.1, 0.3}};
    for (int delta : {2, 3, 10, 60}) {
      const auto a = tree_recursion_step(m, delta, p);
      const auto b = reference_step(m, delta, p);
      CHECK(sup_diff(a.r, b.r) < 1e-13);
      CHECK(sup_diff(a.c, b.c) < 1e-13);
    }
  }
}

TEST_CASE("phi") {
  CHECK(phi_value(SpinSystem::unconstrained(2), 3, uniform(2)) == doctest::Approx(std::pow(2.0, 2.0 / 3)).epsilon(1e-14));
  CHECK(phi_value(SpinWeights::hardcore(0.3), 5, {{1, 0}, {1, 0}}) == doctest::Approx(1.0));
  CHECK(phi_value(SpinSystem::colorings(2), 9, {{1, 0}, {0, 1}}) == doctest::Approx(1.0));
  const SpinWeights m(3, {1, 0.2, 0.7, 0.2, 1, 0, 0.7, 0, 0.4}, {1, 0.6, 0.3});
  const ProbabilityPair p{{0.2, 0.5, 0.3}, {0.6, 0.1, 0.3}};
  CHECK(phi_value(m, 4, p) == doctest::Approx(reference_phi(m, 4, p)).epsilon(1e-13));
}

TEST_CASE("map f") {
  const std::vector<double> ones(4, 1.0);
  const std::vector<double> u(4, 0.25);
  CHECK(sup_diff(map_f(ones, 6, u), u) < 1e-15);
  CHECK(map_f(ones, 6, std::vector<double>{1, 0, 0, 0}) == std::vector<double>{1, 0, 0, 0});
  const auto s = solve_hardcore_fixpoints(50, 1.0);
  const auto alpha = map_f(std::vector<double>{1.0, 1.0}, 50, s.pair.r);
  CHECK(alpha[1] <= 2 * s.x);
}

TEST_CASE("property: map f returns probability vectors") {
  const std::vector<double> act{1, 0.3, 0.05, 0.7, 0.9};
  for (int k = 1; k <= 200; ++k) {
    std::vector<double> v(5);
    for (int i = 0; i < 5; ++i) v[static_cast<std::size_t>(i)] = std::fmod(0.37 * k * (i + 1) + 0.11 * i, 1.0) + 1e-6;
    const auto a = map_f(act, 2 + k % 40, v);
    CHECK(std::abs(std::accumulate(a.begin(), a.end(), 0.0) - 1.0) <= 1e-12);
  }
}

TEST_CASE("L-matrix spectrum") {
  SUBCASE("uniform colorings: singular values 1 and 1/(q-1)") {
    for (int q = 3; q <= 10; ++q) {
      for (int delta : {q - 1, q + 2}) {
        const auto r = l_matrix_spectrum(SpinSystem::colorings(q), delta, uniform(q));
        REQUIRE(r.l_spectrum.size() == static_cast<std::size_t>(q));
        CHECK(r.l_spectrum[0] == doctest::Approx(1.0).epsilon(1e-12));
        for (int k = 1; k < q; ++k) CHECK(r.l_spectrum[static_cast<std::size_t>(k)] == doctest::Approx(1.0 / (q - 1)).epsilon(1e-12));
        CHECK(r.hessian_dominant == (delta < q));
      }
    }
  }
  SUBCASE("hard-core fixpoints") {
    const auto sym = solve_hardcore_fixpoints(3, 5.0);
    CHECK_FALSE(l_matrix_spectrum(SpinWeights::hardcore(5.0), 3, sym.symmetric_pair()).hessian_dominant);
    const auto asym = solve_hardcore_fixpoints(50, 1.0);
    const auto r = l_matrix_spectrum(SpinWeights::hardcore(1.0), 50, asym.pair);
    CHECK(r.hessian_dominant);
    CHECK(r.l_spectrum[0] == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("non-fixpoints are rejected") {
    CHECK_THROWS_AS(l_matrix_spectrum(SpinWeights::hardcore(1.0), 5, {{0.3, 0.7}, {0.6, 0.4}}), NumericFailure);
  }
}

TEST_CASE("coloring fixpoint") {
  SUBCASE("q=4, Δ=200") {
    const auto s = solve_coloring_fixpoint(4, 200);
    CHECK(s.log_h > 199.0 / 8);
    const auto p = s.pair(make_set({0, 1}));
    const auto next = tree_recursion_step(SpinSystem::colorings(4), 200, p);
    CHECK(sup_diff(next.r, p.r) < 1e-10);
    CHECK(sup_diff(next.c, p.c) < 1e-10);
  }
  SUBCASE("q=4, Δ=5: structure of (a, b)") {
    const auto s = solve_coloring_fixpoint(4, 5);
    CHECK(s.a + s.b == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(0 < s.b);
    CHECK(s.b < s.a);
    CHECK(s.a < 0.5);
    CHECK(s.a_prime + s.b_prime == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.a_prime / s.b_prime == doctest::Approx(std::pow(s.h, 5.0 / 4)).epsilon(1e-12));
    // h solves h = ((h+t)/(th+1))^d, checked in plain arithmetic.
    const double t = 0.5;
    CHECK(std::pow((s.h + t) / (t * s.h + 1), 4) == doctest::Approx(s.h).epsilon(1e-12));
  }
  SUBCASE("q=88, Δ=100 stays below e^{4d/q}") {
    CHECK(solve_coloring_fixpoint(88, 100).log_h < 396.0 / 88);
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(solve_coloring_fixpoint(5, 20), PreconditionError);
    CHECK_THROWS_AS(solve_coloring_fixpoint(4, 4), PreconditionError);
  }
}

TEST_CASE("property: the coloring map has fixpoints 1/h, 1, h") {
  for (int delta : {6, 10, 25, 60, 120}) {
    const auto s = solve_coloring_fixpoint(4, delta);
    const double t = s.t;
    auto f = [&](double x) { return std::pow((x + t) / (t * x + 1), s.d); };
    CHECK(f(1.0) == 1.0);
    if (s.log_h < 300) CHECK(std::abs(f(1.0 / s.h) * s.h - 1.0) <= 1e-9);
  }
}

TEST_CASE("property: h > e^{(Δ-1)/8} for q = 4 across large Δ") {
  for (int delta = 170; delta <= 2000; delta += 23) CHECK(solve_coloring_fixpoint(4, delta).log_h > (delta - 1) / 8.0);
}

TEST_CASE("coloring maximality and failure verdicts") {
  CHECK(verify_coloring_maximality(4, 200).verdict);
  CHECK(verify_coloring_maximality(4, 556).verdict);
  CHECK(verify_coloring_maximality(4, 200).margin > 0);
  CHECK_FALSE(verify_coloring_maximality(88, 100).verdict);
  const auto f = verify_coloring_failure(88, 100);
  CHECK(f.verdict);
  CHECK(f.b_prime > 1.0 / 8800);
  CHECK(verify_coloring_failure(90, 100).verdict);
  CHECK_THROWS_AS(verify_coloring_failure(4, 200), PreconditionError);
}

TEST_CASE("hard-core fixpoints") {
  CHECK(hardcore_critical_activity(3) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(std::isinf(hardcore_critical_activity(2)));
  CHECK_FALSE(solve_hardcore_fixpoints(3, 3.9).nontrivial);
  CHECK_FALSE(solve_hardcore_fixpoints(3, 4.0).nontrivial);
  CHECK(solve_hardcore_fixpoints(3, 4.2).nontrivial);
  CHECK(solve_hardcore_fixpoints(2, 2.0).x0 == doctest::Approx(1.0).epsilon(1e-12));

  const auto s = solve_hardcore_fixpoints(50, 1.0);
  REQUIRE(s.nontrivial);
  CHECK(s.x <= 1.0 / 75000);
  CHECK(s.x == doctest::Approx(1.0 / std::pow(1 + s.y, 49)).epsilon(1e-10));
  CHECK(s.y == doctest::Approx(1.0 / std::pow(1 + s.x, 49)).epsilon(1e-10));
  CHECK_THROWS_AS(solve_hardcore_fixpoints(3, 0.0), PreconditionError);
}

TEST_CASE("property: hard-core fixpoint bounds on a (Δ, λ) grid") {
  for (int delta : {50, 64, 100, 150, 300, 600})
    for (double lambda : {50.0 / delta, 0.5, 1.0}) {
      if (lambda * delta < 50.0 - 1e-9) continue;
      const auto s = solve_hardcore_fixpoints(delta, lambda);
      REQUIRE(s.nontrivial);
      CHECK(s.x < 1.0 / (delta - 2));
      CHECK(1.0 / (delta - 2) < s.y);
      CHECK(s.x <= 1.0 / (30 * lambda * delta * delta));
      CHECK(s.x * std::pow(1 + s.y, delta - 1) == doctest::Approx(s.y * std::pow(1 + s.x, delta - 1)).epsilon(1e-9));
    }
}

TEST_CASE("hard-core maximality verdict") {
  const auto v = verify_hardcore_maximality(50, 1.0);
  CHECK(v.verdict);
  CHECK(v.deviation <= 1.0 / 1500);
  CHECK(verify_hardcore_maximality(100, 0.5).verdict);
  CHECK_THROWS_AS(verify_hardcore_maximality(50, 0.1), PreconditionError);
  CHECK_THROWS_AS(verify_hardcore_maximality(40, 2.0), PreconditionError);
}

TEST_CASE("property: solver pairs are tree-recursion fixpoints") {
  for (int delta : {6, 30, 200}) {
    const auto s = solve_coloring_fixpoint(4, delta);
    const auto p = s.pair(make_set({1, 3}));
    CHECK(fixpoint_residual(SpinSystem::colorings(4), delta, p) <= 1e-9);
  }
  for (auto [delta, lambda] : {std::pair{3, 5.0}, std::pair{10, 2.0}, std::pair{50, 1.0}}) {
    const auto s = solve_hardcore_fixpoints(delta, lambda);
    CHECK(fixpoint_residual(SpinWeights::hardcore(lambda), delta, s.pair) <= 1e-9);
    CHECK(fixpoint_residual(SpinWeights::hardcore(lambda), delta, s.symmetric_pair()) <= 1e-9);
  }
}

TEST_CASE("maximizer search") {
  SUBCASE("hard-core in non-uniqueness finds the asymmetric pair twice over") {
    MaximizerSearchOptions o;
    o.starts = 30;
    const auto found = find_phi_maximizers(SpinWeights::hardcore(5.0), 3, o);
    REQUIRE(found.size() == 2);  // (x, y) and its mirror (y, x)
    const auto s = solve_hardcore_fixpoints(3, 5.0);
    CHECK(found[0].phi == doctest::Approx(found[1].phi).epsilon(1e-9));
    const double gap = std::min(sup_diff(found[0].pair.r, s.pair.r), sup_diff(found[1].pair.r, s.pair.r));
    CHECK(gap < 1e-6);
  }
  SUBCASE("deterministic under the seed") {
    MaximizerSearchOptions o;
    o.starts = 12;
    o.seed = 99;
    const SpinWeights m(3, {1, 0.2, 0.7, 0.2, 1, 0, 0.7, 0, 0.4}, {1, 0.6, 0.3});
    const auto a = find_phi_maximizers(m, 6, o);
    const auto b = find_phi_maximizers(m, 6, o);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].pair.r == b[i].pair.r);
  }
}

TEST_CASE("property: maximizers are stationary points of Φ on the simplices") {
  // Central differences in log coordinates, r_i → r_i e^{±h} then renormalised:
  // the tangent directions of the simplex at an interior point.
  const std::vector<SpinWeights> models{
      SpinWeights(3, {1, 0.2, 0.7, 0.2, 1, 0, 0.7, 0, 0.4}, {1, 0.6, 0.3}), SpinWeights::hardcore(5.0),
      SpinWeights(SpinSystem::colorings(3))};
  MaximizerSearchOptions o;
  o.starts = 16;
  for (const auto& m : models)
    for (const auto& f : find_phi_maximizers(m, 6, o)) {
      constexpr double h = 1e-6;
      double norm2 = 0.0;
      for (int side = 0; side < 2; ++side)
        for (int i = 0; i < m.q; ++i) {
          auto moved = [&](double sign) {
            ProbabilityPair p = f.pair;
            auto& v = side == 0 ? p.r : p.c;
            v[static_cast<std::size_t>(i)] *= std::exp(sign * h);
            const double z = std::accumulate(v.begin(), v.end(), 0.0);
            for (auto& x : v) x /= z;
            return std::log(reference_phi(m, 6, p));
          };
          const double g = (moved(1) - moved(-1)) / (2 * h);
          norm2 += g * g;
        }
      CHECK(std::sqrt(norm2) <= 1e-5);
    }
}
