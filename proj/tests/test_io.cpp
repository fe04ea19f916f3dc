#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bipolymer/errors.hpp"
#include "bipolymer/io.hpp"

using namespace bipolymer;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "bipolymer_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

bool same_system(const SpinSystem& a, const SpinSystem& b) {
  if (a.q() != b.q()) return false;
  for (int i = 0; i < a.q(); ++i) {
    if (a.lambda(i) != b.lambda(i)) return false;
    for (int j = 0; j < a.q(); ++j)
      if (a.b(i, j) != b.b(i, j)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("graph round trip") {
  for (auto [n, d] : {std::pair{3, 2}, std::pair{10, 3}, std::pair{40, 7}}) {
    const auto g = generate(n, d, 5);
    const auto back = graph_from_json(graph_to_json(g));
    CHECK(back.n() == n);
    CHECK(back.degree() == d);
    CHECK(back.adjacency() == g.adjacency());
  }
  const auto g = generate(12, 3, 1);
  const auto path = scratch("g.json").string();
  write_graph(path, g);
  CHECK(read_graph(path).adjacency() == g.adjacency());
}

TEST_CASE("graph file format") {
  const auto g = graph_from_json(R"({"n": 2, "delta": 2, "adj": [[2,3],[2,3],[0,1],[0,1]]})");
  CHECK(g.adjacent(0, 3));
  CHECK_THROWS_AS(graph_from_json("{\"n\": 2"), PreconditionError);
  CHECK_THROWS_AS(graph_from_json(R"({"n": 2, "adj": []})"), PreconditionError);
  CHECK_THROWS_AS(graph_from_json(R"({"n": 2, "delta": 2, "adj": [[2,3],[2,3],[0,1],[0,0]]})"), PreconditionError);
  CHECK_THROWS_AS(graph_from_json(R"({"n": "two", "delta": 2, "adj": []})"), PreconditionError);
  CHECK_THROWS_AS(read_graph(scratch("missing.json").string()), PreconditionError);
}

TEST_CASE("system round trip and formats") {
  const SpinSystem general(3, {1, 0.2, 0.7, 0.2, 1, 0, 0.7, 0, 0.4}, {1, 0.6, 0.3});
  for (const auto& s : {general, SpinSystem::hardcore(0.25), SpinSystem::colorings(5)})
    CHECK(same_system(system_from_json(system_to_json(s)), s));

  const auto flat = system_from_json(R"({"q": 2, "B": [1, 1, 1, 0], "lambda": [1, 0.5]})");
  CHECK(same_system(flat, SpinSystem::hardcore(0.5)));
  CHECK_THROWS_AS(system_from_json(R"({"q": 2, "B": [1, 1, 1], "lambda": [1, 0.5]})"), PreconditionError);
  CHECK_THROWS_AS(system_from_json(R"({"q": 2, "B": [[1, 0.5], [0.2, 1]], "lambda": [1, 1]})"), PreconditionError);
  CHECK_THROWS_AS(system_from_json(R"({"q": 2, "lambda": [1, 1]})"), PreconditionError);
  CHECK_THROWS_AS(system_from_json("[]"), PreconditionError);

  const auto path = scratch("s.json");
  std::ofstream(path) << system_to_json(general);
  CHECK(same_system(read_system(path.string()), general));
  CHECK(same_system(resolve_system(path.string()), general));
}

TEST_CASE("built-in system specs") {
  CHECK(same_system(resolve_system("hardcore:0.5"), SpinSystem::hardcore(0.5)));
  CHECK(same_system(resolve_system("colorings:6"), SpinSystem::colorings(6)));
  CHECK(same_system(resolve_system("unconstrained:3"), SpinSystem::unconstrained(3)));
  CHECK_THROWS_AS(resolve_system("hardcore:abc"), PreconditionError);
  CHECK_THROWS_AS(resolve_system("hardcore:2"), PreconditionError);  // λ ≤ 1 in normalised form
  CHECK_THROWS_AS(resolve_system("colorings:1"), PreconditionError);
  CHECK_THROWS_AS(resolve_system("potts:3"), PreconditionError);     // falls through to a missing file
}
