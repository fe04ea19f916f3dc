#include "bipolymer/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bipolymer/errors.hpp"

namespace bipolymer {

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string graph_to_json(const BipartiteRegularGraph& g) {
  // One adjacency list per line keeps large files diffable.
  std::ostringstream out;
  out << "{\n  \"n\": " << g.n() << ",\n  \"delta\": " << g.degree() << ",\n  \"adj\": [\n";
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    out << "    " << json(g.neighbors(v)).dump();
    out << (v + 1 < g.vertex_count() ? ",\n" : "\n");
  }
  out << "  ]\n}\n";
  return out.str();
}

BipartiteRegularGraph graph_from_json(const std::string& text) {
  const json j = parse(text);
  try {
    return BipartiteRegularGraph(j.at("n").get<int>(), j.at("delta").get<int>(),
                                 j.at("adj").get<std::vector<std::vector<Vertex>>>());
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("invalid graph file: ") + e.what());
  }
}

BipartiteRegularGraph read_graph(const std::string& path) { return graph_from_json(slurp(path)); }

void write_graph(const std::string& path, const BipartiteRegularGraph& g) {
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write " + path);
  out << graph_to_json(g);
}

std::string system_to_json(const SpinSystem& system) {
  const int q = system.q();
  json b = json::array();
  for (int i = 0; i < q; ++i) {
    json row = json::array();
    for (int j = 0; j < q; ++j) row.push_back(system.b(i, j));
    b.push_back(row);
  }
  json j = {{"q", q}, {"B", b},
            {"lambda", std::vector<double>(system.activities().begin(), system.activities().end())}};
  return j.dump() + "\n";
}

SpinSystem system_from_json(const std::string& text) {
  const json j = parse(text);
  try {
    const int q = j.at("q").get<int>();
    std::vector<double> b;
    for (const auto& entry : j.at("B")) {
      if (entry.is_array())
        for (const auto& x : entry) b.push_back(x.get<double>());
      else
        b.push_back(entry.get<double>());
    }
    return SpinSystem(q, std::move(b), j.at("lambda").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("invalid spin-system file: ") + e.what());
  }
}

SpinSystem read_system(const std::string& path) { return system_from_json(slurp(path)); }

SpinSystem resolve_system(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string name = spec.substr(0, colon);
    const std::string arg = spec.substr(colon + 1);
    try {
      if (name == "hardcore") return SpinSystem::hardcore(std::stod(arg));
      if (name == "colorings") return SpinSystem::colorings(std::stoi(arg));
      if (name == "unconstrained") return SpinSystem::unconstrained(std::stoi(arg));
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const PreconditionError*>(&e)) throw;
      throw PreconditionError("bad parameter in system spec '" + spec + "'");
    }
  }
  return read_system(spec);
}

}  // namespace bipolymer
