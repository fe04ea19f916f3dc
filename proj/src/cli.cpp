#include "bipolymer/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bipolymer/acceptance.hpp"
#include "bipolymer/bigraph.hpp"
#include "bipolymer/errors.hpp"
#include "bipolymer/io.hpp"
#include "bipolymer/oracle.hpp"
#include "bipolymer/phases.hpp"
#include "bipolymer/polymer.hpp"
#include "bipolymer/rng.hpp"
#include "bipolymer/sampler.hpp"

namespace bipolymer::cli {

namespace {

// ---- output -----------------------------------------------------------------

std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(12) << x;
  return s.str();
}

std::string list(std::span<const double> xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + num(xs[i]);
  return s + "]";
}

std::string ints(const std::vector<int>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + std::to_string(xs[i]);
  return s + "]";
}

class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}
  template <typename T>
  Report& kv(const std::string& key, const T& value) {
    out_ << indent_ << key << ": " << value << "\n";
    return *this;
  }
  Report& kv(const std::string& key, double value) { return kv(key, num(value)); }
  Report& kv(const std::string& key, bool value) { return kv(key, std::string(value ? "true" : "false")); }
  void section(const std::string& name) {
    out_ << name << ":\n";
    indent_ = "  ";
  }
  void end_section() { indent_.clear(); }
  std::ostream& raw() { return out_; }

 private:
  std::ostream& out_;
  std::string indent_;
};

// ---- shared inputs ----------------------------------------------------------

struct GraphSource {
  std::string file;
  int n = 0;
  int delta = 3;
  std::uint64_t seed = 1;

  void attach(CLI::App* app) {
    app->add_option("--graph", file, "graph file (JSON)");
    app->add_option("--n", n, "generate a graph with n vertices per side instead");
    app->add_option("--delta", delta, "degree of the generated graph")->capture_default_str();
    app->add_option("--graph-seed", seed, "seed of the generated graph")->capture_default_str();
  }
  BipartiteRegularGraph load() const {
    if (!file.empty()) return read_graph(file);
    if (n > 0) return generate(n, delta, seed);
    throw PreconditionError("a graph is required: pass --graph FILE or --n N");
  }
  void echo(Report& r) const {
    if (!file.empty()) r.kv("graph_file", file);
    else r.kv("graph", "generated n=" + std::to_string(n) + " delta=" + std::to_string(delta) +
                           " seed=" + std::to_string(seed));
  }
};

struct SystemSource {
  std::string spec;
  std::string model;
  double lambda = 1.0;
  int q = 4;

  void attach(CLI::App* app) {
    app->add_option("--system", spec, "spin-system file, or hardcore:<lambda> / colorings:<q> / unconstrained:<q>");
    app->add_option("--model", model, "builtin model instead of --system")
        ->check(CLI::IsMember({"hardcore", "colorings"}));
    app->add_option("--lambda", lambda, "hard-core activity")->capture_default_str();
    app->add_option("--q", q, "number of colors")->capture_default_str();
  }
  SpinSystem load() const {
    if (!spec.empty()) return resolve_system(spec);
    if (model == "hardcore") return SpinSystem::hardcore(lambda);
    if (model == "colorings") return SpinSystem::colorings(q);
    throw PreconditionError("a spin system is required: pass --system or --model");
  }
  std::string label() const {
    if (!spec.empty()) return spec;
    return model == "hardcore" ? "hardcore:" + num(lambda) : "colorings:" + std::to_string(q);
  }
};

void echo_system(Report& r, const SpinSystem& s) {
  r.kv("q", s.q());
  r.kv("B", list(s.interaction()));
  r.kv("lambda", list(s.activities()));
}

struct ChainInputs {
  double eps = 0.05;
  double fail_prob = 0.1;
  std::uint64_t seed = 1;
  std::optional<int> kmax_override;
  long long steps_per_sample = 0;
  double mixing_constant = 100.0;
  bool allow_uncertified = false;
  int biclique = -1;

  void attach(CLI::App* app) {
    app->add_option("--eps", eps, "relative accuracy")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    app->add_option("--fail-prob", fail_prob, "failure probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    app->add_option("--seed", seed, "master seed")->capture_default_str();
    app->add_option("--kmax-override", kmax_override, "polymer size truncation (default from eps and the size cap)");
    app->add_option("--steps-per-sample", steps_per_sample, "chain steps between samples (0: 2n)")->capture_default_str();
    app->add_option("--mixing-constant", mixing_constant, "burn-in constant C in C·n·ln(n/eps)")->capture_default_str();
    app->add_flag("--allow-uncertified", allow_uncertified, "run even if the polymer condition fails");
    app->add_option("--biclique", biclique, "index into the maximal bicliques (default: all)");
  }
  SamplerOptions options() const {
    SamplerOptions o;
    o.kmax_override = kmax_override;
    o.steps_per_sample = steps_per_sample;
    o.mixing_constant = mixing_constant;
    o.allow_uncertified = allow_uncertified;
    return o;
  }
};

std::vector<Biclique> select_bicliques(const SpinSystem& system, int index) {
  auto all = enumerate_maximal_bicliques(system);
  if (index < 0) return all;
  if (index >= static_cast<int>(all.size()))
    throw PreconditionError("biclique index " + std::to_string(index) + " out of range (" +
                            std::to_string(all.size()) + " maximal bicliques)");
  return {all[static_cast<std::size_t>(index)]};
}

void echo_resolved(Report& r, const BipartiteRegularGraph& g, const SpinSystem& s, int kmax) {
  const auto delta_b = delta_of_matrix(s);
  r.kv("n", g.n());
  r.kv("delta", g.degree());
  r.kv("delta_B", delta_b ? num(*delta_b) : std::string("undefined"));
  r.kv("min_lambda", s.min_lambda());
  r.kv("size_cap", size_cap(g.n(), g.degree()));
  r.kv("kmax", kmax);
  r.kv("tau", required_decay_rate(s.q(), g.degree()));
  if (g.degree() >= 3) r.kv("polymer_condition_margin", polymer_condition_margin(s, g.degree()));
}

std::string spin_string(const std::vector<int>& sigma, int q) {
  std::string s;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (q <= 10) s += static_cast<char>('0' + sigma[i]);
    else s += (i ? "," : "") + std::to_string(sigma[i]);
  }
  return s;
}

// ---- subcommands ------------------------------------------------------------

struct GenCommand {
  int n = 0;
  int delta = 3;
  std::uint64_t seed = 1;
  std::string generator = "auto";
  std::string out_path;

  void attach(CLI::App* app) {
    app->add_option("--n", n, "vertices per side")->required();
    app->add_option("--delta", delta, "degree")->capture_default_str();
    app->add_option("--seed", seed, "seed")->capture_default_str();
    app->add_option("--generator", generator, "auto, rejection or switch")
        ->capture_default_str()->check(CLI::IsMember({"auto", "rejection", "switch"}));
    app->add_option("--out", out_path, "output file (default: stdout)");
  }
  void run(std::ostream& out) const {
    const GraphModel model = generator == "rejection" ? GraphModel::kPermutationRejection
                             : generator == "switch"  ? GraphModel::kSwitchChain
                                                      : GraphModel::kAutomatic;
    const auto g = generate(n, delta, seed, model);
    if (out_path.empty()) out << graph_to_json(g);
    else write_graph(out_path, g);
  }
};

struct PhasesCommand {
  std::string model = "colorings";
  std::string system_file;
  int q = 4;
  int delta = 3;
  double lambda = 1.0;
  std::string verify;
  int starts = 100;
  std::uint64_t seed = 1;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "colorings, hardcore or file")
        ->capture_default_str()->check(CLI::IsMember({"colorings", "hardcore", "file"}));
    app->add_option("--system", system_file, "spin-system file for --model file");
    app->add_option("--q", q, "number of colors")->capture_default_str();
    app->add_option("--delta", delta, "tree degree")->required();
    app->add_option("--lambda", lambda, "hard-core activity (may exceed 1)")->capture_default_str();
    app->add_option("--verify", verify, "maximality, failure or search")
        ->check(CLI::IsMember({"maximality", "failure", "search"}));
    app->add_option("--starts", starts, "random starts for search")->capture_default_str();
    app->add_option("--seed", seed, "seed for search")->capture_default_str();
  }

  static void print_fixpoint(Report& r, const FixpointReport& f) {
    r.kv("r", list(f.pair.r));
    r.kv("c", list(f.pair.c));
    r.kv("phi", f.phi);
    r.kv("residual", f.residual);
    r.kv("alpha_star", list(f.alpha_star));
    r.kv("beta_star", list(f.beta_star));
    r.kv("l_singular_values", list(f.l_spectrum));
    r.kv("hessian_dominant", f.hessian_dominant);
  }

  void run(std::ostream& out) const {
    Report r(out);
    r.kv("command", "phases");
    r.kv("model", model);
    r.kv("delta", delta);
    const std::string mode = !verify.empty() ? verify : (model == "file" ? "search" : "maximality");
    r.kv("verify", mode);
    if (model == "colorings" && mode == "maximality") {
      r.kv("q", q);
      const auto v = verify_coloring_maximality(q, delta);
      print_coloring(r, v.solution);
      r.kv("threshold", 1.0 / (15.0 * delta * q));
      r.kv("margin", v.margin);
      r.kv("bound_holds", v.bound_holds);
      r.kv("hessian_dominant", v.hessian_dominant);
      r.kv("verdict", v.verdict);
    } else if (model == "colorings" && mode == "failure") {
      r.kv("q", q);
      const auto v = verify_coloring_failure(q, delta);
      print_coloring(r, v.solution);
      r.kv("threshold", v.threshold);
      r.kv("verdict", v.verdict);
    } else if (model == "hardcore" && mode == "maximality") {
      r.kv("lambda", lambda);
      r.kv("lambda_c", hardcore_critical_activity(delta));
      const auto v = verify_hardcore_maximality(delta, lambda);
      r.kv("x0", v.solution.x0);
      r.kv("x", v.solution.x);
      r.kv("y", v.solution.y);
      r.kv("residual", v.solution.residual);
      r.kv("alpha_star", list(v.solution.alpha_star));
      r.kv("beta_star", list(v.solution.beta_star));
      r.kv("deviation", v.deviation);
      r.kv("threshold", v.threshold);
      r.kv("x_bound_holds", v.x_bound_holds);
      r.kv("hessian_dominant", v.hessian_dominant);
      r.kv("verdict", v.verdict);
    } else if (mode == "search") {
      const SpinWeights weights = model == "file"       ? SpinWeights(read_system(system_file))
                                  : model == "hardcore" ? SpinWeights::hardcore(lambda)
                                                        : SpinWeights(SpinSystem::colorings(q));
      MaximizerSearchOptions options;
      options.starts = starts;
      options.seed = seed;
      r.kv("starts", starts);
      r.kv("seed", seed);
      const auto found = find_phi_maximizers(weights, delta, options);
      r.kv("maximizers", found.size());
      for (std::size_t i = 0; i < found.size(); ++i) {
        r.section("maximizer " + std::to_string(i));
        print_fixpoint(r, found[i]);
        r.end_section();
      }
    } else {
      throw PreconditionError("--verify " + mode + " is not defined for model " + model);
    }
  }

  static void print_coloring(Report& r, const ColoringFixpointSolution& s) {
    r.kv("log_h", s.log_h);
    r.kv("h", s.h);
    r.kv("a", s.a);
    r.kv("b", s.b);
    r.kv("a_prime", s.a_prime);
    r.kv("b_prime", s.b_prime);
    r.kv("residual", s.residual);
  }
};

struct CountCommand {
  GraphSource graph;
  SystemSource system;
  ChainInputs chain;

  void run(std::ostream& out) const {
    const auto g = graph.load();
    const auto s = system.load();
    const auto bicliques = select_bicliques(s, chain.biclique);
    Report r(out);
    r.kv("command", "count");
    graph.echo(r);
    r.kv("system", system.label());
    echo_system(r, s);
    r.kv("eps", chain.eps);
    r.kv("fail_prob", chain.fail_prob);
    r.kv("seed", chain.seed);
    r.kv("mixing_constant", chain.mixing_constant);
    r.kv("steps_per_sample", chain.steps_per_sample > 0 ? chain.steps_per_sample : g.vertex_count());
    const auto options = chain.options();
    echo_resolved(r, g, s, resolve_kmax(g.n(), g.degree(), chain.eps, options.kmax_override));
    const auto estimate = estimate_z_pmer(g, s, bicliques, chain.eps, chain.fail_prob, chain.seed, options);
    for (std::size_t k = 0; k < estimate.reports.size(); ++k) {
      const auto& e = estimate.reports[k];
      r.section("estimate " + std::to_string(k));
      r.kv("biclique", format_biclique(e.biclique));
      r.kv("certified", e.certified);
      r.kv("seed", e.seed);
      r.kv("fail_prob", e.fail_prob);
      r.kv("samples_per_ratio", e.samples_per_ratio);
      r.kv("samples_used", e.samples_used);
      r.kv("z_st_estimate", e.z_st_estimate);
      r.kv("log_z_st_estimate", e.log_z_st_estimate);
      r.kv("per_vertex_ratios", list(e.per_vertex_ratios));
      r.kv("log_term", estimate.log_terms[k]);
      r.end_section();
    }
    r.kv("log_z_pmer_estimate", estimate.log_z_pmer);
  }
};

struct SampleCommand {
  GraphSource graph;
  SystemSource system;
  ChainInputs chain;
  long long count = 1;

  void run(std::ostream& out) const {
    if (count < 1) throw PreconditionError("--count must be positive");
    const auto g = graph.load();
    const auto s = system.load();
    const auto bicliques = select_bicliques(s, chain.biclique);
    Report r(out);
    r.kv("command", "sample");
    graph.echo(r);
    r.kv("system", system.label());
    echo_system(r, s);
    r.kv("eps", chain.eps);
    r.kv("fail_prob", chain.fail_prob);
    r.kv("seed", chain.seed);
    r.kv("count", count);
    r.kv("steps_per_sample", chain.steps_per_sample > 0 ? chain.steps_per_sample : g.vertex_count());
    const auto options = chain.options();
    echo_resolved(r, g, s, resolve_kmax(g.n(), g.degree(), chain.eps, options.kmax_override));
    const auto estimate =
        estimate_z_pmer(g, s, bicliques, chain.eps, chain.fail_prob, derive_seed(chain.seed, 0), options);
    r.kv("certified", estimate.reports.front().certified);
    r.kv("log_z_pmer_estimate", estimate.log_z_pmer);
    const auto draws = sample_spin_assignments(g, s, estimate, count, chain.eps, derive_seed(chain.seed, 1), options);
    r.section("samples");
    for (const auto& sigma : draws) r.raw() << "  " << spin_string(sigma, s.q()) << "\n";
    r.end_section();
  }
};

struct OracleCommand {
  GraphSource graph;
  SystemSource system;
  std::string what = "Z";
  std::optional<int> kmax_override;
  int biclique = -1;

  void attach(CLI::App* app) {
    graph.attach(app);
    system.attach(app);
    app->add_option("--what", what, "Z, phases, polymerZ or mu")
        ->capture_default_str()->check(CLI::IsMember({"Z", "phases", "polymerZ", "mu"}));
    app->add_option("--kmax-override", kmax_override, "polymer size cap (default: floor(n/(6Δ)))");
    app->add_option("--biclique", biclique, "index into the maximal bicliques (default: all)");
  }

  void run(std::ostream& out) const {
    const auto g = graph.load();
    const auto s = system.load();
    const int cap = kmax_override.value_or(size_cap(g.n(), g.degree()));
    Report r(out);
    r.kv("command", "oracle");
    r.kv("what", what);
    graph.echo(r);
    r.kv("system", system.label());
    echo_system(r, s);
    echo_resolved(r, g, s, cap);
    if (what == "Z") {
      const double z = exact_partition_function(g, s);
      r.kv("Z", z);
      r.kv("log_Z", std::log(z));
    } else if (what == "phases") {
      const auto histograms = exact_phase_decomposition(g, s);
      double z = 0.0;
      for (const auto& h : histograms) z += h.mass;
      r.kv("Z", z);
      r.kv("histograms", histograms.size());
      r.raw() << "alpha_counts\tbeta_counts\tmass\tfraction\n";
      for (const auto& h : histograms)
        r.raw() << ints(h.alpha_counts) << "\t" << ints(h.beta_counts) << "\t" << num(h.mass) << "\t"
                << num(h.mass / z) << "\n";
    } else if (what == "polymerZ") {
      const auto bicliques = select_bicliques(s, biclique);
      for (std::size_t k = 0; k < bicliques.size(); ++k) {
        r.section("biclique " + std::to_string(k));
        r.kv("biclique", format_biclique(bicliques[k]));
        r.kv("z_st", exact_polymer_partition_function(g, s, bicliques[k], cap));
        r.kv("restricted_spin_sum", restricted_spin_sum(g, s, bicliques[k], cap));
        r.end_section();
      }
      const double log_pmer = exact_log_z_pmer(g, s, bicliques, cap);
      r.kv("log_z_pmer", log_pmer);
      try {
        const double log_z = std::log(exact_partition_function(g, s));
        r.kv("log_Z", log_z);
        r.kv("z_pmer_over_z", std::exp(log_pmer - log_z));
      } catch (const BudgetExceeded&) {
        r.kv("log_Z", "skipped (beyond the enumeration budget)");
      }
    } else {
      const auto bicliques = select_bicliques(s, biclique);
      for (std::size_t k = 0; k < bicliques.size(); ++k) {
        const auto mu = exact_mu_st(g, s, bicliques[k], cap);
        r.section("biclique " + std::to_string(k));
        r.kv("biclique", format_biclique(bicliques[k]));
        r.kv("configurations", mu.size());
        for (const auto& e : mu) {
          std::string key = "{";
          for (std::size_t i = 0; i < e.key.size(); ++i)
            key += (i ? "," : "") + std::to_string(e.key[i].first) + ":" + std::to_string(e.key[i].second);
          r.raw() << "  " << key << "}\t" << num(e.weight) << "\t" << num(e.probability) << "\n";
        }
        r.end_section();
      }
    }
  }
};

struct VerifyCommand {
  std::vector<int> criteria;

  void attach(CLI::App* app) {
    app->add_option("--criteria", criteria, "criterion ids to run (default: all)")->delimiter(',');
  }
  bool run(std::ostream& out, std::ostream& err) const {
    bool all = true;
    out << "criterion\tresult\ttitle\tdetail\n";
    for (const auto& c : run_acceptance(criteria)) {
      all = all && c.passed;
      out << c.id << "\t" << (c.passed ? "PASS" : "FAIL") << "\t" << c.title << "\t" << c.detail << "\n";
      err << "criterion " << c.id << " took " << num(c.seconds) << " s\n";
    }
    if (criteria.empty() || std::find(criteria.begin(), criteria.end(), 11) != criteria.end()) {
      out << "diagnostic\tkmax\tlog_z_pmer\tlog_Z\tz_pmer_over_z\n";
      for (const auto& d : pmer_diagnostics())
        out << d.name << "\t" << d.kmax << "\t" << num(d.log_z_pmer) << "\t" << num(d.log_z) << "\t"
            << num(d.ratio) << "\n";
    }
    return all;
  }
};

struct SweepCommand {
  std::string model = "colorings";
  std::string system_file;
  std::string verify = "maximality";
  std::vector<int> qs{4};
  std::vector<int> deltas;
  std::vector<double> lambdas{1.0};
  std::uint64_t seed = 1;
  int starts = 20;
  bool csv = false;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "colorings, hardcore or file")
        ->capture_default_str()->check(CLI::IsMember({"colorings", "hardcore", "file"}));
    app->add_option("--system", system_file, "spin-system file for --model file");
    app->add_option("--verify", verify, "maximality, failure (colorings) or search (file)")
        ->capture_default_str()->check(CLI::IsMember({"maximality", "failure", "search"}));
    app->add_option("--q", qs, "color counts")->delimiter(',');
    app->add_option("--deltas", deltas, "degrees")->delimiter(',')->required();
    app->add_option("--lambdas", lambdas, "hard-core activities")->delimiter(',');
    app->add_option("--seed", seed, "master seed; cell seeds derive from it")->capture_default_str();
    app->add_option("--starts", starts, "random starts per search cell")->capture_default_str();
    app->add_flag("--csv", csv, "emit CSV");
  }

  struct Cell {
    std::vector<std::pair<std::string, std::string>> fields;
    std::string error;
  };

  Cell evaluate(int q, int delta, double lambda, std::uint64_t cell_seed) const {
    Cell c;
    auto put = [&](const std::string& k, const std::string& v) { c.fields.emplace_back(k, v); };
    put("delta", std::to_string(delta));
    try {
      if (model == "colorings" && verify == "maximality") {
        put("q", std::to_string(q));
        const auto v = verify_coloring_maximality(q, delta);
        put("log_h", num(v.solution.log_h));
        put("b_prime", num(v.b_prime));
        put("margin", num(v.margin));
        put("hessian_dominant", v.hessian_dominant ? "true" : "false");
        put("verdict", v.verdict ? "true" : "false");
      } else if (model == "colorings" && verify == "failure") {
        put("q", std::to_string(q));
        const auto v = verify_coloring_failure(q, delta);
        put("log_h", num(v.solution.log_h));
        put("b_prime", num(v.b_prime));
        put("threshold", num(v.threshold));
        put("verdict", v.verdict ? "true" : "false");
      } else if (model == "hardcore") {
        put("lambda", num(lambda));
        const auto v = verify_hardcore_maximality(delta, lambda);
        put("x", num(v.solution.x));
        put("deviation", num(v.deviation));
        put("threshold", num(v.threshold));
        put("hessian_dominant", v.hessian_dominant ? "true" : "false");
        put("verdict", v.verdict ? "true" : "false");
      } else if (model == "file") {
        MaximizerSearchOptions options;
        options.starts = starts;
        options.seed = cell_seed;
        const auto found = find_phi_maximizers(SpinWeights(read_system(system_file)), delta, options);
        put("seed", std::to_string(cell_seed));
        put("maximizers", std::to_string(found.size()));
        put("top_phi", found.empty() ? "nan" : num(found.front().phi));
        put("top_hessian_dominant", !found.empty() && found.front().hessian_dominant ? "true" : "false");
      } else {
        throw PreconditionError("unsupported sweep");
      }
    } catch (const PreconditionError& e) {
      c.error = e.what();
    }
    return c;
  }

  void run(std::ostream& out) const {
    struct Spec {
      int q;
      int delta;
      double lambda;
    };
    std::vector<Spec> grid;
    for (int delta : deltas) {
      if (model == "colorings")
        for (int q : qs) grid.push_back({q, delta, 0.0});
      else if (model == "hardcore")
        for (double l : lambdas) grid.push_back({0, delta, l});
      else
        grid.push_back({0, delta, 0.0});
    }
    std::vector<Cell> cells(grid.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < grid.size(); ++i)
      cells[i] = evaluate(grid[i].q, grid[i].delta, grid[i].lambda, derive_seed(seed, i));

    if (csv) {
      bool header = false;
      for (const auto& c : cells) {
        if (!c.error.empty()) continue;
        if (!header) {
          for (std::size_t k = 0; k < c.fields.size(); ++k) out << (k ? "," : "") << c.fields[k].first;
          out << "\n";
          header = true;
        }
        for (std::size_t k = 0; k < c.fields.size(); ++k) out << (k ? "," : "") << c.fields[k].second;
        out << "\n";
      }
      return;
    }
    Report r(out);
    r.kv("command", "sweep");
    r.kv("model", model);
    r.kv("verify", verify);
    r.kv("seed", seed);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      r.section("cell " + std::to_string(i));
      for (const auto& [k, v] : cells[i].fields) r.kv(k, v);
      if (!cells[i].error.empty()) r.kv("error", cells[i].error);
      r.end_section();
    }
  }
};

}  // namespace

void apply_thread_setting() {
  if (const char* env = std::getenv("BIPOLYMER_THREADS")) {
    const int threads = std::atoi(env);
    if (threads > 0) omp_set_num_threads(threads);
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  apply_thread_setting();
  CLI::App app{"Polymer-method counting and sampling for spin systems on bipartite regular graphs"};
  app.require_subcommand(1);

  GenCommand gen;
  gen.attach(app.add_subcommand("gen", "generate a random bipartite regular graph"));
  PhasesCommand phases;
  phases.attach(app.add_subcommand("phases", "tree-recursion fixpoints and their certificates"));
  CountCommand count;
  auto* count_app = app.add_subcommand("count", "estimate Z^{S,T} and Z^pmer with the polymer chain");
  count.graph.attach(count_app);
  count.system.attach(count_app);
  count.chain.attach(count_app);
  SampleCommand sample;
  auto* sample_app = app.add_subcommand("sample", "draw approximate spin assignments");
  sample.graph.attach(sample_app);
  sample.system.attach(sample_app);
  sample.chain.attach(sample_app);
  sample_app->add_option("--count", sample.count, "number of assignments")->capture_default_str();
  OracleCommand oracle;
  oracle.attach(app.add_subcommand("oracle", "exact brute-force quantities"));
  VerifyCommand verify;
  verify.attach(app.add_subcommand("verify", "run the acceptance suite"));
  SweepCommand sweep;
  sweep.attach(app.add_subcommand("sweep", "fixpoint certificates over a parameter grid"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  int status = 0;
  try {
    const auto* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    if (name == "gen") gen.run(out);
    else if (name == "phases") phases.run(out);
    else if (name == "count") count.run(out);
    else if (name == "sample") sample.run(out);
    else if (name == "oracle") oracle.run(out);
    else if (name == "verify") status = verify.run(out, err) ? 0 : 1;
    else if (name == "sweep") sweep.run(out);
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "wall_time_seconds: " << num(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count())
      << "\n";
  return status;
}

}  // namespace bipolymer::cli
