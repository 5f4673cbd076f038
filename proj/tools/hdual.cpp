// Command-line front end: verify, sample, analyze, transform, potentials.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "hdual/config.hpp"
#include "hdual/suite.hpp"

namespace {

using namespace hdual;

constexpr int kOk = 0, kFailed = 1, kUsage = 2, kBudget = 3;

struct Globals {
  std::string config;
  bool print_config = false;
  int threads = 0;
  std::size_t budget = 0;
  bool no_header = false;
};

/// Output stream that is either stdout or a file under the configured directory.
class Sink {
 public:
  Sink(const std::string& path, const RunConfig& cfg) {
    if (path.empty() || path == "-") return;
    std::filesystem::path p(path);
    if (p.is_relative() && cfg.directory != ".") p = std::filesystem::path(cfg.directory) / p;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    file_ = std::make_unique<std::ofstream>(p);
    if (!*file_) throw ConfigError("cannot write '" + p.string() + "'");
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void header_line(std::ostream& os, const RunConfig& cfg, const std::string& what) {
  if (!cfg.header) return;
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  os << "# hdual " << what << ' ' << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\n';
}

bool blank_file(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos != std::string::npos && line[pos] != '#' && line[pos] != ';') return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string corpus;
  std::vector<std::string> suites;
  std::size_t twists = 20;
  std::uint64_t seed = 20240611;
  std::string out;
};

const std::vector<std::string> kOracleSuites{"duality", "covariance", "gff", "projection", "monotonicity",
                                             "transform", "ginibre", "reflection", "bridge"};

SuiteResult run_suite(const std::string& name, const SuiteOptions& o) {
  if (name == "duality") return duality_suite(o);
  if (name == "covariance") return covariance_suite(o);
  if (name == "gff") return gff_suite(o);
  if (name == "projection") return projection_suite(o);
  if (name == "monotonicity") return monotonicity_suite(o);
  if (name == "transform") return transform_suite(o);
  if (name == "ginibre") return ginibre_suite(o);
  if (name == "reflection") return reflection_suite(o);
  if (name == "bridge") return bridge_suite(o);
  if (name == "mcmc") return mcmc_suite(o);
  if (name == "torus") return torus_suite(o);
  throw ConfigError("unknown suite '" + name + "'");
}

/// Identities on the configured model: duality, covariance, and for the star
/// sector the GFF bound and the projection bounds.
std::vector<VerificationReport> verify_model(const RunConfig& cfg, const VerifyArgs& a) {
  const ModelSpec m = build_spec(cfg);
  const std::string name = describe(m, cfg.builder + std::to_string(cfg.size));
  const std::size_t E = m.graph().num_edges(), V = m.graph().num_vertices();
  std::vector<VerificationReport> out = verify_duality(m, random_twists(E, a.twists, chain_seed(a.seed, 0)), name);
  const CovarianceOracle oracle(m);
  const auto forms = random_twists(E, 2, chain_seed(a.seed, 1));
  out.push_back(oracle.check(forms[0], forms[1], name));
  for (const auto& r : oracle.pointwise(name)) out.push_back(r);
  if (m.sector == Sector::star) {
    for (Vertex v = 0; v < V; ++v) {
      if (v == m.graph().boundary()) continue;
      ZeroForm<double> f(V, 0.0);
      f[v] = 1.0;
      out.push_back(verify_gff_bound(m, f, name + "#v" + std::to_string(v)));
    }
    std::mt19937_64 rng(chain_seed(a.seed, 2));
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    ZeroForm<double> f(V), g(V);
    for (std::size_t i = 0; i < V; ++i) {
      f[i] = U(rng);
      g[i] = U(rng);
    }
    for (const auto& r : verify_projection_bounds(m, f, g, name)) out.push_back(r);
  }
  return out;
}

int cmd_verify(const RunConfig& cfg, const VerifyArgs& a) {
  std::vector<VerificationReport> reports;
  if (!a.corpus.empty() || !a.suites.empty()) {
    if (!a.corpus.empty() && a.corpus != "default") throw ConfigError("unknown corpus '" + a.corpus + "'");
    SuiteOptions o;
    o.seed = a.seed;
    o.budget = cfg.budget;
    o.twists = a.twists;
    o.progress = [](const std::string& s) { std::cerr << s << '\n'; };
    for (const auto& s : a.suites.empty() ? kOracleSuites : a.suites) {
      const auto r = run_suite(s, o);
      reports.insert(reports.end(), r.reports.begin(), r.reports.end());
    }
  } else {
    reports = verify_model(cfg, a);
  }
  Sink sink(a.out, cfg);
  header_line(sink.os(), cfg, "verify");
  write_csv_header(sink.os());
  for (const auto& r : reports) write_csv(sink.os(), r);
  std::size_t failed = 0;
  for (const auto& r : reports) failed += !r.pass;
  std::cerr << reports.size() << " reports, " << failed << " failed\n";
  return failed == 0 ? kOk : kFailed;
}

// ---------------------------------------------------------------------------
// sample

struct SampleArgs {
  std::size_t sweeps = 0, burn_in = 0, thin = 0, chains = 0;
  std::uint64_t seed = 0;
  std::string chain;
  std::string out;
  bool seed_set = false;
};

std::vector<CycleMove> moves_for(const RunConfig& cfg, const FiniteGraph& g) {
  if (cfg.builder == "torus") return torus_moves(cfg.size);
  return fundamental_moves(g);
}

int cmd_sample(RunConfig cfg, const SampleArgs& a) {
  if (a.sweeps) cfg.sweeps = a.sweeps;
  if (a.burn_in) cfg.burn_in = a.burn_in;
  if (a.thin) cfg.thin = a.thin;
  if (a.chains) cfg.chains = a.chains;
  if (a.seed_set) cfg.seed = a.seed;
  if (!a.chain.empty()) cfg.chain = a.chain;
  validate(cfg);
  const ModelSpec m = build_spec(cfg);
  const std::size_t E = m.graph().num_edges();
  if (cfg.chain == "height" && m.sector != Sector::star)
    throw ConfigError("the height chain samples the star sector only");
  RunOptions opt;
  opt.sweeps = cfg.sweeps;
  opt.burn_in = cfg.burn_in;
  opt.thin = cfg.thin;
  const bool heights = cfg.chain == "height";
  std::vector<std::string> rows(cfg.chains);
  parallel_for(cfg.chains, [&](std::size_t k) {
    std::ostringstream os;
    os.precision(17);
    std::size_t index = 0;
    auto emit = [&](const auto& values) {
      os << k << ',' << index++;
      for (const auto& v : values) os << ',' << v;
      os << '\n';
    };
    const std::uint64_t seed = chain_seed(cfg.seed, k);
    if (heights) {
      HeightChain c(m.net, seed);
      run_chain(c, opt, [&](const HeightChain& ch) { emit(ch.gradient()); });
    } else if (m.sector == Sector::star) {
      SpinStarChain c(m.net, seed);
      run_chain(c, opt, [&](const SpinStarChain& ch) { emit(ch.J()); });
    } else {
      SpinDiamondChain c(m.net, seed, moves_for(cfg, m.graph()));
      run_chain(c, opt, [&](const SpinDiamondChain& ch) { emit(ch.J()); });
    }
    rows[k] = os.str();
  });
  Sink sink(a.out, cfg);
  header_line(sink.os(), cfg, "sample");
  sink.os() << "chain,sample";
  for (std::size_t e = 0; e < E; ++e) sink.os() << (heights ? ",n" : ",J") << e;
  sink.os() << '\n';
  for (const auto& r : rows) sink.os() << r;
  return kOk;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string input, out, summary;
  std::size_t max_distance = 0;
  std::vector<std::size_t> clt;
  double nsigma = 3.0;
};

/// Spin samples grouped by chain, in file order.
std::map<long, std::vector<OneForm<double>>> read_samples(const std::string& path, std::size_t E) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open samples '" + path + "'");
  std::string line;
  bool have_header = false;
  std::map<long, std::vector<OneForm<double>>> out;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      if (cells.size() != E + 2 || cells[0] != "chain" || (E > 0 && cells[2] != "J0"))
        throw ConfigError("samples '" + path + "': expected header chain,sample,J0..J" + std::to_string(E - 1) +
                          " for the configured graph");
      have_header = true;
      continue;
    }
    if (cells.size() != E + 2) throw ConfigError("samples line " + std::to_string(lineno) + ": wrong column count");
    OneForm<double> J(E);
    for (std::size_t e = 0; e < E; ++e) J[e] = std::stod(cells[e + 2]);
    out[std::stol(cells[0])].push_back(std::move(J));
  }
  if (!have_header) throw ConfigError("samples '" + path + "' has no header");
  return out;
}

nlohmann::json to_json(const Estimate& e) {
  return {{"mean", e.mean}, {"se", e.se}, {"tau", e.tau}, {"n", e.n}, {"reliable", e.reliable}};
}

nlohmann::json to_json(const VerificationReport& r) {
  return {{"identity", r.identity}, {"instance", r.instance}, {"lhs", r.lhs},           {"rhs", r.rhs},
          {"residual", r.residual}, {"tolerance", r.tolerance}, {"pass", r.pass}};
}

int cmd_analyze(const RunConfig& cfg, const AnalyzeArgs& a) {
  const Network net = build_network(cfg);
  const std::size_t E = net.graph.num_edges();
  const auto chains = read_samples(a.input, E);
  std::size_t total = 0;
  for (const auto& [k, s] : chains) total += s.size();
  if (total == 0) throw ConfigError("samples '" + a.input + "' contain no rows");
  Sink sink(a.out, cfg);
  header_line(sink.os(), cfg, "analyze");
  nlohmann::json summary;
  summary["samples"] = total;
  summary["chains"] = chains.size();
  std::vector<VerificationReport> checks;
  // Loop sums close only for divergence-free samples, so the series checks need the diamond sector.
  if (cfg.builder == "torus" && cfg.sector == "diamond") {
    TorusSeriesOptions opt;
    opt.max_distance = a.max_distance;
    opt.clt_lengths = a.clt;
    std::unique_ptr<TorusSeriesAccumulator> acc;
    for (const auto& [k, samples] : chains) {
      TorusSeriesAccumulator part(net, cfg.size, samples.size(), opt);
      for (const auto& J : samples) part.add(J);
      if (acc)
        acc->merge(part);
      else
        acc = std::make_unique<TorusSeriesAccumulator>(std::move(part));
    }
    auto rep = acc->report();
    for (auto& c : rep.clt) c.finite_size_bound = clt_finite_size_bound(cfg.size, c.n, rep.u2.mean);
    auto& os = sink.os();
    os.precision(17);
    os << "i,c,c_se,partial,partial_se,u,u_se,cesaro,cesaro_se,vanish,vanish_se,cos_dual,cos_dual_se,xy_gap,"
          "xy_gap_se\n";
    for (const auto& r : rep.rows) {
      os << r.i;
      for (const Estimate* e : {&r.c, &r.partial, &r.u, &r.cesaro, &r.vanish, &r.cos_dual, &r.xy_gap})
        os << ',' << e->mean << ',' << e->se;
      os << '\n';
    }
    const std::string name = "torus" + std::to_string(cfg.size);
    checks.push_back(symmetric_sum_check(*acc, acc->max_distance(), name, a.nsigma));
    for (const auto& r : vanishing_bound_check(rep, name, a.nsigma)) checks.push_back(r);
    for (const auto& c : rep.clt) {
      checks.push_back(clt_check(rep, c, name, a.nsigma));
      checks.push_back(clt_ks_check(c, name));
      summary["clt"].push_back({{"n", c.n}, {"variance", to_json(c.variance)}, {"ks", c.ks}, {"values", c.values}});
    }
    summary["side"] = cfg.size;
    summary["u2"] = to_json(rep.u2);
    summary["u1"] = to_json(rep.u1);
    summary["loop"] = to_json(rep.loop);
  } else {
    BatchAccumulator acc(2 * E, BatchAccumulator::batch_size_for(total));
    std::vector<double> u1, u2, x(2 * E);
    for (const auto& [k, samples] : chains)
      for (const auto& J : samples) {
        spin_derivatives(net, J, u1, u2);
        for (std::size_t e = 0; e < E; ++e) {
          x[e] = u1[e];
          x[E + e] = u2[e];
        }
        acc.add(x);
      }
    auto& os = sink.os();
    os.precision(17);
    os << "edge,u1,u1_se,u2,u2_se\n";
    for (std::size_t e = 0; e < E; ++e) {
      const auto m1 = acc.estimate(e), m2 = acc.estimate(E + e);
      os << e << ',' << m1.mean << ',' << m1.se << ',' << m2.mean << ',' << m2.se << '\n';
    }
  }
  bool pass = true;
  summary["checks"] = nlohmann::json::array();
  for (const auto& r : checks) {
    summary["checks"].push_back(to_json(r));
    pass = pass && r.pass;
  }
  summary["pass"] = pass;
  if (a.summary.empty()) {
    std::cerr << summary.dump(2) << '\n';
  } else {
    Sink s(a.summary, cfg);
    s.os() << summary.dump(2) << '\n';
  }
  return pass ? kOk : kFailed;
}

// ---------------------------------------------------------------------------
// transform

struct TransformArgs {
  std::string graph, log, log_out, out;
  std::vector<std::string> ops;
};

int cmd_transform(const RunConfig& cfg, const TransformArgs& a) {
  Network net = build_network(cfg);
  if (!a.graph.empty()) {
    std::ifstream in(a.graph);
    if (!in) throw ConfigError("cannot open graph '" + a.graph + "'");
    const FiniteGraph g = read_graph(in);
    for (const Edge& e : g.edges())
      if (e.potential >= net.potentials.size())
        throw ConfigError("graph '" + a.graph + "' uses potential id " + std::to_string(e.potential) +
                          " but the config defines " + std::to_string(net.potentials.size()));
    net.graph = g;
  }
  TransformLog log = TransformLog::identity(net.graph.num_vertices());
  auto apply = [&](const TransformOp& op) {
    std::vector<Vertex> step(net.graph.num_vertices());
    for (Vertex v = 0; v < step.size(); ++v) step[v] = v;
    switch (op.kind) {
      case TransformOp::split: net = split_edge(net, op.a, static_cast<int>(op.k)); break;
      case TransformOp::glue: net = glue_vertices(net, op.a, op.b, &step); break;
      case TransformOp::reduce: net = degree_reduce(net, op.a, &step); break;
      case TransformOp::merge: net = merge_parallel_edges(net); break;
      case TransformOp::add_edge: throw ConfigError("add_edge needs a potential and is not available here");
    }
    log.compose(step);
    log.ops.push_back(op);
  };
  if (!a.log.empty()) {
    std::ifstream in(a.log);
    if (!in) throw ConfigError("cannot open log '" + a.log + "'");
    for (const auto& op : parse_ops(in)) apply(op);
  }
  for (const auto& text : a.ops) {
    if (text == "star-tree") {
      // replay the recorded steps so the vertex map follows every one of them
      for (const auto& op : star_tree_transform(net).log.ops) apply(op);
      continue;
    }
    std::istringstream is(text);
    for (const auto& op : parse_ops(is)) apply(op);
  }
  Sink sink(a.out, cfg);
  auto& os = sink.os();
  header_line(os, cfg, "transform");
  for (PotentialId p = 0; p < net.potentials.size(); ++p) os << "# potential " << p << ' ' << net.potentials[p].describe() << '\n';
  os << "# vertex_map";
  for (Vertex v : log.vertex_map) os << ' ' << v;
  os << '\n';
  write_graph(os, net.graph);
  if (!a.log_out.empty()) {
    Sink l(a.log_out, cfg);
    l.os() << log.text();
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// potentials

struct PotentialArgs {
  std::string family, components, file, out;
  double beta = -1.0;
  bool table = false;
  int grid = 0;
};

int cmd_potentials(const RunConfig& cfg, const PotentialArgs& a) {
  PotentialSpec spec = cfg.potential;
  if (!a.family.empty()) spec.family = a.family;
  if (a.beta >= 0.0) spec.beta = a.beta;
  if (!a.components.empty()) spec.components = a.components;
  if (!a.file.empty()) spec.table = a.file;
  RunConfig probe = cfg;
  probe.potential = spec;
  probe.classes.clear();
  validate(probe);
  const PotentialPair p = build_potential(spec);
  Sink sink(a.out, cfg);
  auto& os = sink.os();
  header_line(os, cfg, "potentials " + p.describe());
  os.precision(17);
  const bool table = a.table || a.grid == 0;
  if (table) {
    os << "n,c_n,V_n\n";
    const double shift = p.spin().log_scale();
    for (long n = 0; n <= p.nmax(); ++n) os << n << ',' << p.coefficient(n) << ',' << p.height().V(n) - shift << '\n';
  }
  if (a.grid > 0) {
    os << "alpha,w,U,U1,U2\n";
    const double shift = p.spin().log_scale();
    for (int j = 0; j < a.grid; ++j) {
      const double alpha = -std::numbers::pi + 2.0 * std::numbers::pi * j / a.grid;
      const auto v = p.spin().evaluate(alpha);
      os << alpha << ',' << v.w * std::exp(shift) << ',' << v.U - shift << ',' << v.U1 << ',' << v.U2 << '\n';
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hdual: height and spin models on finite graphs, their duality and Monte Carlo checks"};
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_flag("--print-config", g.print_config, "print the effective configuration (all defaults) and exit");
  app.add_option("--threads", g.threads, "worker threads (default: HDUAL_THREADS or 1)")
      ->envname("HDUAL_THREADS")
      ->check(CLI::PositiveNumber);
  app.add_option("--budget", g.budget, "oracle state budget (grid points or height states)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--no-header", g.no_header, "omit the timestamped first line of CSV output");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "run oracle identities, on the configured model or a corpus");
  verify->add_option("--corpus", va.corpus, "corpus name (default)");
  verify->add_option("--suite", va.suites,
                     "suites: duality covariance gff projection monotonicity transform ginibre reflection bridge "
                     "mcmc torus (default: the oracle suites)");
  verify->add_option("--twists", va.twists, "random twists per instance")->check(CLI::PositiveNumber);
  verify->add_option("--seed", va.seed, "master seed for random test forms");
  verify->add_option("--out,-o", va.out, "CSV output file (default stdout)");

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "run Metropolis chains and stream raw edge values as CSV");
  sample->add_option("--sweeps", sa.sweeps, "total sweeps per chain, burn-in included");
  sample->add_option("--burnin", sa.burn_in, "burn-in sweeps (proposal widths adapt here)");
  sample->add_option("--thin", sa.thin, "keep every thin-th sweep");
  sample->add_option("--seed", sa.seed, "master seed; chain k uses the (k+1)-th splitmix64 output")
      ->each([&](const std::string&) { sa.seed_set = true; });
  sample->add_option("--chains", sa.chains, "independent chains");
  sample->add_option("--chain", sa.chain, "height or spin")->check(CLI::IsMember({"height", "spin"}));
  sample->add_option("--out,-o", sa.out, "CSV output file (default stdout)");

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "series report and checks from spin samples");
  analyze->add_option("--input,-i", aa.input, "samples CSV written by sample")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out,-o", aa.out, "report CSV (default stdout)");
  analyze->add_option("--summary", aa.summary, "JSON summary file (default stderr)");
  analyze->add_option("--max-distance", aa.max_distance, "largest distance on the torus (default side/2)");
  analyze->add_option("--clt", aa.clt, "path lengths for the CLT statistic");
  analyze->add_option("--nsigma", aa.nsigma, "standard errors allowed by the checks");

  TransformArgs ta;
  auto* transform = app.add_subcommand("transform", "apply graph transforms and print the result in graph text");
  transform->add_option("--graph", ta.graph, "graph text file (default: the configured graph)")
      ->check(CLI::ExistingFile);
  transform->add_option("--op", ta.ops, "\"split E K\", \"glue A B\", \"reduce V\", \"merge\" or \"star-tree\"");
  transform->add_option("--log", ta.log, "replay the operations in this log first")->check(CLI::ExistingFile);
  transform->add_option("--log-out", ta.log_out, "write the applied operations here");
  transform->add_option("--out,-o", ta.out, "graph output file (default stdout)");

  PotentialArgs pa;
  auto* potentials = app.add_subcommand("potentials", "tabulate a potential pair");
  potentials->add_option("--family", pa.family, "xy, ivgff, lipschitz, gaussian, annealed or table");
  potentials->add_option("--beta", pa.beta, "inverse temperature")->check(CLI::NonNegativeNumber);
  potentials->add_option("--components", pa.components, "annealed components gamma:weight;...");
  potentials->add_option("--file", pa.file, "two-column n c_n table for family table");
  potentials->add_flag("--table", pa.table, "rows n, c_n, V_n");
  potentials->add_option("--grid", pa.grid, "rows alpha, w, U, U', U'' on this many angles")
      ->check(CLI::PositiveNumber);
  potentials->add_option("--out,-o", pa.out, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (!g.config.empty() && blank_file(g.config)) {
      std::cerr << "config '" << g.config << "' is empty\n" << app.help();
      return kUsage;
    }
    RunConfig cfg = g.config.empty() ? RunConfig{} : load_config(g.config);
    if (g.budget) cfg.budget = g.budget;
    if (g.no_header) cfg.header = false;
    if (g.threads > 0) set_thread_count(g.threads);
    validate(cfg);
    if (g.print_config) {
      write_config(std::cout, cfg);
      return kOk;
    }
    if (verify->parsed()) return cmd_verify(cfg, va);
    if (sample->parsed()) return cmd_sample(cfg, sa);
    if (analyze->parsed()) return cmd_analyze(cfg, aa);
    if (transform->parsed()) return cmd_transform(cfg, ta);
    if (potentials->parsed()) return cmd_potentials(cfg, pa);
    std::cerr << app.help();
    return kUsage;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kBudget;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
}
