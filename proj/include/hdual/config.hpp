#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdual/corpus.hpp"
#include "hdual/green.hpp"
#include "hdual/oracle/model.hpp"
#include "hdual/transforms.hpp"

namespace hdual {

/// Malformed or out-of-range configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One potential: a named family with β, annealed components, or a two-column table file.
struct PotentialSpec {
  std::string family = "xy";  // xy | ivgff | lipschitz | gaussian | annealed | table
  double beta = 1.0;
  std::string components;      // annealed: "gamma:weight;gamma:weight"
  std::string table;           // table: path to "n c_n" lines
  friend bool operator==(const PotentialSpec&, const PotentialSpec&) = default;
};

/// Edges (by index) that carry a potential other than the default.
struct EdgeClass {
  std::string name;
  PotentialSpec potential;
  std::vector<EdgeIndex> edges;
  friend bool operator==(const EdgeClass&, const EdgeClass&) = default;
};

struct RunConfig {
  // [graph]
  std::string builder = "torus";  // path | cycle | star | torus | theta | box | wired_box | corpus | file
  std::size_t size = 2;
  std::string ambient = "nearest";  // box builders: nearest | range2
  std::string name;                 // corpus graph name
  std::string file;                 // graph text file
  // [potential] and [potential <class>]
  PotentialSpec potential;
  std::vector<EdgeClass> classes;
  // [oracle]
  std::string sector = "star";
  int K = 0;
  int M = 0;
  std::size_t budget = kDefaultBudget;
  // [mcmc]
  std::string chain = "spin";  // height | spin
  std::size_t sweeps = 100'000;
  std::size_t burn_in = 1'000;
  std::size_t thin = 1;
  std::size_t chains = 1;
  std::uint64_t seed = 1;
  // [output]
  std::string directory = ".";
  bool header = true;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

/// Shortest decimal text that reads back to the same double.
inline std::string exact_text(double x) {
  for (int p = 6; p <= 17; ++p) {
    std::ostringstream os;
    os.precision(p);
    os << x;
    if (std::stod(os.str()) == x) return os.str();
  }
  return std::to_string(x);
}

inline std::string join(const std::vector<EdgeIndex>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

template <class T>
T number(const boost::property_tree::ptree& sec, const std::string& section, const std::string& key, T fallback) {
  const auto v = sec.get_optional<std::string>(boost::property_tree::ptree::path_type(key, '/'));
  if (!v) return fallback;
  std::istringstream is(*v);
  T out{};
  if (!(is >> out) || !(is >> std::ws).eof())
    throw ConfigError("[" + section + "] " + key + " = '" + *v + "' is not a valid number");
  if constexpr (std::is_unsigned_v<T>)
    if (v->find('-') != std::string::npos) throw ConfigError("[" + section + "] " + key + " must be non-negative");
  return out;
}

inline std::string text(const boost::property_tree::ptree& sec, const std::string& key, const std::string& fallback) {
  return sec.get<std::string>(boost::property_tree::ptree::path_type(key, '/'), fallback);
}

inline bool flag(const boost::property_tree::ptree& sec, const std::string& section, const std::string& key,
                 bool fallback) {
  const std::string v = text(sec, key, fallback ? "true" : "false");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("[" + section + "] " + key + " must be true or false");
}

inline PotentialSpec read_potential(const boost::property_tree::ptree& sec, const std::string& section,
                                    PotentialSpec p) {
  p.family = text(sec, "family", p.family);
  p.beta = number<double>(sec, section, "beta", p.beta);
  p.components = text(sec, "components", p.components);
  p.table = text(sec, "table", p.table);
  return p;
}

inline void write_potential(std::ostream& os, const PotentialSpec& p) {
  os << "family = " << p.family << '\n';
  os << "beta = " << exact_text(p.beta) << '\n';
  if (!p.components.empty()) os << "components = " << p.components << '\n';
  if (!p.table.empty()) os << "table = " << p.table << '\n';
}

inline void check_keys(const boost::property_tree::ptree& sec, const std::string& section,
                       const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : sec) {
    if (!value.empty()) throw ConfigError("[" + section + "] has a nested entry '" + key + "'");
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("[" + section + "] unknown key '" + key + "'");
  }
}

}  // namespace detail

/// Every field, so that the output is a complete record of the run.
inline void write_config(std::ostream& os, const RunConfig& c) {
  using detail::exact_text;
  os << "[graph]\n";
  os << "builder = " << c.builder << '\n';
  os << "size = " << c.size << '\n';
  os << "ambient = " << c.ambient << '\n';
  if (!c.name.empty()) os << "name = " << c.name << '\n';
  if (!c.file.empty()) os << "file = " << c.file << '\n';
  os << "\n[potential]\n";
  detail::write_potential(os, c.potential);
  for (const auto& k : c.classes) {
    os << "\n[potential " << k.name << "]\n";
    detail::write_potential(os, k.potential);
    os << "edges = " << detail::join(k.edges) << '\n';
  }
  os << "\n[oracle]\n";
  os << "sector = " << c.sector << '\n';
  os << "K = " << c.K << '\n';
  os << "M = " << c.M << '\n';
  os << "budget = " << c.budget << '\n';
  os << "\n[mcmc]\n";
  os << "chain = " << c.chain << '\n';
  os << "sweeps = " << c.sweeps << '\n';
  os << "burn_in = " << c.burn_in << '\n';
  os << "thin = " << c.thin << '\n';
  os << "chains = " << c.chains << '\n';
  os << "seed = " << c.seed << '\n';
  os << "\n[output]\n";
  os << "directory = " << c.directory << '\n';
  os << "header = " << (c.header ? "true" : "false") << '\n';
}

inline std::string config_text(const RunConfig& c) {
  std::ostringstream os;
  write_config(os, c);
  return os.str();
}

/// Checks ranges and referenced files; throws ConfigError.
inline void validate(const RunConfig& c) {
  static const std::vector<std::string> builders{"path", "cycle", "star",   "torus", "theta",
                                                 "box",  "wired_box", "corpus", "file"};
  if (std::find(builders.begin(), builders.end(), c.builder) == builders.end())
    throw ConfigError("[graph] builder '" + c.builder + "' is not one of path, cycle, star, torus, theta, box, "
                      "wired_box, corpus, file");
  if (c.ambient != "nearest" && c.ambient != "range2") throw ConfigError("[graph] ambient must be nearest or range2");
  if (c.builder == "file" && !std::filesystem::exists(c.file))
    throw ConfigError("[graph] file '" + c.file + "' does not exist");
  if (c.builder == "corpus" && c.name.empty()) throw ConfigError("[graph] builder corpus needs a name");
  auto check_pot = [](const PotentialSpec& p, const std::string& where) {
    static const std::vector<std::string> fams{"xy", "ivgff", "lipschitz", "gaussian", "annealed", "table"};
    if (std::find(fams.begin(), fams.end(), p.family) == fams.end())
      throw ConfigError(where + " family '" + p.family + "' is not one of xy, ivgff, lipschitz, gaussian, annealed, table");
    if (!(p.beta >= 0.0) || !std::isfinite(p.beta)) throw ConfigError(where + " beta must be finite and >= 0");
    if (p.family == "table" && !std::filesystem::exists(p.table))
      throw ConfigError(where + " table '" + p.table + "' does not exist");
    if (p.family == "annealed" && p.components.empty()) throw ConfigError(where + " annealed needs components");
  };
  check_pot(c.potential, "[potential]");
  for (const auto& k : c.classes) check_pot(k.potential, "[potential " + k.name + "]");
  if (c.sector != "star" && c.sector != "diamond") throw ConfigError("[oracle] sector must be star or diamond");
  if (c.K < 0 || c.M < 0) throw ConfigError("[oracle] K and M must be >= 0 (0 = automatic)");
  if (c.budget == 0) throw ConfigError("[oracle] budget must be positive");
  if (c.chain != "height" && c.chain != "spin") throw ConfigError("[mcmc] chain must be height or spin");
  if (c.sweeps <= c.burn_in) throw ConfigError("[mcmc] sweeps must exceed burn_in");
  if (c.thin == 0 || c.chains == 0) throw ConfigError("[mcmc] thin and chains must be >= 1");
}

/// Parse the INI text; keys that are absent keep their defaults.
inline RunConfig read_config(std::istream& is) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: " + std::string(e.message()) + " at line " + std::to_string(e.line()));
  }
  RunConfig c;
  for (const auto& [section, sec] : tree) {
    if (sec.empty() && !sec.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    if (section == "graph") {
      detail::check_keys(sec, section, {"builder", "size", "ambient", "name", "file"});
      c.builder = detail::text(sec, "builder", c.builder);
      c.size = detail::number<std::size_t>(sec, section, "size", c.size);
      c.ambient = detail::text(sec, "ambient", c.ambient);
      c.name = detail::text(sec, "name", c.name);
      c.file = detail::text(sec, "file", c.file);
    } else if (section == "potential") {
      detail::check_keys(sec, section, {"family", "beta", "components", "table"});
      c.potential = detail::read_potential(sec, section, c.potential);
    } else if (section.rfind("potential ", 0) == 0) {
      detail::check_keys(sec, section, {"family", "beta", "components", "table", "edges"});
      EdgeClass k;
      k.name = section.substr(10);
      k.potential = detail::read_potential(sec, section, PotentialSpec{});
      std::istringstream es(detail::text(sec, "edges", ""));
      std::string tok;
      while (es >> tok) {
        try {
          std::size_t used = 0;
          const long v = std::stol(tok, &used);
          if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
          k.edges.push_back(static_cast<EdgeIndex>(v));
        } catch (const std::exception&) {
          throw ConfigError("[" + section + "] edges: '" + tok + "' is not an edge index");
        }
      }
      c.classes.push_back(std::move(k));
    } else if (section == "oracle") {
      detail::check_keys(sec, section, {"sector", "K", "M", "budget"});
      c.sector = detail::text(sec, "sector", c.sector);
      c.K = detail::number<int>(sec, section, "K", c.K);
      c.M = detail::number<int>(sec, section, "M", c.M);
      c.budget = detail::number<std::size_t>(sec, section, "budget", c.budget);
    } else if (section == "mcmc") {
      detail::check_keys(sec, section, {"chain", "sweeps", "burn_in", "thin", "chains", "seed"});
      c.chain = detail::text(sec, "chain", c.chain);
      c.sweeps = detail::number<std::size_t>(sec, section, "sweeps", c.sweeps);
      c.burn_in = detail::number<std::size_t>(sec, section, "burn_in", c.burn_in);
      c.thin = detail::number<std::size_t>(sec, section, "thin", c.thin);
      c.chains = detail::number<std::size_t>(sec, section, "chains", c.chains);
      c.seed = detail::number<std::uint64_t>(sec, section, "seed", c.seed);
    } else if (section == "output") {
      detail::check_keys(sec, section, {"directory", "header"});
      c.directory = detail::text(sec, "directory", c.directory);
      c.header = detail::flag(sec, section, "header", c.header);
    } else {
      throw ConfigError("config: unknown section [" + section + "]");
    }
  }
  return c;
}

inline RunConfig config_from_text(const std::string& s) {
  std::istringstream is(s);
  return read_config(is);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return read_config(in);
}

inline PotentialPair build_potential(const PotentialSpec& p) {
  if (p.family == "xy") return make_xy(p.beta);
  if (p.family == "ivgff") return make_ivgff(p.beta);
  if (p.family == "lipschitz") return make_lipschitz(p.beta);
  if (p.family == "gaussian") return make_gaussian(p.beta);
  if (p.family == "annealed") return parse_potential("annealed(" + p.components + ")");
  if (p.family == "table") {
    std::ifstream in(p.table);
    if (!in) throw ConfigError("cannot open potential table '" + p.table + "'");
    return read_custom_table(in);
  }
  throw ConfigError("unknown potential family '" + p.family + "'");
}

inline FiniteGraph build_graph(const RunConfig& c) {
  const Ambient amb = c.ambient == "range2" ? Ambient::range2() : Ambient::nearest_neighbor();
  if (c.builder == "path") return build_path(c.size);
  if (c.builder == "cycle") return build_cycle(c.size);
  if (c.builder == "star") return build_star(c.size);
  if (c.builder == "torus") return build_torus(c.size);
  if (c.builder == "theta") return build_theta();
  if (c.builder == "box") return build_box(amb, c.size).graph;
  if (c.builder == "wired_box") return build_wired_box(amb, c.size).graph;
  if (c.builder == "corpus") {
    for (const auto& ng : corpus_graphs())
      if (ng.name == c.name) return ng.graph;
    throw ConfigError("[graph] no corpus graph named '" + c.name + "'");
  }
  std::ifstream in(c.file);
  if (!in) throw ConfigError("cannot open graph file '" + c.file + "'");
  return read_graph(in);
}

/// Graph with the default potential on every edge and class potentials on listed edges.
inline Network build_network(const RunConfig& c) {
  validate(c);
  const FiniteGraph g = build_graph(c);
  Network net;
  net.add_potential(build_potential(c.potential));
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges) e.potential = 0;
  for (const auto& k : c.classes) {
    const PotentialId pid = net.add_potential(build_potential(k.potential));
    for (EdgeIndex e : k.edges) {
      if (e >= edges.size())
        throw ConfigError("[potential " + k.name + "] edge " + std::to_string(e) + " out of range (graph has " +
                          std::to_string(edges.size()) + " edges)");
      edges[e].potential = pid;
    }
  }
  net.graph = FiniteGraph(g.num_vertices(), std::move(edges), g.boundary());
  return net;
}

inline ModelSpec build_spec(const RunConfig& c) {
  ModelSpec m{build_network(c), c.sector == "diamond" ? Sector::diamond : Sector::star};
  m.K = c.K;
  m.M = c.M;
  m.budget = c.budget;
  return m;
}

}  // namespace hdual
