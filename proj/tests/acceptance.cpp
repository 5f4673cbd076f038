// Acceptance run: one PASS/FAIL line per criterion on stdout, details on stderr.

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hdual/suite.hpp"

using namespace hdual;

namespace {

struct Criterion {
  int id;
  std::string title;
  double max_seconds;  // 0: no runtime limit
  std::function<std::vector<SuiteResult>(const SuiteOptions&)> run;
};

void show_failures(const SuiteResult& r, std::size_t limit = 12) {
  std::size_t shown = 0;
  for (const auto& rep : r.reports) {
    if (rep.pass) continue;
    if (shown++ == limit) {
      std::cerr << "    ... " << r.failures() - limit << " more\n";
      break;
    }
    std::cerr << "    " << rep.identity << ' ' << rep.instance << " lhs " << rep.lhs << " rhs " << rep.rhs
              << " residual " << rep.residual << " tolerance " << rep.tolerance << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  bool quiet = false;
  app.add_option("--only", only, "run these criteria only")->check(CLI::Range(1, 9));
  app.add_flag("--quiet", quiet, "no progress messages");
  CLI11_PARSE(app, argc, argv);

  SuiteOptions o;
  if (!quiet) o.progress = [](const std::string& s) { std::cerr << "  " << s << std::endl; };

  const std::vector<Criterion> criteria{
      {1, "duality suite", 120.0, [](const SuiteOptions& o) { return std::vector{duality_suite(o)}; }},
      {2, "covariance duality", 0.0, [](const SuiteOptions& o) { return std::vector{covariance_suite(o)}; }},
      {3, "GFF bound", 0.0, [](const SuiteOptions& o) { return std::vector{gff_suite(o)}; }},
      {4, "monotonicity and transforms", 0.0,
       [](const SuiteOptions& o) { return std::vector{monotonicity_suite(o), transform_suite(o)}; }},
      {5, "Ginibre core and reflection positivity", 0.0,
       [](const SuiteOptions& o) { return std::vector{ginibre_suite(o), reflection_suite(o)}; }},
      {6, "potential bridge", 0.0, [](const SuiteOptions& o) { return std::vector{bridge_suite(o)}; }},
      {7, "projection", 0.0, [](const SuiteOptions& o) { return std::vector{projection_suite(o)}; }},
      {8, "MCMC against the oracle", 600.0, [](const SuiteOptions& o) { return std::vector{mcmc_suite(o)}; }},
      {9, "torus experiments", 1800.0, [](const SuiteOptions& o) { return std::vector{torus_suite(o)}; }},
  };

  const std::set<int> selected(only.begin(), only.end());
  bool all = true;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto results = c.run(o);
    std::size_t reports = 0, failed = 0;
    double seconds = 0.0;
    bool pass = true;
    for (const auto& r : results) {
      reports += r.reports.size();
      failed += r.failures();
      seconds += r.seconds;
      pass = pass && r.pass();
      for (const auto& n : r.notes) std::cerr << "  " << r.name << ": " << n << '\n';
      show_failures(r);
    }
    const bool in_time = c.max_seconds == 0.0 || seconds <= c.max_seconds;
    pass = pass && in_time;
    all = all && pass;
    std::ostringstream line;
    line.precision(1);
    line << std::fixed << "criterion " << c.id << ' ' << (pass ? "PASS" : "FAIL") << "  " << c.title << ": "
         << reports << " checks, " << failed << " failed, " << seconds << " s";
    if (c.max_seconds > 0.0) line << " (limit " << c.max_seconds << " s)";
    std::cout << line.str() << std::endl;
  }
  return all ? 0 : 1;
}
