// Command-line front end: search for minimal sorting networks, drive the SAT
// route through an external solver, verify kill logs, and print size bounds.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <sstream>

#include "sortnet/bounds.hpp"
#include "sortnet/engine.hpp"
#include "sortnet/satgen.hpp"
#include "sortnet/verifier.hpp"

namespace {

std::vector<int> parse_ladder(const std::string& text) {
  std::vector<int> ladder;
  std::stringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) ladder.push_back(std::stoi(tok));
  return ladder;
}

sortnet::SatOpt parse_opts(const std::string& text) {
  using sortnet::SatOpt;
  SatOpt opts = SatOpt::None;
  std::stringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok == "all")
      opts = opts | SatOpt::All;
    else if (tok == "none")
      ;
    else if (tok == "no-redundant-neighbors")
      opts = opts | SatOpt::NoRedundantNeighbors;
    else if (tok == "ascending")
      opts = opts | SatOpt::IndependentAscending;
    else if (tok == "all-adjacent")
      opts = opts | SatOpt::AllAdjacent;
    else if (tok == "unsorted-only")
      opts = opts | SatOpt::UnsortedOnly;
    else
      throw CLI::ValidationError("--opts", "unknown option '" + tok + "'");
  }
  return opts;
}

std::map<int, int> parse_anchors(const std::vector<std::string>& specs) {
  std::map<int, int> anchors;
  for (const std::string& entry : specs) {
    auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--anchor", "expected n=size, got '" + entry + "'");
    anchors[std::stoi(entry.substr(0, eq))] = std::stoi(entry.substr(eq + 1));
  }
  return anchors;
}

std::map<int, std::size_t> load_expected_sizes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open expected-size file " + path);
  std::map<int, std::size_t> expected;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("level_", 0) != 0) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    expected[std::stoi(line.substr(6, eq - 6))] = std::stoul(line.substr(eq + 1));
  }
  return expected;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimal-size sorting network toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file mirroring the flags; flags win");

  int n = 0, k = 0, workers = 1, multiplier = 1, timeout_s = 3600;
  std::string checkpoint_dir = "out", log_path, prefixes_path, ladder_text, solver_cmd,
              opts_text = "all", expected_path, report_path;
  bool resume = false;

  auto* gp = app.add_subcommand("gp", "generate-and-prune search for S(n)");
  gp->configurable()->fallthrough();
  gp->add_option("-n", n, "channel count")->required();
  gp->add_option("-k", k, "stop after this many comparators (0: run to the optimum)");
  gp->add_option("-p", workers, "worker threads");
  gp->add_option("-m", multiplier, "chunk multiplier for two-phase pruning");
  gp->add_option("--checkpoint-dir", checkpoint_dir, "directory for R_n_k.txt files");
  gp->add_option("--log", log_path, "kill log path (default <dir>/killed_<n>.log)");
  gp->add_option("--report", report_path, "also write the run report here");
  gp->add_flag("--resume", resume, "continue from the last completed level");

  auto* sat = app.add_subcommand("sat", "decide (n,k) sortability through a SAT solver");
  sat->configurable()->fallthrough();
  sat->add_option("-n", n, "channel count")->required();
  sat->add_option("-k", k, "comparator budget")->required();
  sat->add_option("--prefixes", prefixes_path, "checkpoint file of prefixes to extend");
  sat->add_option("--ladder", ladder_text, "window sizes, e.g. 3,2,1,0");
  sat->add_option("--solver", solver_cmd, "DIMACS solver command");
  sat->add_option("--timeout", timeout_s, "per-instance solver timeout (seconds)");
  sat->add_option("--opts", opts_text, "encoding refinements (comma list or all/none)");
  sat->add_option("-p", workers, "parallel solver processes");
  sat->add_option("--checkpoint-dir", checkpoint_dir, "work directory for CNF files");

  auto* verify = app.add_subcommand("verify", "replay a kill log independently");
  verify->configurable()->fallthrough();
  verify->add_option("-n", n, "channel count")->required();
  verify->add_option("--log", log_path, "kill log to verify")->required();
  verify->add_option("-k", k, "levels to replay (0: everything in the log)");
  verify->add_option("--expected", expected_path, "report file with level_<k>= lines to match");

  auto* bounds = app.add_subcommand("bounds", "print size bounds per channel count");
  bounds->configurable()->fallthrough();
  int n_max = 16;
  std::vector<std::string> anchor_specs;
  bounds->add_option("--nmax", n_max, "largest channel count to print");
  bounds->add_option("--anchor", anchor_specs, "exact size n=S (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gp->parsed()) {
      sortnet::EngineConfig cfg;
      cfg.channels = n;
      cfg.k_max = k;
      cfg.workers = workers;
      cfg.split_multiplier = multiplier;
      cfg.checkpoint_dir = checkpoint_dir;
      if (!log_path.empty()) cfg.log_path = log_path;
      cfg.resume = resume;
      sortnet::RunReport report = sortnet::run(cfg);
      std::string text = report.to_text();
      std::cout << text;
      std::filesystem::path out =
          report_path.empty() ? cfg.checkpoint_dir / ("report_" + std::to_string(n) + ".txt")
                              : std::filesystem::path(report_path);
      std::ofstream file(out);
      file << text;
      return report.optimal_size >= 0 || k > 0 ? 0 : 1;
    }

    if (sat->parsed()) {
      sortnet::SatConfig cfg;
      cfg.solver_cmd = sortnet::resolve_solver(solver_cmd);
      cfg.timeout_s = timeout_s;
      cfg.workdir = checkpoint_dir;
      cfg.parallelism = workers;
      cfg.opts = parse_opts(opts_text);
      std::vector<int> ladder =
          ladder_text.empty() ? sortnet::default_ladder(n) : parse_ladder(ladder_text);

      std::vector<sortnet::Network> prefixes;
      if (prefixes_path.empty())
        prefixes.push_back(sortnet::Network{n, {}});
      else
        prefixes = sortnet::load_network_lines(prefixes_path, n);

      sortnet::FilterSetOutcome out = sortnet::solve_filter_set(cfg, n, k, prefixes, ladder);
      for (std::size_t e = 0; e < out.elements.size(); ++e) {
        const auto& w = out.elements[e];
        std::cout << "element_" << e << "="
                  << (w.kind == sortnet::WindowsOutcome::Kind::Sat     ? "SAT"
                      : w.kind == sortnet::WindowsOutcome::Kind::Unsat ? "UNSAT"
                                                                       : "INCONCLUSIVE");
        if (w.kind == sortnet::WindowsOutcome::Kind::Unsat)
          std::cout << " window=" << w.unsat_window;
        std::cout << '\n';
      }
      std::cout << "manifest=" << out.manifest.string() << '\n';
      switch (out.aggregate) {
        case sortnet::WindowsOutcome::Kind::Sat:
          std::cout << "verdict=SAT\n";
          std::cout << "network=" << sortnet::format_network(out.witness) << '\n';
          return 0;
        case sortnet::WindowsOutcome::Kind::Unsat:
          std::cout << "verdict=UNSAT\n";
          return 0;
        case sortnet::WindowsOutcome::Kind::Inconclusive:
          std::cout << "verdict=INCONCLUSIVE\n";
          return 2;
      }
    }

    if (verify->parsed()) {
      auto entries = sortnet::verifier::parse_log_file(log_path, n);
      int k_max = k;
      if (k_max == 0)
        for (const auto& e : entries) k_max = std::max(k_max, e.level());
      std::map<int, std::size_t> expected;
      const std::map<int, std::size_t>* expected_ptr = nullptr;
      if (!expected_path.empty()) {
        expected = load_expected_sizes(expected_path);
        expected_ptr = &expected;
      }
      try {
        sortnet::verifier::ReplayReport rep =
            sortnet::verifier::replay(n, k_max, entries, expected_ptr);
        std::cout << rep.summary;
        return 0;
      } catch (const sortnet::verifier::VerifyError& err) {
        std::cout << "result=REJECTED\n";
        std::cout << "reason=" << err.what();
        if (err.line) std::cout << " (line " << err.line << ")";
        if (err.level >= 0) std::cout << " (level " << err.level << ")";
        std::cout << '\n';
        return 1;
      }
    }

    if (bounds->parsed()) {
      std::map<int, int> anchors = parse_anchors(anchor_specs);
      if (anchors.empty())
        anchors = {{1, 0}, {2, 1}, {3, 3}, {4, 5}, {5, 9}, {6, 12}, {7, 16}, {8, 19}, {9, 25}};
      auto rows = sortnet::derive_lower_bounds(anchors, n_max);
      std::cout << "n lower upper\n";
      for (const auto& row : rows) {
        std::cout << row.n << ' ';
        if (row.lower >= 0)
          std::cout << row.lower;
        else
          std::cout << '-';
        std::cout << ' ';
        if (row.upper >= 0)
          std::cout << row.upper;
        else
          std::cout << '-';
        std::cout << '\n';
      }
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
