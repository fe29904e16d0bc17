#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sortnet/satgen.hpp"

using namespace sortnet;

namespace {

bool clause_satisfied(const std::vector<int>& clause, unsigned assignment) {
  for (int lit : clause) {
    bool value = (assignment >> (std::abs(lit) - 1)) & 1;
    if ((lit > 0) == value) return true;
  }
  return false;
}

bool all_satisfied(const CnfInstance& inst, unsigned assignment) {
  for (const auto& clause : inst.clauses)
    if (!clause_satisfied(clause, assignment)) return false;
  return true;
}

std::vector<bool> to_model(unsigned assignment, int vars) {
  std::vector<bool> model(static_cast<std::size_t>(vars) + 1, false);
  for (int v = 1; v <= vars; ++v) model[static_cast<std::size_t>(v)] = (assignment >> (v - 1)) & 1;
  return model;
}

// clauses as name-literal sets, independent of variable numbering
std::set<std::vector<std::pair<std::string, bool>>> named_clauses(const CnfInstance& inst) {
  std::set<std::vector<std::pair<std::string, bool>>> out;
  for (const auto& clause : inst.clauses) {
    std::vector<std::pair<std::string, bool>> named;
    for (int lit : clause)
      named.emplace_back(inst.var_names[static_cast<std::size_t>(std::abs(lit) - 1)], lit > 0);
    std::sort(named.begin(), named.end());
    out.insert(std::move(named));
  }
  return out;
}

std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("sortnet_sat_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string test_solver() {
  static std::string cmd = [] {
    try {
      return resolve_solver();
    } catch (const SolverError&) {
      return std::string();
    }
  }();
  return cmd;
}

}  // namespace

TEST_CASE("encode_valid pins slot domains", "[satgen]") {
  CnfInstance none;
  none.channels = 4;
  none.comparators = 0;
  encode_valid(none);
  CHECK(none.clauses.empty());
  CHECK(none.var_count == 0);

  // two channels leave a single legal slot assignment
  CnfInstance two;
  two.channels = 2;
  two.comparators = 1;
  encode_valid(two);
  REQUIRE(two.var_count == 4);
  int models = 0;
  unsigned only = 0;
  for (unsigned a = 0; a < 16u; ++a)
    if (all_satisfied(two, a)) {
      ++models;
      only = a;
    }
  REQUIRE(models == 1);
  CHECK(((only >> (two.lookup(satnames::slot_i(1, 1)) - 1)) & 1) == 1);
  CHECK(((only >> (two.lookup(satnames::slot_j(1, 2)) - 1)) & 1) == 1);
}

TEST_CASE("a single encoded step is exactly the comparator semantics", "[satgen]") {
  CnfInstance inst;
  inst.channels = 3;
  inst.comparators = 1;
  encode_valid(inst);
  std::vector<int> x, y;
  for (int c = 1; c <= 3; ++c) x.push_back(inst.var("in" + std::to_string(c)));
  for (int c = 1; c <= 3; ++c) y.push_back(inst.var("out" + std::to_string(c)));
  encode_comparator_step(inst, 1, x, y);
  REQUIRE(inst.var_count == 12);

  int models = 0;
  for (unsigned a = 0; a < (1u << 12); ++a) {
    if (!all_satisfied(inst, a)) continue;
    ++models;
    std::vector<bool> model = to_model(a, inst.var_count);
    Network net = decode_model(inst, model);
    REQUIRE(net.size() == 1);
    Word in = 0, out = 0;
    for (int c = 1; c <= 3; ++c) {
      if (model[static_cast<std::size_t>(x[c - 1])]) in |= static_cast<Word>(1u << (c - 1));
      if (model[static_cast<std::size_t>(y[c - 1])]) out |= static_cast<Word>(1u << (c - 1));
    }
    CHECK(out == apply_comparator(in, net.comps[0]));
  }
  CHECK(models == 3 * 8);  // every comparator paired with every input, once
}

TEST_CASE("instance sizes stay in a sane range", "[satgen]") {
  // four channels, five slots: a few thousand clauses, not millions
  CnfInstance inst = encode_instance(4, 5, unsorted_inputs(4), Network{}, SatOpt::All);
  CHECK(inst.clauses.size() > 500);
  CHECK(inst.clauses.size() < 20000);
  CHECK(inst.var_count > 100);
  CHECK(inst.var_count < 5000);
}

TEST_CASE("prefix slots decode back to the prefix", "[satgen]") {
  std::string solver = test_solver();
  if (solver.empty()) {
    WARN("no DIMACS solver available, skipping");
    return;
  }
  SatConfig cfg;
  cfg.solver_cmd = solver;
  cfg.timeout_s = 120;
  cfg.workdir = temp_dir("prefix");
  Network prefix = parse_network("(1,2);(3,4)", 4);
  WindowsOutcome out = solve_with_windows(cfg, 4, 5, prefix, {0});
  REQUIRE(out.kind == WindowsOutcome::Kind::Sat);
  REQUIRE(out.network.size() == 5);
  CHECK(out.network.comps[0] == prefix.comps[0]);
  CHECK(out.network.comps[1] == prefix.comps[1]);
  CHECK(is_sorting(out.network));
  std::filesystem::remove_all(cfg.workdir);
}

TEST_CASE("encode_instance validates its arguments", "[satgen]") {
  std::vector<Word> one{1};
  CHECK_THROWS_AS(encode_instance(2, 1, {}, Network{}), std::invalid_argument);
  CHECK_THROWS_AS(encode_instance(2, 0, one, parse_network("(1,2)", 2)), std::invalid_argument);
  Network bad{2, {{2, 1}}};
  CHECK_THROWS_AS(encode_instance(2, 1, one, bad), std::invalid_argument);
  CHECK_THROWS_AS(encode_instance(3, 2, one, parse_network("(1,2)", 2)), std::invalid_argument);
}

TEST_CASE("the unique two-channel instance decodes to (1,2)", "[satgen]") {
  std::vector<Word> inputs{1};  // the only unsorted two-channel value
  CnfInstance inst = encode_instance(2, 1, inputs, Network{}, SatOpt::All);
  int models = 0;
  Network net;
  for (unsigned a = 0; a < (1u << inst.var_count); ++a) {
    if (!all_satisfied(inst, a)) continue;
    ++models;
    net = decode_model(inst, to_model(a, inst.var_count));
  }
  REQUIRE(models == 1);
  CHECK(net == parse_network("(1,2)", 2));
}

TEST_CASE("dimacs output round-trips", "[satgen]") {
  CnfInstance inst = encode_instance(3, 2, unsorted_inputs(3), Network{}, SatOpt::All);
  std::ostringstream text;
  emit_dimacs(inst, text);

  std::istringstream in(text.str());
  std::string word;
  REQUIRE((in >> word && word == "p"));
  REQUIRE((in >> word && word == "cnf"));
  int vars = 0;
  std::size_t clauses = 0;
  in >> vars >> clauses;
  CHECK(vars == inst.var_count);
  CHECK(clauses == inst.clauses.size());
  std::vector<std::vector<int>> parsed;
  std::vector<int> current;
  int lit;
  while (in >> lit) {
    if (lit == 0) {
      parsed.push_back(current);
      current.clear();
    } else {
      current.push_back(lit);
    }
  }
  CHECK(current.empty());
  CHECK(parsed == inst.clauses);

  CnfInstance broken;
  broken.channels = 2;
  broken.clauses.push_back({});
  std::ostringstream sink;
  CHECK_THROWS_AS(emit_dimacs(broken, sink), std::invalid_argument);
}

TEST_CASE("window instances are sub-instances of the full encoding", "[satgen]") {
  const Network prefix = parse_network("(1,2)", 5);
  CnfInstance full = encode_instance(5, 6, instance_inputs(5, 0, SatOpt::All), prefix);
  for (int s : {1, 2, 3}) {
    CnfInstance window = encode_instance(5, 6, instance_inputs(5, s, SatOpt::All), prefix);
    auto big = named_clauses(full);
    auto small = named_clauses(window);
    CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
  }
}

TEST_CASE("solver subprocess handles verdicts, garbage and timeouts", "[satgen]") {
  auto dir = temp_dir("proc");
  std::filesystem::path cnf = dir / "tiny.cnf";
  {
    std::ofstream out(cnf);
    out << "p cnf 1 2\n1 0\n-1 0\n";
  }
  auto script = [&](const std::string& name, const std::string& body) {
    std::filesystem::path path = dir / name;
    std::ofstream out(path);
    out << "#!/bin/sh\n" << body;
    out.close();
    std::filesystem::permissions(path, std::filesystem::perms::owner_all);
    return path.string();
  };

  std::string unsat = script("unsat.sh", "echo 's UNSATISFIABLE'\nexit 20\n");
  CHECK(run_solver(unsat, cnf, 5).kind == SolverResult::Kind::Unsat);

  std::string sat = script("sat.sh", "echo 's SATISFIABLE'\necho 'v 1 -2 0'\nexit 10\n");
  SolverResult res = run_solver(sat, cnf, 5);
  REQUIRE(res.kind == SolverResult::Kind::Sat);
  REQUIRE(res.model.size() == 3);
  CHECK(res.model[1]);
  CHECK_FALSE(res.model[2]);

  std::string garbage = script("garbage.sh", "echo 'no verdict here'\nexit 0\n");
  CHECK_THROWS_AS(run_solver(garbage, cnf, 5), SolverError);
  CHECK_THROWS_AS(run_solver((dir / "missing.sh").string(), cnf, 5), SolverError);

  std::string slow = script("slow.sh", "sleep 30\necho 's UNSATISFIABLE'\n");
  CHECK(run_solver(slow, cnf, 1).kind == SolverResult::Kind::Timeout);
  std::filesystem::remove_all(dir);
}

TEST_CASE("real solver decides the five-channel question", "[satgen][solver]") {
  std::string solver = test_solver();
  if (solver.empty()) {
    WARN("no DIMACS solver available, skipping");
    return;
  }
  SatConfig cfg;
  cfg.solver_cmd = solver;
  cfg.timeout_s = 300;
  cfg.workdir = temp_dir("real5");

  WindowsOutcome sat = solve_with_windows(cfg, 5, 9, Network{}, {0});
  REQUIRE(sat.kind == WindowsOutcome::Kind::Sat);
  CHECK(sat.network.size() == 9);
  CHECK(is_sorting(sat.network));

  WindowsOutcome unsat = solve_with_windows(cfg, 5, 8, Network{}, {0});
  CHECK(unsat.kind == WindowsOutcome::Kind::Unsat);
  CHECK(unsat.unsat_window == 0);
  std::filesystem::remove_all(cfg.workdir);
}

TEST_CASE("each encoding refinement preserves small verdicts", "[satgen][solver]") {
  std::string solver = test_solver();
  if (solver.empty()) {
    WARN("no DIMACS solver available, skipping");
    return;
  }
  SatConfig cfg;
  cfg.solver_cmd = solver;
  cfg.timeout_s = 120;
  cfg.workdir = temp_dir("opts");
  const std::vector<std::pair<int, int>> cases{{3, 2}, {3, 3}, {4, 4}, {4, 5}};
  for (auto [n, k] : cases) {
    WindowsOutcome::Kind expected = WindowsOutcome::Kind::Inconclusive;
    for (SatOpt opts : {SatOpt::None, SatOpt::NoRedundantNeighbors, SatOpt::IndependentAscending,
                        SatOpt::AllAdjacent, SatOpt::UnsortedOnly, SatOpt::All}) {
      cfg.opts = opts;
      WindowsOutcome got = solve_with_windows(cfg, n, k, Network{}, {0},
                                              "o" + std::to_string(static_cast<unsigned>(opts)));
      if (expected == WindowsOutcome::Kind::Inconclusive)
        expected = got.kind;
      else
        CHECK(got.kind == expected);
    }
    const int optimal = n == 3 ? 3 : 5;
    CHECK(expected ==
          (k >= optimal ? WindowsOutcome::Kind::Sat : WindowsOutcome::Kind::Unsat));
  }
  std::filesystem::remove_all(cfg.workdir);
}

TEST_CASE("window ladders certify small unsat cases", "[satgen][solver]") {
  std::string solver = test_solver();
  if (solver.empty()) {
    WARN("no DIMACS solver available, skipping");
    return;
  }
  SatConfig cfg;
  cfg.solver_cmd = solver;
  cfg.timeout_s = 120;
  cfg.workdir = temp_dir("ladder");

  CHECK_THROWS_AS(solve_with_windows(cfg, 4, 4, Network{}, {1, 2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(solve_with_windows(cfg, 4, 4, Network{}, {2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(solve_with_windows(cfg, 4, 4, Network{}, {4, 0}), std::invalid_argument);

  WindowsOutcome out = solve_with_windows(cfg, 4, 4, Network{}, {2, 1, 0});
  CHECK(out.kind == WindowsOutcome::Kind::Unsat);
  CHECK(out.unsat_window >= 0);
  CHECK(out.attempts.size() >= 1);
  std::filesystem::remove_all(cfg.workdir);
}

TEST_CASE("filter sets aggregate element verdicts", "[satgen][solver]") {
  std::string solver = test_solver();
  if (solver.empty()) {
    WARN("no DIMACS solver available, skipping");
    return;
  }
  SatConfig cfg;
  cfg.solver_cmd = solver;
  cfg.timeout_s = 300;
  cfg.workdir = temp_dir("filterset");
  cfg.parallelism = 2;

  std::vector<Network> r42{parse_network("(1,2);(1,3)", 4), parse_network("(1,2);(2,3)", 4),
                           parse_network("(1,2);(3,4)", 4)};

  FilterSetOutcome sat = solve_filter_set(cfg, 4, 5, r42);
  CHECK(sat.aggregate == WindowsOutcome::Kind::Sat);
  CHECK(is_sorting(sat.witness));

  FilterSetOutcome unsat = solve_filter_set(cfg, 4, 4, r42);
  CHECK(unsat.aggregate == WindowsOutcome::Kind::Unsat);
  for (const WindowsOutcome& w : unsat.elements) CHECK(w.kind == WindowsOutcome::Kind::Unsat);
  REQUIRE(std::filesystem::exists(unsat.manifest));
  std::ifstream manifest(unsat.manifest);
  std::string line;
  int rows = 0;
  while (std::getline(manifest, line)) ++rows;
  CHECK(rows == 4);  // header + one row per element

  // a sorting prefix filling every slot is satisfiable outright
  Network full = parse_network("(1,2);(3,4);(1,3);(2,4);(2,3)", 4);
  REQUIRE(is_sorting(full));
  FilterSetOutcome trivial = solve_filter_set(cfg, 4, 5, std::vector<Network>{full});
  CHECK(trivial.aggregate == WindowsOutcome::Kind::Sat);
  std::filesystem::remove_all(cfg.workdir);
}
