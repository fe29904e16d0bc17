#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unordered_map>
#include <vector>

#include "sortnet/core.hpp"
#include "sortnet/pool.hpp"

namespace sortnet {

// Encoding refinements; all enabled by default.
enum class SatOpt : unsigned {
  None = 0,
  NoRedundantNeighbors = 1u << 0,  // forbid an immediately repeated comparator
  IndependentAscending = 1u << 1,  // adjacent independent comparators sorted by min channel
  AllAdjacent = 1u << 2,           // every (i,i+1) must appear somewhere
  UnsortedOnly = 1u << 3,          // drop sorted inputs from the test set
  All = 0xF
};

inline constexpr SatOpt operator|(SatOpt a, SatOpt b) {
  return static_cast<SatOpt>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
inline constexpr bool has_opt(SatOpt set, SatOpt flag) {
  return (static_cast<unsigned>(set) & static_cast<unsigned>(flag)) != 0;
}

/// One CNF for "some k-comparator network on n channels sorts every listed
/// input", with slot positions one-hot encoded. The name map pins a
/// deterministic meaning (and numbering) for every variable.
struct CnfInstance {
  int channels = 0;
  int comparators = 0;
  int window = 0;  // informational: window size the inputs came from (0 = full)
  Network prefix;
  std::vector<Word> inputs;
  int var_count = 0;
  std::vector<std::vector<int>> clauses;
  std::unordered_map<std::string, int> var_of_name;
  std::vector<std::string> var_names;  // index 1..var_count

  int var(const std::string& name) {
    auto [it, inserted] = var_of_name.try_emplace(name, var_count + 1);
    if (inserted) {
      ++var_count;
      var_names.push_back(name);
    }
    return it->second;
  }

  int lookup(const std::string& name) const {
    auto it = var_of_name.find(name);
    if (it == var_of_name.end()) throw std::logic_error("unknown variable " + name);
    return it->second;
  }

  void add_clause(std::vector<int> lits) { clauses.push_back(std::move(lits)); }
};

namespace satnames {
inline std::string slot_i(int t, int i) {
  return "I" + std::to_string(t) + "=" + std::to_string(i);
}
inline std::string slot_j(int t, int j) {
  return "J" + std::to_string(t) + "=" + std::to_string(j);
}
inline std::string value(Word b, int layer, int c) {
  return "x[" + std::to_string(b) + "][" + std::to_string(layer) + "][" + std::to_string(c) + "]";
}
inline std::string adjacent(int t, int i) {
  return "adj[" + std::to_string(t) + "][" + std::to_string(i) + "]";
}
}  // namespace satnames

/// Slot domains: each of I_t, J_t names exactly one channel, and I_t < J_t.
inline void encode_valid(CnfInstance& inst) {
  const int n = inst.channels;
  for (int t = 1; t <= inst.comparators; ++t) {
    for (auto name : {&satnames::slot_i, &satnames::slot_j}) {
      std::vector<int> at_least_one;
      for (int c = 1; c <= n; ++c) at_least_one.push_back(inst.var((*name)(t, c)));
      for (std::size_t a = 0; a < at_least_one.size(); ++a)
        for (std::size_t b = a + 1; b < at_least_one.size(); ++b)
          inst.add_clause({-at_least_one[a], -at_least_one[b]});
      inst.add_clause(std::move(at_least_one));
    }
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= i; ++j)
        inst.add_clause({-inst.lookup(satnames::slot_i(t, i)),
                         -inst.lookup(satnames::slot_j(t, j))});
  }
}

/// One comparator slot between consecutive value layers: when (I_t,J_t)=(i,j),
/// y_i = x_i & x_j and y_j = x_i | x_j; all other channels copy through.
inline void encode_comparator_step(CnfInstance& inst, int t, std::span<const int> x,
                                   std::span<const int> y) {
  const int n = inst.channels;
  for (int i = 1; i <= n; ++i) {
    const int ei = inst.lookup(satnames::slot_i(t, i));
    for (int j = i + 1; j <= n; ++j) {
      const int ej = inst.lookup(satnames::slot_j(t, j));
      const int xi = x[static_cast<std::size_t>(i - 1)], xj = x[static_cast<std::size_t>(j - 1)];
      const int yi = y[static_cast<std::size_t>(i - 1)], yj = y[static_cast<std::size_t>(j - 1)];
      inst.add_clause({-ei, -ej, -yi, xi});
      inst.add_clause({-ei, -ej, -yi, xj});
      inst.add_clause({-ei, -ej, yi, -xi, -xj});
      inst.add_clause({-ei, -ej, yj, -xi});
      inst.add_clause({-ei, -ej, yj, -xj});
      inst.add_clause({-ei, -ej, -yj, xi, xj});
    }
  }
  for (int c = 1; c <= n; ++c) {
    const int ei = inst.lookup(satnames::slot_i(t, c));
    const int ej = inst.lookup(satnames::slot_j(t, c));
    const int xc = x[static_cast<std::size_t>(c - 1)], yc = y[static_cast<std::size_t>(c - 1)];
    inst.add_clause({ei, ej, -xc, yc});
    inst.add_clause({ei, ej, xc, -yc});
  }
}

inline CnfInstance encode_instance(int n, int k, std::span<const Word> inputs,
                                   const Network& prefix, SatOpt opts = SatOpt::All) {
  require_channel_count(n);
  if (k < 0) throw std::invalid_argument("comparator count must be nonnegative");
  if (inputs.empty()) throw std::invalid_argument("instance needs at least one input");
  if (static_cast<int>(prefix.size()) > k)
    throw std::invalid_argument("prefix is longer than the network");
  if (prefix.channels != 0 && prefix.channels != n)
    throw std::invalid_argument("prefix channel count mismatch");
  if (!is_standard(Network{n, prefix.comps}))
    throw std::invalid_argument("prefix must be standard");

  CnfInstance inst;
  inst.channels = n;
  inst.comparators = k;
  inst.prefix = prefix;
  inst.prefix.channels = n;
  inst.inputs.assign(inputs.begin(), inputs.end());

  encode_valid(inst);

  for (std::size_t t = 0; t < prefix.comps.size(); ++t) {
    inst.add_clause({inst.lookup(satnames::slot_i(static_cast<int>(t) + 1, prefix.comps[t].i))});
    inst.add_clause({inst.lookup(satnames::slot_j(static_cast<int>(t) + 1, prefix.comps[t].j))});
  }

  if (has_opt(opts, SatOpt::NoRedundantNeighbors) && k > 1) {
    for (int t = 1; t < k; ++t)
      for (int i = 1; i < n; ++i)
        for (int j = i + 1; j <= n; ++j)
          inst.add_clause({-inst.lookup(satnames::slot_i(t, i)),
                           -inst.lookup(satnames::slot_j(t, j)),
                           -inst.lookup(satnames::slot_i(t + 1, i)),
                           -inst.lookup(satnames::slot_j(t + 1, j))});
  }
  if (has_opt(opts, SatOpt::IndependentAscending) && k > 1) {
    for (int t = 1; t < k; ++t)
      for (int i = 1; i < n; ++i)
        for (int j = i + 1; j <= n; ++j)
          for (int i2 = 1; i2 < i; ++i2)
            for (int j2 = i2 + 1; j2 <= n; ++j2) {
              if (i2 == i || i2 == j || j2 == i || j2 == j) continue;
              inst.add_clause({-inst.lookup(satnames::slot_i(t, i)),
                               -inst.lookup(satnames::slot_j(t, j)),
                               -inst.lookup(satnames::slot_i(t + 1, i2)),
                               -inst.lookup(satnames::slot_j(t + 1, j2))});
            }
  }
  if (has_opt(opts, SatOpt::AllAdjacent) && k > 0) {
    for (int i = 1; i < n; ++i) {
      std::vector<int> some_slot;
      for (int t = 1; t <= k; ++t) {
        const int aux = inst.var(satnames::adjacent(t, i));
        const int ei = inst.lookup(satnames::slot_i(t, i));
        const int ej = inst.lookup(satnames::slot_j(t, i + 1));
        inst.add_clause({-aux, ei});
        inst.add_clause({-aux, ej});
        inst.add_clause({aux, -ei, -ej});
        some_slot.push_back(aux);
      }
      inst.add_clause(std::move(some_slot));
    }
  }

  for (Word b : inst.inputs) {
    if (b >= (1u << n)) throw std::invalid_argument("input value out of range");
    std::vector<std::vector<int>> layer(static_cast<std::size_t>(k) + 1);
    for (int l = 0; l <= k; ++l)
      for (int c = 1; c <= n; ++c)
        layer[static_cast<std::size_t>(l)].push_back(inst.var(satnames::value(b, l, c)));
    const Word target = sorted_value(n, popcount(b));
    for (int c = 1; c <= n; ++c) {
      const int first = layer[0][static_cast<std::size_t>(c - 1)];
      inst.add_clause({bit_at(b, c) ? first : -first});
      const int last = layer[static_cast<std::size_t>(k)][static_cast<std::size_t>(c - 1)];
      inst.add_clause({bit_at(target, c) ? last : -last});
    }
    for (int t = 1; t <= k; ++t)
      encode_comparator_step(inst, t, layer[static_cast<std::size_t>(t - 1)],
                             layer[static_cast<std::size_t>(t)]);
  }
  return inst;
}

inline void emit_dimacs(const CnfInstance& inst, std::ostream& out) {
  out << "p cnf " << inst.var_count << ' ' << inst.clauses.size() << '\n';
  for (const std::vector<int>& clause : inst.clauses) {
    if (clause.empty()) throw std::invalid_argument("refusing to emit an empty clause");
    for (int lit : clause) {
      if (lit == 0 || std::abs(lit) > inst.var_count)
        throw std::invalid_argument("clause literal out of range");
      out << lit << ' ';
    }
    out << "0\n";
  }
}

inline void emit_dimacs(const CnfInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  emit_dimacs(inst, out);
  if (!out.flush()) throw std::runtime_error("failed writing " + path.string());
}

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pick a DIMACS solver: an explicit command wins, then $SORTNET_SOLVER, then
/// the first of a few well-known executables on PATH.
inline std::string resolve_solver(const std::string& preferred = "") {
  if (!preferred.empty()) return preferred;
  if (const char* env = std::getenv("SORTNET_SOLVER"); env && *env) return env;
  for (const char* name :
       {"cadical-dimacs", "kissat", "cadical", "cryptominisat5", "glucose", "varisat"}) {
    std::string probe = std::string("command -v ") + name + " >/dev/null 2>&1";
    if (std::system(probe.c_str()) == 0) return name;
  }
  throw SolverError("no SAT solver found: pass --solver or set SORTNET_SOLVER");
}

struct SolverResult {
  enum class Kind { Sat, Unsat, Timeout } kind = Kind::Timeout;
  std::vector<bool> model;  // indexed by variable, [0] unused
};

/// Run `<solver_cmd> <cnf>` under a wall-clock limit and parse the standard
/// s/v output protocol. TIMEOUT is a non-verdict; anything else unparseable
/// is an error.
inline SolverResult run_solver(const std::string& solver_cmd, const std::filesystem::path& cnf,
                               int timeout_s) {
  if (solver_cmd.empty()) throw SolverError("no solver configured");
  std::string cmd = "timeout " + std::to_string(timeout_s) + "s " + solver_cmd + " '" +
                    cnf.string() + "' 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw SolverError("cannot launch solver: " + cmd);
  std::string output;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
  const int status = pclose(pipe);
  const int exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;

  std::optional<bool> sat;
  std::vector<int> literals;
  std::istringstream lines(output);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("s ", 0) == 0) {
      if (line.find("UNSATISFIABLE") != std::string::npos)
        sat = false;
      else if (line.find("SATISFIABLE") != std::string::npos)
        sat = true;
    } else if (line.rfind("v ", 0) == 0) {
      std::istringstream toks(line.substr(2));
      int lit;
      while (toks >> lit)
        if (lit != 0) literals.push_back(lit);
    }
  }
  if (!sat) {
    if (exit_code == 124 || exit_code == 137) return {SolverResult::Kind::Timeout, {}};
    throw SolverError("solver produced no verdict (exit " + std::to_string(exit_code) +
                      "): " + cmd);
  }
  SolverResult result;
  if (*sat) {
    result.kind = SolverResult::Kind::Sat;
    int max_var = 0;
    for (int lit : literals) max_var = std::max(max_var, std::abs(lit));
    result.model.assign(static_cast<std::size_t>(max_var) + 1, false);
    for (int lit : literals)
      if (lit > 0) result.model[static_cast<std::size_t>(lit)] = true;
  } else {
    result.kind = SolverResult::Kind::Unsat;
  }
  return result;
}

/// Read the one-hot slot variables of a model back into a network.
inline Network decode_model(const CnfInstance& inst, const std::vector<bool>& model) {
  auto value_of = [&](const std::string& name) {
    const int v = inst.lookup(name);
    return v < static_cast<int>(model.size()) && model[static_cast<std::size_t>(v)];
  };
  Network net{inst.channels, {}};
  for (int t = 1; t <= inst.comparators; ++t) {
    int i = 0, j = 0;
    for (int c = 1; c <= inst.channels; ++c) {
      if (value_of(satnames::slot_i(t, c))) {
        if (i) throw SolverError("model sets two channels for one slot");
        i = c;
      }
      if (value_of(satnames::slot_j(t, c))) {
        if (j) throw SolverError("model sets two channels for one slot");
        j = c;
      }
    }
    if (!i || !j || i >= j) throw SolverError("model leaves a slot without a valid comparator");
    net.comps.push_back({i, j});
  }
  return net;
}

struct SatConfig {
  std::string solver_cmd;
  int timeout_s = 3600;
  std::filesystem::path workdir = "out";
  int parallelism = 1;
  SatOpt opts = SatOpt::All;
};

inline std::vector<int> default_ladder(int n) {
  if (n < 8) return {0};
  if (n == 8) return {3, 2, 1, 0};
  return {4, 3, 2, 1, 0};
}

struct WindowAttempt {
  int window = 0;
  SolverResult::Kind kind = SolverResult::Kind::Timeout;
  std::filesystem::path cnf;
  double seconds = 0;
};

struct WindowsOutcome {
  enum class Kind { Unsat, Sat, Inconclusive } kind = Kind::Inconclusive;
  int unsat_window = -1;  // window that certified unsatisfiability
  Network network;        // decoded sorting network when kind == Sat
  std::vector<WindowAttempt> attempts;
};

inline std::vector<Word> instance_inputs(int n, int window, SatOpt opts) {
  if (window > 0) return window_inputs(n, window);
  if (has_opt(opts, SatOpt::UnsortedOnly)) return unsorted_inputs(n);
  std::vector<Word> all;
  for (unsigned v = 0; v < (1u << n); ++v) all.push_back(static_cast<Word>(v));
  return all;
}

/// Work down a ladder of window sizes. Unsatisfiable on any window settles the
/// full question; satisfiable runs move to the next (larger) input set until
/// the full set decides it.
inline WindowsOutcome solve_with_windows(const SatConfig& cfg, int n, int k,
                                         const Network& prefix, std::vector<int> ladder,
                                         const std::string& tag = "") {
  if (ladder.empty()) ladder = default_ladder(n);
  for (std::size_t s = 1; s < ladder.size(); ++s)
    if (ladder[s] >= ladder[s - 1])
      throw std::invalid_argument("window ladder must be strictly decreasing");
  if (ladder.back() != 0) throw std::invalid_argument("window ladder must end at 0");
  if (ladder.front() >= n) throw std::invalid_argument("window size must be below n");

  std::filesystem::create_directories(cfg.workdir);
  WindowsOutcome outcome;
  for (int s : ladder) {
    std::vector<Word> inputs = instance_inputs(n, s, cfg.opts);
    CnfInstance inst = encode_instance(n, k, inputs, prefix, cfg.opts);
    inst.window = s;
    std::filesystem::path cnf =
        cfg.workdir / ("sn_n" + std::to_string(n) + "_k" + std::to_string(k) +
                       (tag.empty() ? "" : "_" + tag) + "_s" + std::to_string(s) + ".cnf");
    emit_dimacs(inst, cnf);
    const auto t0 = std::chrono::steady_clock::now();
    SolverResult res = run_solver(cfg.solver_cmd, cnf, cfg.timeout_s);
    WindowAttempt attempt{s, res.kind, cnf,
                          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                              .count()};
    outcome.attempts.push_back(attempt);
    if (res.kind == SolverResult::Kind::Timeout) {
      outcome.kind = WindowsOutcome::Kind::Inconclusive;
      return outcome;
    }
    if (res.kind == SolverResult::Kind::Unsat) {
      outcome.kind = WindowsOutcome::Kind::Unsat;
      outcome.unsat_window = s;
      return outcome;
    }
    if (s == 0) {
      Network net = decode_model(inst, res.model);
      if (!is_sorting(net))
        throw SolverError("model decodes to a non-sorting network: " + format_network(net));
      outcome.kind = WindowsOutcome::Kind::Sat;
      outcome.network = std::move(net);
      return outcome;
    }
    // satisfiable on a strict window: certifies nothing, try the next one
  }
  return outcome;
}

struct FilterSetOutcome {
  WindowsOutcome::Kind aggregate = WindowsOutcome::Kind::Inconclusive;
  std::vector<WindowsOutcome> elements;
  Network witness;  // first decoded sorting network, when any element is Sat
  std::filesystem::path manifest;
};

/// Solve one instance per prefix in the set; the set answers "satisfiable"
/// exactly when some element does. Elements run on a bounded pool and are
/// reported in input order.
inline FilterSetOutcome solve_filter_set(const SatConfig& cfg, int n, int k,
                                         std::span<const Network> prefixes,
                                         std::vector<int> ladder = {}) {
  if (prefixes.empty()) throw std::invalid_argument("filter set is empty");
  FilterSetOutcome out;
  out.elements.resize(prefixes.size());
  WorkerPool pool(cfg.parallelism);
  std::vector<std::function<void()>> tasks;
  for (std::size_t e = 0; e < prefixes.size(); ++e)
    tasks.push_back([&, e] {
      out.elements[e] =
          solve_with_windows(cfg, n, k, prefixes[e], ladder, "e" + std::to_string(e));
    });
  pool.run(std::move(tasks));

  bool any_inconclusive = false;
  out.aggregate = WindowsOutcome::Kind::Unsat;
  for (std::size_t e = 0; e < out.elements.size(); ++e) {
    const WindowsOutcome& w = out.elements[e];
    if (w.kind == WindowsOutcome::Kind::Sat) {
      out.aggregate = WindowsOutcome::Kind::Sat;
      out.witness = w.network;
      break;
    }
    if (w.kind == WindowsOutcome::Kind::Inconclusive) any_inconclusive = true;
  }
  if (out.aggregate != WindowsOutcome::Kind::Sat && any_inconclusive)
    out.aggregate = WindowsOutcome::Kind::Inconclusive;

  out.manifest = cfg.workdir / ("manifest_n" + std::to_string(n) + "_k" + std::to_string(k) +
                                ".csv");
  std::ofstream csv(out.manifest);
  csv << "index,prefix,verdict,window,cnf,seconds\n";
  for (std::size_t e = 0; e < out.elements.size(); ++e) {
    const WindowsOutcome& w = out.elements[e];
    const char* verdict = w.kind == WindowsOutcome::Kind::Sat     ? "SAT"
                          : w.kind == WindowsOutcome::Kind::Unsat ? "UNSAT"
                                                                  : "INCONCLUSIVE";
    const WindowAttempt* last = w.attempts.empty() ? nullptr : &w.attempts.back();
    csv << e << ',' << format_network(prefixes[e]) << ',' << verdict << ','
        << (last ? last->window : -1) << ',' << (last ? last->cnf.string() : "") << ','
        << (last ? last->seconds : 0.0) << '\n';
  }
  return out;
}

}  // namespace sortnet
