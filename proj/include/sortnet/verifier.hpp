#pragma once

// Independent replay of a generate-and-prune kill log. This module shares the
// network text form with the rest of the library but none of the search code:
// outputs, redundancy, sortedness and permutation application are reimplemented
// here from first principles, and the only permutations it ever applies are the
// logged ones.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sortnet/netform.hpp"

namespace sortnet::verifier {

struct VerifyError : std::runtime_error {
  std::size_t line;  // 1-based log line, 0 when not tied to a line
  int level;         // comparator count, -1 when not tied to a level

  VerifyError(const std::string& msg, std::size_t line_ = 0, int level_ = -1)
      : std::runtime_error(msg), line(line_), level(level_) {}
};

struct LogEntry {
  Network killed;
  Network killer;
  std::vector<int> pi;  // pi[c-1] = image of channel c
  std::size_t line = 0;

  int level() const { return static_cast<int>(killed.comps.size()); }
};

namespace detail {

// value propagation over explicit bit arrays, packed LSB-first at the end
inline unsigned propagate(const Network& net, unsigned input) {
  int bits[kMaxChannels];
  for (int c = 0; c < net.channels; ++c) bits[c] = (input >> c) & 1;
  for (const Comparator& comp : net.comps) {
    int& a = bits[comp.i - 1];
    int& b = bits[comp.j - 1];
    if (a > b) {
      a = 0;
      b = 1;
    }
  }
  unsigned out = 0;
  for (int c = 0; c < net.channels; ++c)
    if (bits[c]) out |= 1u << c;
  return out;
}

inline std::vector<unsigned> outputs_of(const Network& net) {
  std::set<unsigned> seen;
  for (unsigned v = 0; v < (1u << net.channels); ++v) seen.insert(propagate(net, v));
  return {seen.begin(), seen.end()};
}

inline unsigned relabel(const std::vector<int>& pi, unsigned value) {
  unsigned out = 0;
  for (std::size_t c = 0; c < pi.size(); ++c)
    if (value & (1u << c)) out |= 1u << (pi[c] - 1);
  return out;
}

inline bool channels_sorted(unsigned value, int n) {
  for (int c = 1; c < n; ++c)
    if (((value >> (c - 1)) & 1) > ((value >> c) & 1)) return false;
  return true;
}

inline bool sorts_all_inputs(const Network& net) {
  for (unsigned v : outputs_of(net))
    if (!channels_sorted(v, net.channels)) return false;
  return true;
}

/// A comparator (i,j) adds nothing when x_i <= x_j on every listed output.
inline bool redundant(const std::vector<unsigned>& outputs, int i, int j) {
  for (unsigned v : outputs)
    if (((v >> (i - 1)) & 1) && !((v >> (j - 1)) & 1)) return false;
  return true;
}

}  // namespace detail

/// Strict parse of lines of the form killed(<net>,<net>,[p1,...,pn]).
/// Permutations must name every channel exactly once.
inline std::vector<LogEntry> parse_log(std::istream& in, int channels) {
  require_channel_count(channels);
  std::vector<LogEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string head = "killed(";
    if (line.rfind(head, 0) != 0 || line.back() != ')')
      throw VerifyError("malformed log line", line_no);
    std::string body = line.substr(head.size(), line.size() - head.size() - 1);

    // split at the two top-level commas: networks contain commas inside parens
    std::vector<std::string> fields;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t p = 0; p < body.size(); ++p) {
      char ch = body[p];
      if (ch == '(' || ch == '[') ++depth;
      if (ch == ')' || ch == ']') --depth;
      if (ch == ',' && depth == 0) {
        fields.push_back(body.substr(start, p - start));
        start = p + 1;
      }
    }
    fields.push_back(body.substr(start));
    if (fields.size() != 3) throw VerifyError("expected three fields", line_no);
    if (fields[2].size() < 2 || fields[2].front() != '[' || fields[2].back() != ']')
      throw VerifyError("malformed permutation", line_no);

    LogEntry e;
    e.line = line_no;
    try {
      e.killed = parse_network(fields[0], channels);
      e.killer = parse_network(fields[1], channels);
    } catch (const std::invalid_argument& err) {
      throw VerifyError(std::string("bad network: ") + err.what(), line_no);
    }
    std::stringstream perm(fields[2].substr(1, fields[2].size() - 2));
    std::string tok;
    while (std::getline(perm, tok, ',')) {
      if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw VerifyError("malformed permutation", line_no);
      e.pi.push_back(std::stoi(tok));
    }
    if (static_cast<int>(e.pi.size()) != channels)
      throw VerifyError("permutation arity does not match channel count", line_no);
    unsigned seen = 0;
    for (int v : e.pi) {
      if (v < 1 || v > channels || (seen & (1u << (v - 1))))
        throw VerifyError("permutation is not a bijection", line_no);
      seen |= 1u << (v - 1);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

inline std::vector<LogEntry> parse_log_file(const std::filesystem::path& path, int channels) {
  std::ifstream in(path);
  if (!in) throw VerifyError("cannot open log " + path.string());
  return parse_log(in, channels);
}

/// Recompute both output sets from scratch and test the mapped-subset claim.
inline bool check_witness(const LogEntry& e) {
  std::vector<unsigned> killer_outs = detail::outputs_of(e.killer);
  std::vector<unsigned> killed_outs = detail::outputs_of(e.killed);
  for (unsigned v : killer_outs)
    if (!std::binary_search(killed_outs.begin(), killed_outs.end(), detail::relabel(e.pi, v)))
      return false;
  return true;
}

/// True when the kill graph restricted to killed killers has no cycle, i.e.
/// no group of networks eliminates itself with nothing alive to blame.
inline bool check_acyclic(std::span<const LogEntry> level_entries) {
  std::unordered_map<std::string, std::size_t> killed_index;
  for (std::size_t idx = 0; idx < level_entries.size(); ++idx)
    killed_index.emplace(format_network(level_entries[idx].killed), idx);

  std::vector<int> state(level_entries.size(), 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::size_t> stack;
  for (std::size_t root = 0; root < level_entries.size(); ++root) {
    if (state[root]) continue;
    stack.push_back(root);
    while (!stack.empty()) {
      std::size_t at = stack.back();
      if (state[at] == 0) {
        state[at] = 1;
        auto it = killed_index.find(format_network(level_entries[at].killer));
        if (it != killed_index.end()) {
          if (state[it->second] == 1) return false;  // killer transitively kills itself
          if (state[it->second] == 0) {
            stack.push_back(it->second);
            continue;
          }
        }
      }
      state[at] = 2;
      stack.pop_back();
    }
  }
  return true;
}

struct ReplayReport {
  int channels = 0;
  std::vector<std::size_t> level_sizes;  // level_sizes[k] = survivors of size k
  int sorting_level = -1;                // level of the singleton sorting network
  Network sorting_network;
  std::string summary;
};

/// Rebuild every level from the naive redundancy-free extension and the log
/// alone: each logged kill must name a network present at its level, carry a
/// valid witness, and the per-level kill graph must be acyclic. Survivor
/// counts are compared against expected sizes when given.
inline ReplayReport replay(int channels, int k_max, std::span<const LogEntry> entries,
                           const std::map<int, std::size_t>* expected_sizes = nullptr) {
  require_channel_count(channels);
  std::map<int, std::vector<const LogEntry*>> by_level;
  for (const LogEntry& e : entries) {
    if (e.level() < 1 || e.level() > k_max)
      throw VerifyError("log entry outside replayed levels", e.line, e.level());
    if (e.killer.size() != e.killed.size())
      throw VerifyError("killer and killed sizes differ", e.line, e.level());
    by_level[e.level()].push_back(&e);
  }

  ReplayReport report;
  report.channels = channels;
  std::vector<Network> survivors{Network{channels, {}}};
  report.level_sizes.push_back(1);

  if (detail::sorts_all_inputs(survivors.front())) {
    if (!entries.empty()) throw VerifyError("log continues past the terminal level", 0, 0);
    report.sorting_level = 0;
    report.sorting_network = survivors.front();
  }

  for (int k = 1; k <= k_max && report.sorting_level < 0; ++k) {
    // naive extension, re-deriving the redundancy rule
    std::vector<Network> extension;
    std::unordered_map<std::string, std::size_t> index;
    for (const Network& net : survivors) {
      std::vector<unsigned> outs = detail::outputs_of(net);
      for (int i = 1; i < channels; ++i)
        for (int j = i + 1; j <= channels; ++j) {
          if (detail::redundant(outs, i, j)) continue;
          Network ext = net;
          ext.comps.push_back({i, j});
          index.emplace(format_network(ext), extension.size());
          extension.push_back(std::move(ext));
        }
    }

    std::vector<const LogEntry*> kills;
    if (auto it = by_level.find(k); it != by_level.end()) kills = it->second;
    {
      std::vector<LogEntry> level_entries;
      level_entries.reserve(kills.size());
      for (const LogEntry* e : kills) level_entries.push_back(*e);
      if (!check_acyclic(level_entries))
        throw VerifyError("kill graph has a cycle", 0, k);
    }

    std::vector<bool> alive(extension.size(), true);
    for (const LogEntry* e : kills) {
      auto killed_it = index.find(format_network(e->killed));
      if (killed_it == index.end())
        throw VerifyError("killed network not present at its level", e->line, k);
      if (index.find(format_network(e->killer)) == index.end())
        throw VerifyError("killer not present at its level", e->line, k);
      if (!alive[killed_it->second])
        throw VerifyError("network killed twice", e->line, k);
      if (!check_witness(*e)) throw VerifyError("witness check failed", e->line, k);
      alive[killed_it->second] = false;
    }

    survivors.clear();
    for (std::size_t idx = 0; idx < extension.size(); ++idx)
      if (alive[idx]) survivors.push_back(std::move(extension[idx]));
    report.level_sizes.push_back(survivors.size());

    if (expected_sizes) {
      auto want = expected_sizes->find(k);
      if (want != expected_sizes->end() && want->second != survivors.size())
        throw VerifyError("survivor count mismatch: got " + std::to_string(survivors.size()) +
                              ", expected " + std::to_string(want->second),
                          0, k);
    }

    int sorting = 0;
    for (const Network& net : survivors)
      if (detail::sorts_all_inputs(net)) ++sorting;
    if (sorting > 0) {
      if (survivors.size() != 1)
        throw VerifyError("sorting network among non-singleton survivors", 0, k);
      if (by_level.upper_bound(k) != by_level.end())
        throw VerifyError("log continues past the terminal level", 0, k);
      report.sorting_level = k;
      report.sorting_network = survivors.front();
      break;
    }
  }

  std::ostringstream out;
  out << "n=" << channels << '\n';
  for (std::size_t k = 0; k < report.level_sizes.size(); ++k)
    out << "level_" << k << "=" << report.level_sizes[k] << '\n';
  if (report.sorting_level >= 0) {
    out << "claim=no sorting network on " << channels << " channels has fewer than "
        << report.sorting_level << " comparators\n";
    out << "optimal_size=" << report.sorting_level << '\n';
    out << "optimal_network=" << format_network(report.sorting_network) << '\n';
  } else {
    out << "claim=no sorting network on " << channels << " channels has at most "
        << (report.level_sizes.size() - 1) << " comparators\n";
  }
  out << "result=VERIFIED\n";
  report.summary = out.str();
  return report;
}

}  // namespace sortnet::verifier
