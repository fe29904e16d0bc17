#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sortnet/core.hpp"
#include "sortnet/pool.hpp"
#include "sortnet/subsumption.hpp"

namespace sortnet {

/// All candidate networks of one size, with their cached outputs.
struct LevelSet {
  int channels = 0;
  int level = 0;  // comparator count of every record
  std::vector<NetworkRecord> records;

  std::size_t size() const { return records.size(); }
};

/// One pruning fact: killer subsumes killed under pi, i.e.
/// pi(outputs(killer)) is a subset of outputs(killed).
struct SubsumptionLogEntry {
  Network killed;
  Network killer;
  Permutation pi;

  int level() const { return static_cast<int>(killed.comps.size()); }
};

/// killed(<killed>,<killer>,[p1,...,pn]) with the permutation written in full.
inline std::string format_log_entry(const SubsumptionLogEntry& e) {
  std::string line = "killed(";
  line += format_network(e.killed);
  line += ',';
  line += format_network(e.killer);
  line += ",[";
  for (std::size_t c = 0; c < e.pi.image.size(); ++c) {
    if (c) line += ',';
    line += std::to_string(e.pi.image[c]);
  }
  line += "])";
  return line;
}

using LogSink = std::function<void(const SubsumptionLogEntry&)>;

struct EngineConfig {
  int channels = 0;
  int k_max = 0;  // 0: run until the pruned set is a singleton sorting network
  int workers = 1;
  int split_multiplier = 1;  // m: chunk count for pruning is m * workers
  std::size_t min_chunk_generate = 1000;
  std::size_t min_chunk_prune = 5000;
  std::filesystem::path checkpoint_dir = "out";
  std::filesystem::path log_path;  // empty: <checkpoint_dir>/killed_<n>.log
  bool resume = false;
};

inline LevelSet initial_level(int n) {
  require_channel_count(n);
  LevelSet level{n, 0, {}};
  level.records.push_back(make_record(Network{n, {}}));
  return level;
}

/// Extend every record by every non-redundant comparator. Outputs are carried
/// forward incrementally; the position sets are recomputed per extension.
inline LevelSet generate(const LevelSet& R) {
  LevelSet out{R.channels, R.level + 1, {}};
  const int n = R.channels;
  out.records.reserve(R.records.size() * static_cast<std::size_t>(n * (n - 1) / 2));
  for (const NetworkRecord& rec : R.records)
    for (int i = 1; i < n; ++i)
      for (int j = i + 1; j <= n; ++j) {
        const Comparator c{i, j};
        if (is_redundant(rec.outs, c)) continue;
        out.records.push_back(extend_record(rec, c));
      }
  return out;
}

/// Keep one representative per minimal subsumption class: each incoming
/// network is dropped if an accepted one subsumes it, and otherwise evicts
/// the accepted networks it subsumes. Every eviction is reported to the sink.
inline LevelSet prune(const LevelSet& N, const LogSink& sink = {}, FilterStats* stats = nullptr) {
  LevelSet R{N.channels, N.level, {}};
  for (const NetworkRecord& incoming : N.records) {
    bool dead = false;
    for (const NetworkRecord& kept : R.records) {
      SubsumptionOutcome out = find_subsumption(kept, incoming, stats);
      if (out.witness()) {
        if (sink) sink({incoming.net, kept.net, std::move(out.pi)});
        dead = true;
        break;
      }
    }
    if (dead) continue;
    std::erase_if(R.records, [&](const NetworkRecord& kept) {
      SubsumptionOutcome out = find_subsumption(incoming, kept, stats);
      if (!out.witness()) return false;
      if (sink) sink({kept.net, incoming.net, std::move(out.pi)});
      return true;
    });
    R.records.push_back(incoming);
  }
  return R;
}

/// One-directional variant: drop from candidates whatever some reference
/// record subsumes. The reference set itself is left untouched.
inline LevelSet remove_subsumed(const LevelSet& candidates, const LevelSet& reference,
                                const LogSink& sink = {}, FilterStats* stats = nullptr) {
  LevelSet out{candidates.channels, candidates.level, {}};
  out.records.reserve(candidates.records.size());
  for (const NetworkRecord& cand : candidates.records) {
    bool dead = false;
    for (const NetworkRecord& ref : reference.records) {
      SubsumptionOutcome res = find_subsumption(ref, cand, stats);
      if (res.witness()) {
        if (ref.net == cand.net) continue;  // subsumption is reflexive
        if (sink) sink({cand.net, ref.net, std::move(res.pi)});
        dead = true;
        break;
      }
    }
    if (!dead) out.records.push_back(cand);
  }
  return out;
}

namespace detail {

/// Contiguous equal slices; at most max_chunks, none below min_size.
inline std::vector<std::pair<std::size_t, std::size_t>> split_ranges(std::size_t total,
                                                                     std::size_t max_chunks,
                                                                     std::size_t min_size) {
  std::size_t chunks = max_chunks;
  if (min_size > 0) chunks = std::min(chunks, std::max<std::size_t>(1, total / min_size));
  chunks = std::max<std::size_t>(1, std::min(chunks, total == 0 ? 1 : total));
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t base = total / chunks, extra = total % chunks, begin = 0;
  for (std::size_t i = 0; i < chunks; ++i) {
    std::size_t len = base + (i < extra ? 1 : 0);
    ranges.emplace_back(begin, begin + len);
    begin += len;
  }
  return ranges;
}

inline LevelSet slice(const LevelSet& src, std::pair<std::size_t, std::size_t> range) {
  LevelSet out{src.channels, src.level, {}};
  out.records.assign(src.records.begin() + static_cast<std::ptrdiff_t>(range.first),
                     src.records.begin() + static_cast<std::ptrdiff_t>(range.second));
  return out;
}

}  // namespace detail

/// Split, extend per chunk, merge by concatenation. Extensions of distinct
/// prefixes are distinct, so concatenation preserves set equality with the
/// sequential result, and chunk order keeps it deterministic.
inline LevelSet parallel_generate(const LevelSet& R, const EngineConfig& cfg, WorkerPool& pool) {
  auto ranges = detail::split_ranges(R.size(), static_cast<std::size_t>(pool.workers()),
                                     cfg.min_chunk_generate);
  if (ranges.size() == 1) return generate(R);
  std::vector<LevelSet> results(ranges.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < ranges.size(); ++i)
    tasks.push_back([&, i] { results[i] = generate(detail::slice(R, ranges[i])); });
  pool.run(std::move(tasks));
  LevelSet out{R.channels, R.level + 1, {}};
  for (LevelSet& part : results) {
    out.records.insert(out.records.end(), std::make_move_iterator(part.records.begin()),
                       std::make_move_iterator(part.records.end()));
  }
  return out;
}

/// Two-phase pruning: prune chunks independently, then round-robin each chunk
/// against all others with a barrier between rounds. Kill entries are flushed
/// in chunk order at every barrier, so the log is reproducible for a fixed
/// configuration.
inline LevelSet parallel_prune(const LevelSet& N, const EngineConfig& cfg, WorkerPool& pool,
                               const LogSink& sink = {}, FilterStats* stats = nullptr) {
  const std::size_t max_chunks =
      static_cast<std::size_t>(pool.workers()) * static_cast<std::size_t>(cfg.split_multiplier);
  auto ranges = detail::split_ranges(N.size(), max_chunks, cfg.min_chunk_prune);
  if (ranges.size() == 1) return prune(N, sink, stats);

  const std::size_t q = ranges.size();
  std::vector<LevelSet> chunk(q);
  std::vector<std::vector<SubsumptionLogEntry>> buffer(q);
  std::vector<FilterStats> local(q);
  auto buffered_sink = [&](std::size_t i) {
    return [&buffer, i](const SubsumptionLogEntry& e) { buffer[i].push_back(e); };
  };
  auto flush = [&] {
    for (std::size_t i = 0; i < q; ++i) {
      if (sink)
        for (const SubsumptionLogEntry& e : buffer[i]) sink(e);
      buffer[i].clear();
    }
  };

  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < q; ++i)
    tasks.push_back(
        [&, i] { chunk[i] = prune(detail::slice(N, ranges[i]), buffered_sink(i), &local[i]); });
  pool.run(std::move(tasks));
  flush();

  for (std::size_t j = 0; j < q; ++j) {
    std::vector<std::function<void()>> round;
    for (std::size_t i = 0; i < q; ++i) {
      if (i == j) continue;
      round.push_back([&, i, j] {
        chunk[i] = remove_subsumed(chunk[i], chunk[j], buffered_sink(i), &local[i]);
      });
    }
    pool.run(std::move(round));
    flush();
  }

  LevelSet out{N.channels, N.level, {}};
  for (LevelSet& part : chunk)
    out.records.insert(out.records.end(), std::make_move_iterator(part.records.begin()),
                       std::make_move_iterator(part.records.end()));
  if (stats)
    for (const FilterStats& s : local) stats->merge(s);
  return out;
}

// --- checkpoint files -------------------------------------------------------

inline std::filesystem::path checkpoint_path(const std::filesystem::path& dir, int n, int k) {
  return dir / ("R_" + std::to_string(n) + "_" + std::to_string(k) + ".txt");
}

/// One network per line in text form, sorted lexicographically. The file is
/// written to a temporary name first so an interrupted run never leaves a
/// truncated checkpoint behind.
inline void write_checkpoint(const std::filesystem::path& path, const LevelSet& level) {
  std::vector<std::string> lines;
  lines.reserve(level.size());
  for (const NetworkRecord& rec : level.records) lines.push_back(format_network(rec.net));
  std::sort(lines.begin(), lines.end());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    for (const std::string& line : lines) out << line << '\n';
    if (!out.flush()) throw std::runtime_error("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<Network> load_network_lines(const std::filesystem::path& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<Network> nets;
  std::string line;
  while (std::getline(in, line)) nets.push_back(parse_network(line, n));
  return nets;
}

inline LevelSet load_checkpoint(const std::filesystem::path& path, int n, int k) {
  LevelSet level{n, k, {}};
  for (Network& net : load_network_lines(path, n)) {
    if (static_cast<int>(net.size()) != k)
      throw std::runtime_error("checkpoint " + path.string() + " holds a network of size " +
                               std::to_string(net.size()) + ", expected " + std::to_string(k));
    level.records.push_back(make_record(std::move(net)));
  }
  return level;
}

// --- full run ---------------------------------------------------------------

struct RunReport {
  int channels = 0;
  int workers = 1;
  int split_multiplier = 1;
  std::vector<std::size_t> level_sizes;      // level_sizes[k] = |R_k|
  std::vector<std::size_t> generated_sizes;  // generated_sizes[k] = |N_k|, index 0 unused
  FilterStats stats;
  double seconds_generate = 0;
  double seconds_prune = 0;
  double seconds_total = 0;
  int optimal_size = -1;  // found: smallest size admitting a sorting network
  Network optimal_network;

  std::string to_text() const {
    std::ostringstream out;
    out << "n=" << channels << '\n';
    out << "workers=" << workers << '\n';
    out << "split_multiplier=" << split_multiplier << '\n';
    for (std::size_t k = 0; k < level_sizes.size(); ++k)
      out << "level_" << k << "=" << level_sizes[k] << '\n';
    std::size_t max_generated = 0, max_generated_level = 0;
    for (std::size_t k = 1; k < generated_sizes.size(); ++k) {
      out << "generated_" << k << "=" << generated_sizes[k] << '\n';
      if (generated_sizes[k] > max_generated) {
        max_generated = generated_sizes[k];
        max_generated_level = k;
      }
    }
    out << "max_generated=" << max_generated << '\n';
    out << "max_generated_level=" << max_generated_level << '\n';
    if (optimal_size >= 0) {
      out << "optimal_size=" << optimal_size << '\n';
      out << "optimal_network=" << format_network(optimal_network) << '\n';
    }
    out << "subsumption_tests=" << stats.tests << '\n';
    out << "count_filter_rejections=" << stats.count_filter_rejections << '\n';
    out << "position_filter_rejections=" << stats.position_filter_rejections << '\n';
    out << "full_searches=" << stats.full_searches << '\n';
    out << "witnesses_found=" << stats.witnesses_found << '\n';
    out << "count_filter_rate="
        << (stats.tests ? static_cast<double>(stats.count_filter_rejections) /
                              static_cast<double>(stats.tests)
                        : 0.0)
        << '\n';
    out << "time_generate_s=" << seconds_generate << '\n';
    out << "time_prune_s=" << seconds_prune << '\n';
    out << "time_total_s=" << seconds_total << '\n';
    return out.str();
  }
};

/// Iterate extend-then-prune from the empty network until a level collapses
/// to a single sorting network or k_max is reached. Each completed level is
/// checkpointed; every pruned network is logged with its witness.
inline RunReport run(const EngineConfig& cfg) {
  require_channel_count(cfg.channels);
  if (cfg.workers < 1 || cfg.split_multiplier < 1)
    throw std::invalid_argument("workers and split multiplier must be at least 1");
  const int n = cfg.channels;
  const int cap = cfg.k_max > 0 ? cfg.k_max : n * (n - 1) / 2;

  std::filesystem::create_directories(cfg.checkpoint_dir);
  const std::filesystem::path log_path =
      cfg.log_path.empty() ? cfg.checkpoint_dir / ("killed_" + std::to_string(n) + ".log")
                           : cfg.log_path;

  RunReport report;
  report.channels = n;
  report.workers = cfg.workers;
  report.split_multiplier = cfg.split_multiplier;

  WorkerPool pool(cfg.workers);
  LevelSet R;
  int k = 0;
  if (cfg.resume) {
    while (std::filesystem::exists(checkpoint_path(cfg.checkpoint_dir, n, k + 1))) ++k;
    R = load_checkpoint(checkpoint_path(cfg.checkpoint_dir, n, k), n, k);
    for (int past = 0; past < k; ++past)
      report.level_sizes.push_back(
          load_network_lines(checkpoint_path(cfg.checkpoint_dir, n, past), n).size());
  } else {
    R = initial_level(n);
  }

  std::ofstream log(log_path, cfg.resume ? std::ios::app : std::ios::trunc);
  if (!log) throw std::runtime_error("cannot open log " + log_path.string());
  LogSink sink = [&log, &log_path](const SubsumptionLogEntry& e) {
    log << format_log_entry(e) << '\n';
    if (!log) throw std::runtime_error("failed writing log " + log_path.string());
  };

  const auto t0 = std::chrono::steady_clock::now();
  auto seconds_since = [](std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  if (!cfg.resume) write_checkpoint(checkpoint_path(cfg.checkpoint_dir, n, 0), R);
  report.level_sizes.push_back(R.size());
  report.generated_sizes.assign(report.level_sizes.size(), 0);

  while (k < cap) {
    if (R.size() == 1 && is_sorting(R.records.front().net)) {
      report.optimal_size = k;
      report.optimal_network = R.records.front().net;
      break;
    }
    auto tg = std::chrono::steady_clock::now();
    LevelSet N = parallel_generate(R, cfg, pool);
    report.seconds_generate += seconds_since(tg);

    auto tp = std::chrono::steady_clock::now();
    R = parallel_prune(N, cfg, pool, sink, &report.stats);
    report.seconds_prune += seconds_since(tp);
    ++k;

    log.flush();
    write_checkpoint(checkpoint_path(cfg.checkpoint_dir, n, k), R);
    report.generated_sizes.push_back(N.size());
    report.level_sizes.push_back(R.size());
  }
  if (report.optimal_size < 0 && R.size() == 1 && is_sorting(R.records.front().net))
    report.optimal_size = k;
  if (report.optimal_size >= 0 && report.optimal_network.channels == 0)
    report.optimal_network = R.records.front().net;
  report.seconds_total = seconds_since(t0);
  return report;
}

}  // namespace sortnet
