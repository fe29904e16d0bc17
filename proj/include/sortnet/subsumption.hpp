#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "sortnet/core.hpp"

namespace sortnet {

enum class SubsumeResult {
  Witness,                  // a permutation mapping outputs(a) into outputs(b) was found
  NoPermutation,            // exhaustive (restricted) search found none
  RejectedByCountFilter,    // some class of a has more elements than b's
  RejectedByPositionFilter  // some position set of a is larger than b's
};

struct SubsumptionOutcome {
  SubsumeResult result = SubsumeResult::NoPermutation;
  Permutation pi;  // meaningful only when result == Witness

  bool witness() const { return result == SubsumeResult::Witness; }
};

struct FilterStats {
  std::uint64_t tests = 0;
  std::uint64_t count_filter_rejections = 0;  // class-count filter hits
  std::uint64_t position_filter_rejections = 0;  // position-count filter hits
  std::uint64_t full_searches = 0;
  std::uint64_t witnesses_found = 0;

  void merge(const FilterStats& o) {
    tests += o.tests;
    count_filter_rejections += o.count_filter_rejections;
    position_filter_rejections += o.position_filter_rejections;
    full_searches += o.full_searches;
    witnesses_found += o.witnesses_found;
  }
};

/// False when some popcount class of a is strictly larger than b's, which
/// rules out any permutation mapping outputs(a) into outputs(b).
inline bool count_filter(const OutputSet& a, const OutputSet& b) {
  if (a.channels != b.channels)
    throw std::invalid_argument("count_filter requires equal channel counts");
  for (std::size_t k = 0; k < a.parts.size(); ++k)
    if (a.parts[k].size() > b.parts[k].size()) return false;
  return true;
}

/// False when, for some bit value and class, value x occurs on more channels
/// in a than in b; permutations preserve those counts.
inline bool position_filter(const PositionWitness& a, const PositionWitness& b) {
  if (a.channels != b.channels)
    throw std::invalid_argument("position_filter requires equal channel counts");
  for (std::size_t k = 0; k < a.zeros.size(); ++k) {
    if (std::popcount(static_cast<unsigned>(a.zeros[k])) >
        std::popcount(static_cast<unsigned>(b.zeros[k])))
      return false;
    if (std::popcount(static_cast<unsigned>(a.ones[k])) >
        std::popcount(static_cast<unsigned>(b.ones[k])))
      return false;
  }
  return true;
}

/// Direct check that pi(a) is a subset of b, class by class.
inline bool maps_into(const OutputSet& a, const Permutation& pi, const OutputSet& b) {
  for (std::size_t k = 0; k < a.parts.size(); ++k) {
    const auto& target = b.parts[k];
    for (Word v : a.parts[k])
      if (!std::binary_search(target.begin(), target.end(), apply_perm(pi, v))) return false;
  }
  return true;
}

namespace detail {

struct SubsumeSearch {
  const OutputSet& a;
  const OutputSet& b;
  int n;
  Word cand[kMaxChannels];        // allowed images per channel (bitmask)
  int image[kMaxChannels];        // image[c-1] = pi(c), 0 while unassigned
  Word used = 0;
  std::vector<std::size_t> class_order;  // popcount classes, smallest side first

  SubsumeSearch(const OutputSet& a_, const OutputSet& b_) : a(a_), b(b_), n(a_.channels) {
    std::fill(image, image + n, 0);
    class_order.resize(a.parts.size());
    std::iota(class_order.begin(), class_order.end(), 0);
    std::sort(class_order.begin(), class_order.end(), [&](std::size_t x, std::size_t y) {
      return a.parts[x].size() < a.parts[y].size();
    });
  }

  bool leaf_check() const {
    Permutation pi;
    pi.image.assign(image, image + n);
    for (std::size_t k : class_order) {
      const auto& target = b.parts[k];
      for (Word v : a.parts[k])
        if (!std::binary_search(target.begin(), target.end(), apply_perm(pi, v))) return false;
    }
    return true;
  }

  bool assign(int depth) {
    if (depth == n) return leaf_check();
    // fail-first: pick the unassigned channel with the fewest remaining images
    int best = -1, best_count = n + 1;
    for (int c = 0; c < n; ++c) {
      if (image[c]) continue;
      int count = std::popcount(static_cast<unsigned>(cand[c] & ~used));
      if (count < best_count) {
        best_count = count;
        best = c;
      }
    }
    if (best_count == 0) return false;
    Word options = static_cast<Word>(cand[best] & ~used);
    while (options) {
      int target = std::countr_zero(static_cast<unsigned>(options)) + 1;
      options = static_cast<Word>(options & (options - 1));
      image[best] = target;
      used |= static_cast<Word>(1u << (target - 1));
      if (assign(depth + 1)) return true;
      image[best] = 0;
      used &= static_cast<Word>(~(1u << (target - 1)));
    }
    return false;
  }
};

}  // namespace detail

/// Search for a permutation pi with pi(outputs(a)) a subset of outputs(b).
/// Cheap rejections run first; the remaining search assigns channel images
/// restricted to the position sets, fail-first, smallest channel index first,
/// so returned witnesses are deterministic.
inline SubsumptionOutcome find_subsumption(const OutputSet& a, const PositionWitness& wa,
                                           const OutputSet& b, const PositionWitness& wb,
                                           FilterStats* stats = nullptr) {
  if (a.channels != b.channels)
    throw std::invalid_argument("subsumption requires equal channel counts");
  const int n = a.channels;
  if (stats) ++stats->tests;
  if (!count_filter(a, b)) {
    if (stats) ++stats->count_filter_rejections;
    return {SubsumeResult::RejectedByCountFilter, {}};
  }
  if (!position_filter(wa, wb)) {
    if (stats) ++stats->position_filter_rejections;
    return {SubsumeResult::RejectedByPositionFilter, {}};
  }
  if (stats) ++stats->full_searches;

  // identity is by far the most common witness; test it outright
  bool identity_ok = true;
  for (std::size_t k = 0; k < a.parts.size() && identity_ok; ++k)
    identity_ok = std::includes(b.parts[k].begin(), b.parts[k].end(), a.parts[k].begin(),
                                a.parts[k].end());
  if (identity_ok) {
    if (stats) ++stats->witnesses_found;
    return {SubsumeResult::Witness, Permutation::identity(n)};
  }

  detail::SubsumeSearch search(a, b);
  const Word full = static_cast<Word>((1u << n) - 1);
  for (int c = 1; c <= n; ++c) {
    Word mask = full;
    for (std::size_t k = 0; k < wa.zeros.size(); ++k) {
      if (wa.zeros[k] & (1u << (c - 1))) mask &= wb.zeros[k];
      if (wa.ones[k] & (1u << (c - 1))) mask &= wb.ones[k];
    }
    search.cand[c - 1] = mask;
    if (!mask) return {SubsumeResult::NoPermutation, {}};
  }
  if (search.assign(0)) {
    if (stats) ++stats->witnesses_found;
    Permutation pi;
    pi.image.assign(search.image, search.image + n);
    return {SubsumeResult::Witness, std::move(pi)};
  }
  return {SubsumeResult::NoPermutation, {}};
}

inline SubsumptionOutcome find_subsumption(const NetworkRecord& a, const NetworkRecord& b,
                                           FilterStats* stats = nullptr) {
  return find_subsumption(a.outs, a.wit, b.outs, b.wit, stats);
}

/// Reference implementation: try all n! permutations in lexicographic order.
/// Deliberately unoptimized; refuses n > 8.
inline SubsumptionOutcome brute_force_subsumption(const OutputSet& a, const OutputSet& b) {
  if (a.channels != b.channels)
    throw std::invalid_argument("subsumption requires equal channel counts");
  if (a.channels > 8) throw std::invalid_argument("brute-force subsumption is limited to n <= 8");
  Permutation pi = Permutation::identity(a.channels);
  do {
    if (maps_into(a, pi, b)) return {SubsumeResult::Witness, pi};
  } while (std::next_permutation(pi.image.begin(), pi.image.end()));
  return {SubsumeResult::NoPermutation, {}};
}

inline SubsumptionOutcome brute_force_subsumption(const NetworkRecord& a,
                                                  const NetworkRecord& b) {
  return brute_force_subsumption(a.outs, b.outs);
}

}  // namespace sortnet
