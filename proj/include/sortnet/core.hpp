#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "sortnet/netform.hpp"

namespace sortnet {

/// A binary sequence x_1..x_n packed least-significant-bit first:
/// x_i = (value >> (i-1)) & 1.
using Word = std::uint16_t;

inline int bit_at(Word v, int channel) { return (v >> (channel - 1)) & 1; }

inline int popcount(Word v) { return std::popcount(static_cast<unsigned>(v)); }

/// The sorted sequence 0^(n-k) 1^k, i.e. all ones pushed to the top channels.
inline Word sorted_value(int n, int ones) {
  return static_cast<Word>((1u << n) - (1u << (n - ones)));
}

inline bool is_sorted_value(Word v, int n) { return v == sorted_value(n, popcount(v)); }

/// Min-max exchange on channels (c.i, c.j). For v with x_i = 1 and x_j = 0
/// this is v - 2^(i-1) + 2^(j-1); otherwise v is unchanged.
inline Word apply_comparator(Word v, Comparator c) {
  if (c.i < 1 || c.j < 1 || c.i >= c.j || c.j > kMaxChannels)
    throw std::out_of_range("comparator channels out of range or not standard");
  const Word lo = static_cast<Word>(1u << (c.i - 1));
  const Word hi = static_cast<Word>(1u << (c.j - 1));
  if ((v & lo) && !(v & hi)) return static_cast<Word>(v - lo + hi);
  return v;
}

inline Word run_network(Word v, const Network& net) {
  for (const Comparator& c : net.comps) v = apply_comparator(v, c);
  return v;
}

/// A channel permutation; image[c-1] = pi(c), all 1-based.
struct Permutation {
  std::vector<int> image;

  static Permutation identity(int n) {
    Permutation p;
    p.image.resize(static_cast<std::size_t>(n));
    std::iota(p.image.begin(), p.image.end(), 1);
    return p;
  }

  int size() const { return static_cast<int>(image.size()); }
  int map(int c) const { return image[static_cast<std::size_t>(c - 1)]; }

  bool is_bijection() const {
    const int n = size();
    unsigned seen = 0;
    for (int v : image) {
      if (v < 1 || v > n || (seen & (1u << (v - 1)))) return false;
      seen |= 1u << (v - 1);
    }
    return true;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
};

/// Relabel the bits of v: bit c moves to bit pi(c).
inline Word apply_perm(const Permutation& pi, Word v) {
  Word out = 0;
  for (int c = 1; c <= pi.size(); ++c)
    if (v & (1u << (c - 1))) out |= static_cast<Word>(1u << (pi.map(c) - 1));
  return out;
}

/// f after g: (compose(f,g))(c) = f(g(c)).
inline Permutation compose(const Permutation& f, const Permutation& g) {
  Permutation out;
  out.image.reserve(g.image.size());
  for (int v : g.image) out.image.push_back(f.map(v));
  return out;
}

inline Permutation inverse(const Permutation& p) {
  Permutation out;
  out.image.resize(p.image.size());
  for (int c = 1; c <= p.size(); ++c) out.image[static_cast<std::size_t>(p.map(c) - 1)] = c;
  return out;
}

/// The image of {0,1}^n under a network, partitioned by popcount.
/// parts[k] holds the outputs with exactly k ones, ascending and unique.
struct OutputSet {
  int channels = 0;
  std::vector<std::vector<Word>> parts;

  static OutputSet all_inputs(int n) {
    require_channel_count(n);
    OutputSet s;
    s.channels = n;
    s.parts.resize(static_cast<std::size_t>(n) + 1);
    for (unsigned v = 0; v < (1u << n); ++v)
      s.parts[static_cast<std::size_t>(popcount(static_cast<Word>(v)))].push_back(
          static_cast<Word>(v));
    return s;
  }

  static OutputSet from_values(int n, std::span<const Word> values) {
    require_channel_count(n);
    OutputSet s;
    s.channels = n;
    s.parts.resize(static_cast<std::size_t>(n) + 1);
    for (Word v : values) {
      if (v >= (1u << n)) throw std::invalid_argument("value out of range for channel count");
      s.parts[static_cast<std::size_t>(popcount(v))].push_back(v);
    }
    s.normalize();
    return s;
  }

  void normalize() {
    for (auto& part : parts) {
      std::sort(part.begin(), part.end());
      part.erase(std::unique(part.begin(), part.end()), part.end());
    }
  }

  std::size_t size() const {
    std::size_t total = 0;
    for (const auto& part : parts) total += part.size();
    return total;
  }

  bool contains(Word v) const {
    const auto& part = parts[static_cast<std::size_t>(popcount(v))];
    return std::binary_search(part.begin(), part.end(), v);
  }

  std::vector<Word> flatten() const {
    std::vector<Word> all;
    all.reserve(size());
    for (const auto& part : parts) all.insert(all.end(), part.begin(), part.end());
    std::sort(all.begin(), all.end());
    return all;
  }

  friend bool operator==(const OutputSet&, const OutputSet&) = default;
};

inline OutputSet network_outputs(const Network& net) {
  require_channel_count(net.channels);
  OutputSet s;
  s.channels = net.channels;
  s.parts.resize(static_cast<std::size_t>(net.channels) + 1);
  for (unsigned v = 0; v < (1u << net.channels); ++v) {
    Word out = run_network(static_cast<Word>(v), net);
    s.parts[static_cast<std::size_t>(popcount(out))].push_back(out);
  }
  s.normalize();
  return s;
}

/// Output set of the extended network, computed from the parent's outputs.
/// Comparators never change popcount, so each class maps into itself.
inline OutputSet extend_outputs(const OutputSet& outs, Comparator c) {
  OutputSet s;
  s.channels = outs.channels;
  s.parts.resize(outs.parts.size());
  for (std::size_t k = 0; k < outs.parts.size(); ++k) {
    s.parts[k].reserve(outs.parts[k].size());
    for (Word v : outs.parts[k]) s.parts[k].push_back(apply_comparator(v, c));
  }
  s.normalize();
  return s;
}

inline bool is_sorting(const Network& net) {
  require_channel_count(net.channels);
  for (unsigned v = 0; v < (1u << net.channels); ++v)
    if (!is_sorted_value(run_network(static_cast<Word>(v), net), net.channels)) return false;
  return true;
}

/// A comparator (i,j) is redundant after outputs outs when x_i <= x_j already
/// holds on every reachable output; appending it would change nothing.
inline bool is_redundant(const OutputSet& outs, Comparator c) {
  if (!is_standard(c, outs.channels))
    throw std::invalid_argument("redundancy test requires a standard comparator in range");
  const Word lo = static_cast<Word>(1u << (c.i - 1));
  const Word hi = static_cast<Word>(1u << (c.j - 1));
  for (const auto& part : outs.parts)
    for (Word v : part)
      if ((v & lo) && !(v & hi)) return false;
  return true;
}

/// For x in {0,1} and popcount class k, the set of channels (as a bitmask)
/// on which bit value x occurs among the outputs with k ones.
struct PositionWitness {
  int channels = 0;
  std::vector<Word> zeros;  // zeros[k]: channels carrying a 0 in class k
  std::vector<Word> ones;   // ones[k]:  channels carrying a 1 in class k

  Word mask(int x, int k) const {
    return x == 0 ? zeros[static_cast<std::size_t>(k)] : ones[static_cast<std::size_t>(k)];
  }

  friend bool operator==(const PositionWitness&, const PositionWitness&) = default;
};

inline PositionWitness position_witness(const OutputSet& outs) {
  PositionWitness w;
  w.channels = outs.channels;
  const Word full = static_cast<Word>((1u << outs.channels) - 1);
  w.zeros.resize(outs.parts.size(), 0);
  w.ones.resize(outs.parts.size(), 0);
  for (std::size_t k = 0; k < outs.parts.size(); ++k) {
    for (Word v : outs.parts[k]) {
      w.ones[k] |= v;
      w.zeros[k] |= static_cast<Word>(~v & full);
    }
  }
  return w;
}

/// A network bundled with its outputs and the per-class position sets, the
/// unit of storage for the search.
struct NetworkRecord {
  Network net;
  OutputSet outs;
  PositionWitness wit;
};

inline NetworkRecord make_record(Network net) {
  OutputSet outs = network_outputs(net);
  PositionWitness wit = position_witness(outs);
  return NetworkRecord{std::move(net), std::move(outs), std::move(wit)};
}

inline NetworkRecord extend_record(const NetworkRecord& rec, Comparator c) {
  Network net = rec.net;
  net.comps.push_back(c);
  OutputSet outs = extend_outputs(rec.outs, c);
  PositionWitness wit = position_witness(outs);
  return NetworkRecord{std::move(net), std::move(outs), std::move(wit)};
}

/// pi(C): relabel every comparator's channels; the result may be generalized.
inline GeneralizedNetwork permute_network(const Network& net, const Permutation& pi) {
  if (pi.size() != net.channels || !pi.is_bijection())
    throw std::invalid_argument("permutation must be a bijection on the network's channels");
  GeneralizedNetwork out{net.channels, {}};
  out.comps.reserve(net.comps.size());
  for (const Comparator& c : net.comps) out.comps.push_back({pi.map(c.i), pi.map(c.j)});
  return out;
}

/// Standardize a generalized network without changing its size: scan left to
/// right; a descending comparator (a,b) is emitted as (b,a) and the labels a,b
/// are exchanged on all later comparators. A standard network is a fixed point.
inline Network untangle(const GeneralizedNetwork& g) {
  require_channel_count(g.channels);
  std::vector<int> label(static_cast<std::size_t>(g.channels) + 1);
  std::iota(label.begin(), label.end(), 0);
  Network out{g.channels, {}};
  out.comps.reserve(g.comps.size());
  for (const Comparator& c : g.comps) {
    if (!comparator_in_range(c, g.channels))
      throw std::invalid_argument("comparator channels out of range");
    int a = label[static_cast<std::size_t>(c.i)];
    int b = label[static_cast<std::size_t>(c.j)];
    if (a < b) {
      out.comps.push_back({a, b});
    } else {
      out.comps.push_back({b, a});
      for (int& l : label) {
        if (l == a)
          l = b;
        else if (l == b)
          l = a;
      }
    }
  }
  return out;
}

/// All values that are not sorted sequences; there are 2^n - n - 1 of them.
inline std::vector<Word> unsorted_inputs(int n) {
  require_channel_count(n);
  std::vector<Word> out;
  out.reserve((1u << n) - static_cast<unsigned>(n) - 1);
  for (unsigned v = 0; v < (1u << n); ++v)
    if (!is_sorted_value(static_cast<Word>(v), n)) out.push_back(static_cast<Word>(v));
  return out;
}

/// Unsorted inputs shaped 0^l1 . w . 1^l2 with l1 + l2 = s, over all splits.
/// s = 0 yields exactly unsorted_inputs(n).
inline std::vector<Word> window_inputs(int n, int s) {
  require_channel_count(n);
  if (s < 0 || s >= n) throw std::invalid_argument("window size must satisfy 0 <= s < n");
  const int w_len = n - s;
  std::vector<Word> out;
  for (int lead_zeros = 0; lead_zeros <= s; ++lead_zeros) {
    const int trail_ones = s - lead_zeros;
    for (unsigned w = 0; w < (1u << w_len); ++w) {
      // channels 1..l1 zero, then w, then ones on the top l2 channels
      Word v = static_cast<Word>(w << lead_zeros);
      for (int c = n - trail_ones + 1; c <= n; ++c) v |= static_cast<Word>(1u << (c - 1));
      if (!is_sorted_value(v, n)) out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace sortnet
