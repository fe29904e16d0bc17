#pragma once

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sortnet {

inline constexpr int kMaxChannels = 16;

/// One comparator acting on a pair of channels (1-based).
/// Standard form requires i < j; generalized comparators may have i > j.
struct Comparator {
  int i = 0;
  int j = 0;

  friend bool operator==(const Comparator&, const Comparator&) = default;
  friend auto operator<=>(const Comparator&, const Comparator&) = default;
};

/// A comparator network in standard form: every comparator has i < j.
struct Network {
  int channels = 0;
  std::vector<Comparator> comps;

  std::size_t size() const { return comps.size(); }
  friend bool operator==(const Network&, const Network&) = default;
};

/// A network that may contain descending comparators (i > j).
struct GeneralizedNetwork {
  int channels = 0;
  std::vector<Comparator> comps;

  std::size_t size() const { return comps.size(); }
  friend bool operator==(const GeneralizedNetwork&, const GeneralizedNetwork&) = default;
};

inline void require_channel_count(int n) {
  if (n < 1 || n > kMaxChannels)
    throw std::invalid_argument("channel count must be in [1, " +
                                std::to_string(kMaxChannels) + "], got " + std::to_string(n));
}

inline bool comparator_in_range(const Comparator& c, int n) {
  return c.i >= 1 && c.i <= n && c.j >= 1 && c.j <= n && c.i != c.j;
}

inline bool is_standard(const Comparator& c, int n) {
  return c.i >= 1 && c.i < c.j && c.j <= n;
}

inline bool is_standard(const Network& net) {
  for (const Comparator& c : net.comps)
    if (!is_standard(c, net.channels)) return false;
  return true;
}

/// Text form used by checkpoint files and kill logs: "(1,2);(3,4)".
/// The empty network is the empty string.
inline std::string format_network(const Network& net) {
  std::string out;
  for (std::size_t t = 0; t < net.comps.size(); ++t) {
    if (t) out += ';';
    out += '(';
    out += std::to_string(net.comps[t].i);
    out += ',';
    out += std::to_string(net.comps[t].j);
    out += ')';
  }
  return out;
}

namespace detail {

inline int parse_channel(std::string_view text, std::size_t& pos) {
  std::size_t start = pos;
  int value = 0;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
    value = value * 10 + (text[pos] - '0');
    if (value > kMaxChannels) throw std::invalid_argument("channel index out of range");
    ++pos;
  }
  if (pos == start) throw std::invalid_argument("expected channel index");
  return value;
}

}  // namespace detail

/// Strict parse of the network text form. Enforces standard form (i < j)
/// and channels within [1, n].
inline Network parse_network(std::string_view text, int n) {
  require_channel_count(n);
  Network net{n, {}};
  if (text.empty()) return net;
  std::size_t pos = 0;
  while (true) {
    if (pos >= text.size() || text[pos] != '(')
      throw std::invalid_argument("expected '(' at position " + std::to_string(pos));
    ++pos;
    int i = detail::parse_channel(text, pos);
    if (pos >= text.size() || text[pos] != ',')
      throw std::invalid_argument("expected ',' at position " + std::to_string(pos));
    ++pos;
    int j = detail::parse_channel(text, pos);
    if (pos >= text.size() || text[pos] != ')')
      throw std::invalid_argument("expected ')' at position " + std::to_string(pos));
    ++pos;
    Comparator c{i, j};
    if (!is_standard(c, n))
      throw std::invalid_argument("comparator (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") is not standard on " + std::to_string(n) + " channels");
    net.comps.push_back(c);
    if (pos == text.size()) break;
    if (text[pos] != ';')
      throw std::invalid_argument("expected ';' at position " + std::to_string(pos));
    ++pos;
  }
  return net;
}

}  // namespace sortnet
