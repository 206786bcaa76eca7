#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "traffic/errors.hpp"
#include "traffic/value.hpp"

namespace traffic {

inline constexpr int kPartitionGuard = 12;
inline constexpr int kPairPartitionGuard = 16;
inline constexpr int kNoncrossingGuard = 12;

/// A partition of {0..n-1}, stored as its restricted growth string: label[i]
/// is the index of the block containing i, blocks numbered by first element.
class SetPartition {
 public:
  SetPartition() = default;

  /// Accepts any block labelling and renumbers it canonically.
  explicit SetPartition(const std::vector<int>& labels) : labels_(labels.size()) {
    std::vector<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto it = std::find_if(seen.begin(), seen.end(), [&](auto& p) { return p.first == labels[i]; });
      if (it == seen.end()) {
        seen.push_back({labels[i], static_cast<int>(seen.size())});
        labels_[i] = seen.back().second;
      } else {
        labels_[i] = it->second;
      }
    }
    block_count_ = static_cast<int>(seen.size());
  }

  static SetPartition from_blocks(int n, const std::vector<std::vector<int>>& blocks) {
    std::vector<int> labels(n, -1);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b].empty()) throw ContractError("empty block in set partition");
      for (int i : blocks[b]) {
        if (i < 0 || i >= n || labels[i] != -1) throw ContractError("blocks do not partition the ground set");
        labels[i] = static_cast<int>(b);
      }
    }
    for (int l : labels)
      if (l == -1) throw ContractError("blocks do not cover the ground set");
    return SetPartition(labels);
  }

  static SetPartition discrete(int n) {
    std::vector<int> l(n);
    for (int i = 0; i < n; ++i) l[i] = i;
    return SetPartition(l);
  }
  static SetPartition full(int n) { return SetPartition(std::vector<int>(n, 0)); }

  int ground_size() const { return static_cast<int>(labels_.size()); }
  int block_count() const { return block_count_; }
  int block_of(int i) const { return labels_.at(i); }
  const std::vector<int>& labels() const { return labels_; }

  std::vector<std::vector<int>> blocks() const {
    std::vector<std::vector<int>> out(block_count_);
    for (std::size_t i = 0; i < labels_.size(); ++i) out[labels_[i]].push_back(static_cast<int>(i));
    return out;
  }
  std::vector<int> block_sizes() const {
    std::vector<int> out(block_count_, 0);
    for (int l : labels_) ++out[l];
    return out;
  }

  friend bool operator==(const SetPartition& a, const SetPartition& b) { return a.labels_ == b.labels_; }
  friend bool operator<(const SetPartition& a, const SetPartition& b) { return a.labels_ < b.labels_; }

  std::string str() const {
    std::string s = "{";
    auto bs = blocks();
    for (std::size_t b = 0; b < bs.size(); ++b) {
      if (b) s += ",";
      s += "{";
      for (std::size_t k = 0; k < bs[b].size(); ++k) s += (k ? "," : "") + std::to_string(bs[b][k]);
      s += "}";
    }
    return s + "}";
  }

 private:
  std::vector<int> labels_;
  int block_count_ = 0;
};

/// Restricted-growth-string enumeration of all partitions of {0..n-1}.
/// Order: lexicographic in the growth string, discrete partition last.
class PartitionStream {
 public:
  explicit PartitionStream(int n) : n_(checked(n)), rgs_(n_, 0), max_(n_, 0) {}

  std::optional<SetPartition> next() {
    if (done_) return std::nullopt;
    if (first_) {
      first_ = false;
      if (n_ == 0) done_ = true;
      return current();
    }
    int i = n_ - 1;
    while (i > 0 && rgs_[i] == max_[i - 1] + 1) --i;
    if (i <= 0) {
      done_ = true;
      return std::nullopt;
    }
    ++rgs_[i];
    max_[i] = std::max(max_[i - 1], rgs_[i]);
    for (int j = i + 1; j < n_; ++j) {
      rgs_[j] = 0;
      max_[j] = max_[i];
    }
    return current();
  }

 private:
  static int checked(int n) {
    if (n < 0 || n > kPartitionGuard)
      throw GuardError("set partition enumeration limited to 0 <= n <= " + std::to_string(kPartitionGuard) +
                       ", got " + std::to_string(n));
    return n;
  }

  SetPartition current() const { return SetPartition(rgs_); }

  int n_;
  std::vector<int> rgs_;
  std::vector<int> max_;
  bool first_ = true;
  bool done_ = false;
};

template <class F>
void for_each_partition(int n, F&& f) {
  PartitionStream s(n);
  while (auto p = s.next()) f(*p);
}

inline std::vector<SetPartition> enumerate_partitions(int n) {
  std::vector<SetPartition> out;
  for_each_partition(n, [&](const SetPartition& p) { out.push_back(p); });
  return out;
}

/// mu(0, pi) in the partition lattice: prod over blocks of (-1)^{|B|-1} (|B|-1)!.
inline std::int64_t mobius_weight(const SetPartition& p) {
  std::int64_t m = 1;
  for (int size : p.block_sizes()) {
    for (int k = 2; k < size; ++k) m *= k;
    if ((size - 1) % 2 == 1) m = -m;
  }
  return m;
}

inline Integer mobius_from_discrete(const SetPartition& p) {
  Integer m = 1;
  for (int size : p.block_sizes()) {
    for (int k = 2; k < size; ++k) m *= k;
    if ((size - 1) % 2 == 1) m = -m;
  }
  return m;
}

inline bool refines(const SetPartition& pi, const SetPartition& sigma) {
  if (pi.ground_size() != sigma.ground_size()) throw ContractError("refines: ground sets differ");
  std::vector<int> image(pi.block_count(), -1);
  for (int i = 0; i < pi.ground_size(); ++i) {
    int& img = image[pi.block_of(i)];
    if (img == -1) img = sigma.block_of(i);
    else if (img != sigma.block_of(i)) return false;
  }
  return true;
}

namespace detail {

inline void pairings_rec(std::vector<int>& labels, int next_label, std::vector<SetPartition>& out) {
  auto it = std::find(labels.begin(), labels.end(), -1);
  if (it == labels.end()) {
    out.emplace_back(labels);
    return;
  }
  int first = static_cast<int>(it - labels.begin());
  labels[first] = next_label;
  for (std::size_t j = first + 1; j < labels.size(); ++j) {
    if (labels[j] != -1) continue;
    labels[j] = next_label;
    pairings_rec(labels, next_label + 1, out);
    labels[j] = -1;
  }
  labels[first] = -1;
}

// All noncrossing partitions of the interval [lo, hi), appended as label vectors
// restricted to that interval (labels local, renumbered later).
inline std::vector<std::vector<std::vector<int>>> nc_blocks(int lo, int hi) {
  std::vector<std::vector<std::vector<int>>> out;
  if (lo >= hi) {
    out.push_back({});
    return out;
  }
  // Choose the block of lo as lo = a0 < a1 < ... < ak; gaps and tail are independent.
  int len = hi - lo - 1;
  for (std::uint32_t mask = 0; mask < (1u << len); ++mask) {
    std::vector<int> block{lo};
    for (int b = 0; b < len; ++b)
      if (mask & (1u << b)) block.push_back(lo + 1 + b);
    std::vector<std::vector<std::vector<int>>> acc{{block}};
    std::vector<std::pair<int, int>> gaps;
    for (std::size_t k = 0; k + 1 < block.size(); ++k) gaps.push_back({block[k] + 1, block[k + 1]});
    gaps.push_back({block.back() + 1, hi});
    for (auto [a, b] : gaps) {
      if (a >= b) continue;
      auto parts = nc_blocks(a, b);
      std::vector<std::vector<std::vector<int>>> next;
      for (auto& base : acc)
        for (auto& p : parts) {
          auto merged = base;
          merged.insert(merged.end(), p.begin(), p.end());
          next.push_back(std::move(merged));
        }
      acc = std::move(next);
    }
    out.insert(out.end(), acc.begin(), acc.end());
  }
  return out;
}

}  // namespace detail

/// Pair partitions of {0..n-1}; empty for odd n.
inline std::vector<SetPartition> enumerate_pair_partitions(int n) {
  if (n < 0 || n > kPairPartitionGuard)
    throw GuardError("pair partition enumeration limited to n <= " + std::to_string(kPairPartitionGuard));
  std::vector<SetPartition> out;
  if (n % 2 == 1) return out;
  std::vector<int> labels(n, -1);
  detail::pairings_rec(labels, 0, out);
  return out;
}

inline std::vector<SetPartition> enumerate_noncrossing_partitions(int n) {
  if (n < 0 || n > kNoncrossingGuard)
    throw GuardError("noncrossing partition enumeration limited to n <= " + std::to_string(kNoncrossingGuard));
  std::vector<SetPartition> out;
  for (auto& blocks : detail::nc_blocks(0, n)) out.push_back(SetPartition::from_blocks(n, blocks));
  std::sort(out.begin(), out.end());
  return out;
}

inline bool is_noncrossing(const SetPartition& p) {
  int n = p.ground_size();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        for (int d = c + 1; d < n; ++d)
          if (p.block_of(a) == p.block_of(c) && p.block_of(b) == p.block_of(d) && p.block_of(a) != p.block_of(b))
            return false;
  return true;
}

}  // namespace traffic
