#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <vector>

namespace replab {

inline std::size_t ceil_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/**
 * Flat complete binary tree of partial sums over nonnegative leaf weights.
 *
 * Capacity is rounded up to a power of two P; the tree is one array of
 * 2*P-1 slots with the root at 0 and leaves at [P-1, 2P-2]. Padding leaves
 * hold 0 and stay unreachable from find_prefix while the total is positive.
 */
class PrefixSumTree {
 public:
  explicit PrefixSumTree(std::size_t capacity)
      : leaves_(ceil_pow2(std::max<std::size_t>(capacity, 1))),
        nodes_(2 * leaves_ - 1, 0.0) {}

  std::size_t leaf_count() const { return leaves_; }

  double get(std::size_t i) const {
    assert(i < leaves_);
    return nodes_[leaves_ - 1 + i];
  }

  double total() const { return nodes_[0]; }

  /** Set leaf i and refresh its ancestors. O(log N). */
  void set(std::size_t i, double v) {
    assert(i < leaves_);
    std::size_t n = leaves_ - 1 + i;
    nodes_[n] = v;
    while (n > 0) {
      n = (n - 1) / 2;
      nodes_[n] = nodes_[2 * n + 1] + nodes_[2 * n + 2];
    }
  }

  /**
   * Leaf whose cumulative-weight interval contains mass.
   * pre: 0 <= mass < total(). O(log N).
   */
  std::size_t find_prefix(double mass) const {
    std::size_t n = 0;
    while (n < leaves_ - 1) {
      std::size_t left = 2 * n + 1;
      if (mass < nodes_[left]) {
        n = left;
      } else {
        mass -= nodes_[left];
        n = left + 1;
      }
    }
    return n - (leaves_ - 1);
  }

 private:
  std::size_t leaves_;
  std::vector<double> nodes_;
};

/** Same layout as PrefixSumTree, maintaining an extremum instead of a sum. */
template <class Combine>
class ExtremaTree {
 public:
  ExtremaTree(std::size_t capacity, double neutral)
      : leaves_(ceil_pow2(std::max<std::size_t>(capacity, 1))),
        nodes_(2 * leaves_ - 1, neutral) {}

  double get(std::size_t i) const {
    assert(i < leaves_);
    return nodes_[leaves_ - 1 + i];
  }

  /** Extremum over all leaves (neutral when none was ever set). O(1). */
  double best() const { return nodes_[0]; }

  void set(std::size_t i, double v) {
    assert(i < leaves_);
    std::size_t n = leaves_ - 1 + i;
    nodes_[n] = v;
    while (n > 0) {
      n = (n - 1) / 2;
      nodes_[n] = Combine{}(nodes_[2 * n + 1], nodes_[2 * n + 2]);
    }
  }

 private:
  std::size_t leaves_;
  std::vector<double> nodes_;
};

struct MaxOf {
  double operator()(double a, double b) const { return a > b ? a : b; }
};
struct MinOf {
  double operator()(double a, double b) const { return a < b ? a : b; }
};

using MaxTree = ExtremaTree<MaxOf>;
using MinTree = ExtremaTree<MinOf>;

}  // namespace replab
