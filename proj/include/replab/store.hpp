#pragma once

#include <cassert>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "replab/sum_tree.hpp"
#include "replab/transition.hpp"

namespace replab {

/** Handle to a buffer slot as of a particular push; detects overwrites. */
struct SlotRef {
  std::size_t index = 0;
  std::uint64_t stamp = 0;
};

/**
 * Ring buffer of transitions with a sum-tree over transformed priorities.
 *
 * The priority transform (p^alpha, LAP clipping, ...) is injected by the
 * sampling policy so the store stays policy-agnostic: the Transition keeps
 * the raw p_i, the tree leaf holds transform(p_i). A max-tree over raw
 * priorities backs the max-priority rule for fresh pushes and a min-tree
 * over transformed priorities backs the importance-weight normalizer.
 */
class PrioritizedStore {
 public:
  using Transform = std::function<double(double)>;

  PrioritizedStore(std::size_t capacity, std::size_t obs_dim, Transform transform,
                   double priority_floor)
      : capacity_(capacity),
        obs_dim_(obs_dim),
        transform_(std::move(transform)),
        floor_(priority_floor),
        entries_(capacity),
        stamps_(capacity, 0),
        sum_(capacity),
        max_(capacity, 0.0),
        min_(capacity, std::numeric_limits<double>::infinity()) {
    if (capacity_ == 0) throw std::invalid_argument("store capacity must be positive");
    if (!(floor_ > 0.0)) throw std::invalid_argument("priority floor must be positive");
    if (!transform_) throw std::invalid_argument("store needs a priority transform");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  std::size_t obs_dim() const { return obs_dim_; }
  double priority_floor() const { return floor_; }

  /** New entries inherit the current max raw priority (1 when empty). */
  std::size_t push(Transition t) {
    check_dims(t);
    double p = count_ == 0 ? 1.0 : max_.best();
    return place(std::move(t), std::max(p, floor_));
  }

  /** Stored priority is max(p, floor); leaf and ancestors refresh with it. */
  void update_priority(std::size_t index, double p) {
    require_occupied(index);
    if (!(p >= 0.0)) throw std::invalid_argument("priority must be nonnegative");
    set_priority(index, std::max(p, floor_));
  }

  /** Stamped variant: rejects a slot that was overwritten since the ref. */
  void update_priority(const SlotRef& ref, double p) {
    require_occupied(ref.index);
    if (stamps_[ref.index] != ref.stamp)
      throw std::runtime_error("stale slot reference: slot " + std::to_string(ref.index) +
                               " was overwritten");
    update_priority(ref.index, p);
  }

  bool valid(const SlotRef& ref) const {
    return ref.index < capacity_ && occupied(ref.index) && stamps_[ref.index] == ref.stamp;
  }

  /**
   * Slot owning the cumulative transformed-priority interval at u * total,
   * u in [0,1). The floor keeps the total positive, so no zero division.
   */
  std::size_t sample_mass(double u) const {
    if (count_ == 0) throw std::logic_error("sample_mass on empty store");
    assert(u >= 0.0 && u < 1.0);
    assert(sum_.total() > 0.0);
    std::size_t i = sum_.find_prefix(u * sum_.total());
    return i < count_ ? i : count_ - 1;  // float edge at the last boundary
  }

  const Transition& transition(std::size_t index) const {
    require_occupied(index);
    return entries_[index];
  }

  double priority(std::size_t index) const {
    require_occupied(index);
    return entries_[index].priority;
  }

  std::uint64_t stamp(std::size_t index) const {
    require_occupied(index);
    return stamps_[index];
  }

  SlotRef ref(std::size_t index) const { return {index, stamp(index)}; }

  /** Transformed priority as stored in the tree leaf. */
  double mass(std::size_t index) const {
    require_occupied(index);
    return sum_.get(index);
  }

  double total_mass() const { return sum_.total(); }

  double probability(std::size_t index) const { return mass(index) / sum_.total(); }

  double min_probability() const {
    if (count_ == 0) throw std::logic_error("min_probability on empty store");
    return min_.best() / sum_.total();
  }

  double max_priority() const {
    if (count_ == 0) throw std::logic_error("max_priority on empty store");
    return max_.best();
  }

  std::uint64_t push_count() const { return pushes_; }
  std::uint64_t oldest_stamp() const { return pushes_ - count_; }

 private:
  bool occupied(std::size_t index) const { return index < count_; }

  void require_occupied(std::size_t index) const {
    if (index >= capacity_) throw std::out_of_range("slot index out of range");
    if (!occupied(index)) throw std::out_of_range("slot not occupied");
  }

  void check_dims(const Transition& t) const {
    if (t.state.size() != obs_dim_ || t.next_state.size() != obs_dim_)
      throw std::invalid_argument("transition dimension mismatch: expected state size " +
                                  std::to_string(obs_dim_));
  }

  std::size_t place(Transition t, double p) {
    std::size_t at = cursor_;
    t.priority = p;
    entries_[at] = std::move(t);
    stamps_[at] = pushes_;
    double m = transform_(p);
    assert(m > 0.0);
    sum_.set(at, m);
    max_.set(at, p);
    min_.set(at, m);
    cursor_ = (cursor_ + 1) % capacity_;
    if (count_ < capacity_) ++count_;
    ++pushes_;
    return at;
  }

  void set_priority(std::size_t index, double stored) {
    entries_[index].priority = stored;
    double m = transform_(stored);
    assert(m > 0.0);
    sum_.set(index, m);
    max_.set(index, stored);
    min_.set(index, m);
  }

  std::size_t capacity_;
  std::size_t obs_dim_;
  Transform transform_;
  double floor_;
  std::vector<Transition> entries_;
  std::vector<std::uint64_t> stamps_;
  PrefixSumTree sum_;
  MaxTree max_;
  MinTree min_;
  std::size_t count_ = 0;
  std::size_t cursor_ = 0;
  std::uint64_t pushes_ = 0;
};

/** Plain ring of transitions for the uniform sampling arm. No tree. */
class MirrorStore {
 public:
  MirrorStore(std::size_t capacity, std::size_t obs_dim)
      : capacity_(capacity), obs_dim_(obs_dim), entries_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("store capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  std::size_t obs_dim() const { return obs_dim_; }

  std::size_t push(Transition t) {
    if (t.state.size() != obs_dim_ || t.next_state.size() != obs_dim_)
      throw std::invalid_argument("transition dimension mismatch: expected state size " +
                                  std::to_string(obs_dim_));
    std::size_t at = cursor_;
    entries_[at] = std::move(t);
    cursor_ = (cursor_ + 1) % capacity_;
    if (count_ < capacity_) ++count_;
    return at;
  }

  /** floor(u * count) for u in [0,1): every stored slot equally likely. */
  std::size_t sample_uniform_index(double u) const {
    if (count_ == 0) throw std::logic_error("sample_uniform_index on empty store");
    assert(u >= 0.0 && u < 1.0);
    auto i = static_cast<std::size_t>(u * static_cast<double>(count_));
    return i < count_ ? i : count_ - 1;
  }

  const Transition& transition(std::size_t index) const {
    if (index >= count_) throw std::out_of_range("slot not occupied");
    return entries_[index];
  }

 private:
  std::size_t capacity_;
  std::size_t obs_dim_;
  std::vector<Transition> entries_;
  std::size_t count_ = 0;
  std::size_t cursor_ = 0;
};

/**
 * Main buffer D plus mirror buffer D*. Every push lands in both rings at the
 * same slot, so the two stores always hold the same multiset of transitions;
 * only the prioritized side carries evolving priorities.
 */
class StorePair {
 public:
  StorePair(std::size_t capacity, std::size_t obs_dim, PrioritizedStore::Transform transform,
            double priority_floor)
      : prioritized_(capacity, obs_dim, std::move(transform), priority_floor),
        mirror_(capacity, obs_dim) {}

  std::size_t push(Transition t) {
    mirror_.push(t);
    return prioritized_.push(std::move(t));
  }

  PrioritizedStore& prioritized() { return prioritized_; }
  const PrioritizedStore& prioritized() const { return prioritized_; }
  MirrorStore& mirror() { return mirror_; }
  const MirrorStore& mirror() const { return mirror_; }
  std::size_t size() const { return prioritized_.size(); }
  std::size_t capacity() const { return prioritized_.capacity(); }

 private:
  PrioritizedStore prioritized_;
  MirrorStore mirror_;
};

}  // namespace replab
