#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "replab/sampling.hpp"
#include "replab/store.hpp"

namespace replab {

/**
 * Largest W with rho^W >= 0.01, i.e. floor(ln 0.01 / ln rho): the number of
 * decay steps before the growth drops below 1% of the goal priority. The
 * power test repairs the float ratio at exact-boundary values of rho.
 */
inline int compute_window(double rho) {
  if (rho == 0.0) return 0;
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must be in [0,1)");
  int w = static_cast<int>(std::floor(std::log(0.01) / std::log(rho)));
  while (std::pow(rho, w + 1) >= 0.01) ++w;
  while (w > 0 && std::pow(rho, w) < 0.01) --w;
  return w;
}

/** Decay coefficient with its linear schedule and the matching window. */
struct EncouragementState {
  double rho0;
  double rho;
  int window;
  int episode = 0;
  int total_episodes;

  EncouragementState(double rho0_in, int total_episodes_in)
      : rho0(rho0_in), rho(rho0_in), window(0), total_episodes(total_episodes_in) {
    if (!(rho0 > 0.0 && rho0 < 1.0)) throw std::invalid_argument("rho0 must be in (0,1)");
    if (total_episodes < 1) throw std::invalid_argument("total episodes must be positive");
    window = compute_window(rho);
  }

  /** rho = rho0 * (1 - e/e_total); episodes past the end clamp to 0. */
  double decay(int e) {
    if (e < 0) throw std::invalid_argument("episode must be nonnegative");
    episode = e;
    rho = e >= total_episodes
              ? 0.0
              : rho0 * (1.0 - static_cast<double>(e) / static_cast<double>(total_episodes));
    window = compute_window(rho);
    return rho;
  }
};

/**
 * Goal positions: every batch position except the one holding the minimum
 * priority; ties exclude the earliest minimum. A single-element batch has no
 * goals.
 */
inline std::vector<std::size_t> goal_positions(const Minibatch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("goal selection on empty minibatch");
  if (batch.size() == 1) return {};
  std::size_t skip = 0;
  for (std::size_t i = 1; i < batch.size(); ++i)
    if (batch.transitions[i].priority < batch.transitions[skip].priority) skip = i;
  std::vector<std::size_t> out;
  out.reserve(batch.size() - 1);
  for (std::size_t i = 0; i < batch.size(); ++i)
    if (i != skip) out.push_back(i);
  return out;
}

inline std::vector<SlotRef> select_goals(const Minibatch& batch) {
  std::vector<SlotRef> out;
  for (std::size_t pos : goal_positions(batch)) out.push_back(batch.slots[pos]);
  return out;
}

/** The earliest maximum-priority batch position (single-goal selector). */
inline std::size_t max_priority_position(const Minibatch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("goal selection on empty minibatch");
  std::size_t best = 0;
  for (std::size_t i = 1; i < batch.size(); ++i)
    if (batch.transitions[i].priority > batch.transitions[best].priority) best = i;
  return best;
}

/**
 * Grants decaying priority growth to the transitions preceding the goal in
 * insertion order: p <- min(p + p_n rho^i, cap) for i = 1..window, never
 * decreasing an existing priority. Propagation stops at the oldest live
 * entry and never crosses an episode boundary. cap is the growth ceiling:
 * the goal's own priority, or the store-wide max for the single-goal
 * variant. Returns the number of slots whose priority changed.
 */
inline std::size_t encourage(PrioritizedStore& store, const SlotRef& goal, double rho, int window,
                             double cap) {
  if (!store.valid(goal)) {
    std::fprintf(stderr, "replab: encourage skipped stale goal slot %zu\n", goal.index);
    return 0;
  }
  if (window <= 0 || rho <= 0.0) return 0;
  const double p_n = store.priority(goal.index);
  const int goal_episode = store.transition(goal.index).episode;
  const std::uint64_t oldest = store.oldest_stamp();
  std::size_t changed = 0;
  for (int i = 1; i <= window; ++i) {
    if (goal.stamp < oldest + static_cast<std::uint64_t>(i)) break;
    std::size_t idx = (goal.index + store.capacity() - static_cast<std::size_t>(i)) %
                      store.capacity();
    const Transition& tr = store.transition(idx);
    if (tr.episode != goal_episode) break;
    double grown = std::min(tr.priority + p_n * std::pow(rho, i), cap);
    if (grown > tr.priority) {
      store.update_priority(idx, grown);
      ++changed;
    }
  }
  return changed;
}

}  // namespace replab
