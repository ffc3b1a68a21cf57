#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "replab/rng.hpp"
#include "replab/store.hpp"

namespace replab {

enum class SamplingMode { uniform, per, lap };

/** alpha smooths priority extremes; epsilon keeps every P(i) positive. */
struct SamplingPolicy {
  SamplingMode mode = SamplingMode::per;
  double alpha = 0.6;
  double epsilon = 1e-4;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0,1]");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  }
};

/** per: p^alpha. lap: max(p^alpha, 1). uniform: 1. Monotone in p. */
inline double transform_priority(const SamplingPolicy& policy, double p) {
  switch (policy.mode) {
    case SamplingMode::uniform: return 1.0;
    case SamplingMode::per: return std::pow(p, policy.alpha);
    case SamplingMode::lap: return std::max(std::pow(p, policy.alpha), 1.0);
  }
  return 1.0;
}

/** Transform closure for injecting the policy into a PrioritizedStore. */
inline PrioritizedStore::Transform make_transform(SamplingPolicy policy) {
  policy.validate();
  return [policy](double p) { return transform_priority(policy, p); };
}

/**
 * A sampled batch. probabilities are P(i) over the whole store (they sum to
 * one across the store, not across the batch). weights start at 1 and are
 * overwritten by the importance-weighting stage; td_errors are filled after
 * the forward pass.
 */
struct Minibatch {
  std::vector<SlotRef> slots;
  std::vector<Transition> transitions;
  std::vector<double> probabilities;
  std::vector<double> weights;
  std::vector<double> td_errors;

  std::size_t size() const { return slots.size(); }
};

enum class Arm { PS, RUS };

/** Unnormalized w(i) = (1 / (N P(i)))^beta. */
inline double raw_weight(double probability, double beta, std::size_t n) {
  return std::pow(1.0 / (static_cast<double>(n) * probability), beta);
}

/**
 * Normalizes by the weight of the min-probability entry, i.e. the global
 * maximum over the whole store's weight set, so every result is in (0,1].
 */
inline std::vector<double> normalized_weights(std::span<const double> batch_probabilities,
                                              double min_probability, double beta,
                                              std::size_t n) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must be in [0,1]");
  double w_max = raw_weight(min_probability, beta, n);
  std::vector<double> out(batch_probabilities.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = raw_weight(batch_probabilities[i], beta, n) / w_max;
  return out;
}

/** Full probability vector over stored entries; strictly positive, sums to 1. */
inline std::vector<double> probability_of(const PrioritizedStore& store) {
  if (store.empty()) throw std::logic_error("probability_of on empty store");
  std::vector<double> p(store.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = store.probability(i);
  return p;
}

/** Normalized importance weights for the given indices of a full P vector. */
inline std::vector<double> importance_weights(std::span<const double> probabilities,
                                              std::span<const std::size_t> indices, double beta,
                                              std::size_t n) {
  double p_min = *std::min_element(probabilities.begin(), probabilities.end());
  std::vector<double> batch(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) batch[i] = probabilities[indices[i]];
  return normalized_weights(batch, p_min, beta, n);
}

/**
 * PS arm: stratified mass sampling, one draw from each of m equal
 * sub-intervals of [0,1). RUS arm: i.i.d. uniform slots from the mirror.
 * Duplicates are allowed in both arms.
 */
inline Minibatch draw_minibatch(StorePair& stores, std::size_t m, Arm arm, Rng& rng) {
  const auto& d = stores.prioritized();
  if (m == 0) throw std::invalid_argument("minibatch size must be positive");
  if (d.size() < m)
    throw std::runtime_error("warm-up not complete: store holds " + std::to_string(d.size()) +
                             " transitions, batch needs " + std::to_string(m));
  Minibatch b;
  b.slots.reserve(m);
  b.transitions.reserve(m);
  b.probabilities.reserve(m);
  if (arm == Arm::PS) {
    for (std::size_t k = 0; k < m; ++k) {
      double u = (static_cast<double>(k) + rng.uniform01()) / static_cast<double>(m);
      std::size_t idx = d.sample_mass(u);
      b.slots.push_back(d.ref(idx));
      b.transitions.push_back(d.transition(idx));
      b.probabilities.push_back(d.probability(idx));
    }
  } else {
    const auto& mir = stores.mirror();
    double inv = 1.0 / static_cast<double>(mir.size());
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t idx = mir.sample_uniform_index(rng.uniform01());
      b.slots.push_back(d.ref(idx));
      b.transitions.push_back(mir.transition(idx));
      b.probabilities.push_back(inv);
    }
  }
  b.weights.assign(m, 1.0);
  b.td_errors.assign(m, 0.0);
  return b;
}

}  // namespace replab
