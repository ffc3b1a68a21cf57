#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "replab/rng.hpp"
#include "replab/sampling.hpp"

namespace replab {

/** Tiny row-major matrix; enough for the projection arithmetic here. */
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

/**
 * Shared projection for both scoring arms. w_q is drawn once per experiment
 * and never trained; shuffle_seed is the base for per-call permutations.
 */
struct AttentionParams {
  Mat w_q;  // input_dim x d_k
  std::size_t d_k = 16;
  std::uint64_t shuffle_seed = 0;
};

inline AttentionParams make_attention_params(std::size_t input_dim, std::size_t d_k,
                                             std::uint64_t weight_seed,
                                             std::uint64_t shuffle_seed) {
  if (input_dim == 0 || d_k == 0)
    throw std::invalid_argument("attention dimensions must be positive");
  AttentionParams p;
  p.d_k = d_k;
  p.shuffle_seed = shuffle_seed;
  p.w_q = Mat(input_dim, d_k);
  Rng rng(weight_seed);
  double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (auto& v : p.w_q.a) v = rng.uniform(-bound, bound);
  return p;
}

/**
 * Sum over rows of the projection of q_i onto k_i: sum_i (q_i . k_i)/|k_i|.
 * Zero-norm k rows contribute 0.
 */
inline double projection_score(const Mat& q, const Mat& k) {
  if (q.rows != k.rows || q.cols != k.cols)
    throw std::invalid_argument("projection_score: shape mismatch");
  double score = 0.0;
  for (std::size_t r = 0; r < q.rows; ++r) {
    double dot = 0.0, nk = 0.0;
    for (std::size_t c = 0; c < q.cols; ++c) {
      dot += q.at(r, c) * k.at(r, c);
      nk += k.at(r, c) * k.at(r, c);
    }
    if (nk > 0.0) score += dot / std::sqrt(nk);
  }
  return score;
}

/** Fisher-Yates permutation of 0..n-1, deterministic in the seed. */
inline std::vector<std::size_t> shuffle_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i-- > 1;)
    std::swap(perm[i], perm[rng.uniform_int(static_cast<int>(i + 1))]);
  return perm;
}

/** Feature rows are [state..., action]. */
inline Mat batch_features(std::span<const Transition> batch) {
  if (batch.empty()) return {};
  const std::size_t sdim = batch[0].state.size();
  Mat x(batch.size(), sdim + 1);
  for (std::size_t r = 0; r < batch.size(); ++r) {
    for (std::size_t c = 0; c < sdim; ++c) x.at(r, c) = batch[r].state[c];
    x.at(r, sdim) = static_cast<double>(batch[r].action);
  }
  return x;
}

inline Mat project(const Mat& x, const Mat& w) {
  if (x.cols != w.rows) throw std::invalid_argument("project: shape mismatch");
  Mat q(x.rows, w.cols);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < w.cols; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols; ++k) s += x.at(r, k) * w.at(k, c);
      q.at(r, c) = s;
    }
  return q;
}

/**
 * Raw self-similarity of a batch: Q = X w_q, K = perm(Q), and the projection
 * score scaled by 1/sqrt(d_k). The score depends only on the multiset of
 * (q_i, k_i) pairs. Needs at least two rows; a shuffle of one is degenerate.
 */
inline double batch_similarity(const Mat& x, const AttentionParams& params,
                               const std::vector<std::size_t>& perm) {
  if (x.rows < 2) throw std::invalid_argument("batch_similarity needs at least two rows");
  if (x.cols != params.w_q.rows)
    throw std::invalid_argument("batch_similarity: feature width does not match w_q");
  if (perm.size() != x.rows)
    throw std::invalid_argument("batch_similarity: permutation size mismatch");
  Mat q = project(x, params.w_q);
  Mat k(q.rows, q.cols);
  for (std::size_t r = 0; r < q.rows; ++r)
    for (std::size_t c = 0; c < q.cols; ++c) k.at(r, c) = q.at(perm[r], c);
  return projection_score(q, k) / std::sqrt(static_cast<double>(params.d_k));
}

/** Same with a fresh permutation derived from (shuffle_seed, salt). */
inline double batch_similarity(const Mat& x, const AttentionParams& params, std::uint64_t salt) {
  return batch_similarity(x, params,
                          shuffle_permutation(x.rows, mix_seed(params.shuffle_seed, salt)));
}

struct ParallelScore {
  double raw_ps = 0.0;
  double raw_rus = 0.0;
  double delta = 0.0;  // raw_ps - raw_rus; may be negative
};

/**
 * Two identical scoring arms over the two sampling arms. Equal salts give
 * equal permutations, so identical inputs score a delta of exactly zero.
 */
inline ParallelScore parallel_similarity(const Minibatch& ps, const Minibatch& rus,
                                         const AttentionParams& params, std::uint64_t salt_ps,
                                         std::uint64_t salt_rus) {
  if (ps.size() != rus.size())
    throw std::invalid_argument("parallel_similarity: batch sizes differ");
  ParallelScore s;
  s.raw_ps = batch_similarity(batch_features(ps.transitions), params, salt_ps);
  s.raw_rus = batch_similarity(batch_features(rus.transitions), params, salt_rus);
  s.delta = s.raw_ps - s.raw_rus;
  return s;
}

struct SimilarityReport {
  double raw_ps = 0.0;
  double raw_rus = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  double running_lo = 0.0;
  double running_hi = 0.0;
};

/**
 * Min-max normalization of the similarity increment onto [beta0, 1]. The
 * running extrema persist for the whole experiment; negative increments
 * clamp to beta0 and are counted rather than trusted.
 */
class BetaFitter {
 public:
  explicit BetaFitter(double beta0) : beta0_(beta0) {
    if (!(beta0 >= 0.0 && beta0 < 1.0)) throw std::invalid_argument("beta0 must be in [0,1)");
  }

  double update(double delta) {
    lo_ = std::min(lo_, delta);
    hi_ = std::max(hi_, delta);
    if (delta < 0.0) ++negatives_;
    double norm = hi_ > lo_ ? (delta - lo_) / (hi_ - lo_) : 0.0;
    norm = std::clamp(norm, 0.0, 1.0);
    return beta0_ + (1.0 - beta0_) * norm;
  }

  SimilarityReport report(const ParallelScore& s) {
    double beta = update(s.delta);
    return {s.raw_ps, s.raw_rus, s.delta, beta, lo_, hi_};
  }

  double beta0() const { return beta0_; }
  double running_lo() const { return lo_; }
  double running_hi() const { return hi_; }
  long negative_count() const { return negatives_; }

 private:
  double beta0_;
  double lo_ = std::numeric_limits<double>::infinity();
  double hi_ = -std::numeric_limits<double>::infinity();
  long negatives_ = 0;
};

}  // namespace replab
