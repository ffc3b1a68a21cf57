#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "replab/rng.hpp"

namespace replab {

enum class LossKind { mse, huber };

struct LossTerm {
  double value;
  double deriv;
};

/** 0.5 d^2 for |d| <= 1, |d| otherwise; both branches meet at 0.5, slope 1. */
inline LossTerm huber_loss(double delta) {
  double ad = std::fabs(delta);
  if (ad <= 1.0) return {0.5 * delta * delta, delta};
  return {ad, delta > 0.0 ? 1.0 : -1.0};
}

/** 0.5 d^2, so the quadratic region coincides with the huber branch. */
inline LossTerm mse_loss(double delta) { return {0.5 * delta * delta, delta}; }

inline LossTerm loss_term(LossKind kind, double delta) {
  return kind == LossKind::huber ? huber_loss(delta) : mse_loss(delta);
}

struct BatchLoss {
  double value = 0.0;
  std::vector<double> d_delta;
};

/** Mean over the batch of w(i) * L(delta(i)), with the gradient per delta. */
inline BatchLoss weighted_batch_loss(std::span<const double> weights,
                                     std::span<const double> deltas, LossKind kind) {
  if (weights.size() != deltas.size())
    throw std::invalid_argument("weighted_batch_loss: length mismatch");
  BatchLoss out;
  out.d_delta.resize(deltas.size());
  if (deltas.empty()) return out;
  const double inv_m = 1.0 / static_cast<double>(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    LossTerm lt = loss_term(kind, deltas[i]);
    out.value += weights[i] * lt.value * inv_m;
    out.d_delta[i] = weights[i] * lt.deriv * inv_m;
  }
  return out;
}

/**
 * Dense network with rectified hidden layers and identity output, all
 * parameters in one flat vector (per layer: weights row-major, then biases).
 * Initialization is uniform in +-1/sqrt(fan_in), drawn from the given seed.
 */
class DenseNet {
 public:
  DenseNet(std::vector<int> sizes, std::uint64_t init_seed) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2)
      throw std::invalid_argument("net needs at least input and output layers");
    for (int s : sizes_)
      if (s < 1) throw std::invalid_argument("layer sizes must be positive");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      w_off_.push_back(total);
      total += static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l];
      b_off_.push_back(total);
      total += static_cast<std::size_t>(sizes_[l + 1]);
    }
    params_.resize(total);
    Rng rng(init_seed);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
      std::size_t end = l + 2 < sizes_.size() ? w_off_[l + 1] : total;
      for (std::size_t i = w_off_[l]; i < end; ++i) params_[i] = rng.uniform(-bound, bound);
    }
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t layer_count() const { return sizes_.size() - 1; }
  std::size_t param_count() const { return params_.size(); }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::size_t weight_offset(std::size_t layer) const { return w_off_[layer]; }
  std::size_t bias_offset(std::size_t layer) const { return b_off_[layer]; }
  const double* weight_data(std::size_t layer) const { return params_.data() + w_off_[layer]; }
  const double* bias_data(std::size_t layer) const { return params_.data() + b_off_[layer]; }

  std::vector<double> forward(std::span<const double> input) const {
    if (input.size() != static_cast<std::size_t>(sizes_.front()))
      throw std::invalid_argument("forward: input dimension mismatch");
    std::vector<double> cur(input.begin(), input.end());
    std::vector<double> next;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const int in = sizes_[l], out = sizes_[l + 1];
      const bool hidden = l + 2 < sizes_.size();
      next.assign(static_cast<std::size_t>(out), 0.0);
      const double* w = weight_data(l);
      const double* b = bias_data(l);
      for (int j = 0; j < out; ++j) {
        double z = b[j];
        const double* wr = w + static_cast<std::size_t>(j) * in;
        for (int i = 0; i < in; ++i) z += wr[i] * cur[static_cast<std::size_t>(i)];
        next[static_cast<std::size_t>(j)] = hidden && z < 0.0 ? 0.0 : z;
      }
      cur.swap(next);
    }
    return cur;
  }

 private:
  std::vector<int> sizes_;
  std::vector<double> params_;
  std::vector<std::size_t> w_off_;
  std::vector<std::size_t> b_off_;
};

/** One regression target per sample: pull Q(state, action) toward target. */
struct QBatch {
  std::vector<std::vector<double>> states;
  std::vector<int> actions;
  std::vector<double> targets;
  std::vector<double> weights;

  std::size_t size() const { return states.size(); }

  void clear() {
    states.clear();
    actions.clear();
    targets.clear();
    weights.clear();
  }

  void validate(const DenseNet& net) const {
    if (actions.size() != states.size() || targets.size() != states.size() ||
        weights.size() != states.size())
      throw std::invalid_argument("QBatch: field length mismatch");
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i].size() != static_cast<std::size_t>(net.input_dim()))
        throw std::invalid_argument("QBatch: state dimension mismatch");
      if (actions[i] < 0 || actions[i] >= net.output_dim())
        throw std::invalid_argument("QBatch: action out of range");
    }
  }
};

/** Weighted batch loss evaluated by plain forward passes. */
inline double batch_loss(const DenseNet& net, const QBatch& batch, LossKind kind) {
  batch.validate(net);
  if (batch.size() == 0) return 0.0;
  const double inv_m = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    auto q = net.forward(batch.states[s]);
    double delta = batch.targets[s] - q[static_cast<std::size_t>(batch.actions[s])];
    loss += batch.weights[s] * loss_term(kind, delta).value * inv_m;
  }
  return loss;
}

/**
 * Exact reverse-mode gradient of batch_loss with respect to every parameter.
 * The rectifier derivative at 0 is 0.
 */
inline std::vector<double> backward(const DenseNet& net, const QBatch& batch, LossKind kind,
                                    double* loss_out = nullptr) {
  batch.validate(net);
  const auto& sizes = net.sizes();
  const std::size_t layers = net.layer_count();
  std::vector<double> grads(net.param_count(), 0.0);
  if (batch.size() == 0) {
    if (loss_out) *loss_out = 0.0;
    return grads;
  }
  const double inv_m = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;

  std::vector<std::vector<double>> act(layers + 1);
  std::vector<std::vector<double>> grad_out(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    act[l + 1].resize(static_cast<std::size_t>(sizes[l + 1]));
    grad_out[l].resize(static_cast<std::size_t>(sizes[l + 1]));
  }

  for (std::size_t s = 0; s < batch.size(); ++s) {
    act[0].assign(batch.states[s].begin(), batch.states[s].end());
    for (std::size_t l = 0; l < layers; ++l) {
      const int in = sizes[l], out = sizes[l + 1];
      const bool hidden = l + 1 < layers;
      const double* w = net.weight_data(l);
      const double* b = net.bias_data(l);
      for (int j = 0; j < out; ++j) {
        double z = b[j];
        const double* wr = w + static_cast<std::size_t>(j) * in;
        for (int i = 0; i < in; ++i) z += wr[i] * act[l][static_cast<std::size_t>(i)];
        act[l + 1][static_cast<std::size_t>(j)] = hidden && z < 0.0 ? 0.0 : z;
      }
    }

    const auto a = static_cast<std::size_t>(batch.actions[s]);
    double delta = batch.targets[s] - act[layers][a];
    LossTerm lt = loss_term(kind, delta);
    loss += batch.weights[s] * lt.value * inv_m;
    std::fill(grad_out[layers - 1].begin(), grad_out[layers - 1].end(), 0.0);
    grad_out[layers - 1][a] = -batch.weights[s] * lt.deriv * inv_m;

    for (std::size_t l = layers; l-- > 0;) {
      const int in = sizes[l], out = sizes[l + 1];
      double* gw = grads.data() + net.weight_offset(l);
      double* gb = grads.data() + net.bias_offset(l);
      for (int j = 0; j < out; ++j) {
        double gj = grad_out[l][static_cast<std::size_t>(j)];
        if (gj == 0.0) continue;
        gb[j] += gj;
        double* gwr = gw + static_cast<std::size_t>(j) * in;
        for (int i = 0; i < in; ++i) gwr[i] += gj * act[l][static_cast<std::size_t>(i)];
      }
      if (l > 0) {
        const double* w = net.weight_data(l);
        for (int i = 0; i < in; ++i) {
          if (act[l][static_cast<std::size_t>(i)] <= 0.0) {
            grad_out[l - 1][static_cast<std::size_t>(i)] = 0.0;
            continue;
          }
          double acc = 0.0;
          for (int j = 0; j < out; ++j)
            acc += w[static_cast<std::size_t>(j) * in + i] * grad_out[l][static_cast<std::size_t>(j)];
          grad_out[l - 1][static_cast<std::size_t>(i)] = acc;
        }
      }
    }
  }
  if (loss_out) *loss_out = loss;
  return grads;
}

}  // namespace replab
