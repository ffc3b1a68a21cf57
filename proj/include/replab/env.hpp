#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "replab/rng.hpp"

namespace replab {

struct StepResult {
  std::vector<double> state;
  double reward = 0.0;
  bool terminal = false;
  bool truncated = false;  // step limit rather than a failure state
};

class Env {
 public:
  virtual ~Env() = default;
  virtual std::size_t obs_dim() const = 0;
  virtual int action_count() const = 0;
  virtual std::vector<double> reset(Rng& rng) = 0;
  virtual StepResult step(int action) = 0;
};

/**
 * Cart-pole balancing, integrated with explicit Euler at dt = 0.02 s.
 *
 * Constants (standard published formulation):
 *   gravity 9.8         cart mass 1.0       pole mass 0.1
 *   pole half-length 0.5  force magnitude 10  position limit +-2.4
 *   angle limit +-12 deg  episode cap 200 steps, reward +1 per step
 *
 * Reset draws each state component uniformly from [-0.05, 0.05).
 */
class CartPoleEnv final : public Env {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kForce = 10.0;
  static constexpr double kDt = 0.02;
  static constexpr double kPositionLimit = 2.4;
  static constexpr double kAngleLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  static constexpr int kMaxSteps = 200;

  std::size_t obs_dim() const override { return 4; }
  int action_count() const override { return 2; }

  std::vector<double> reset(Rng& rng) override {
    for (auto& v : s_) v = rng.uniform(-0.05, 0.05);
    steps_ = 0;
    done_ = false;
    return {s_.begin(), s_.end()};
  }

  StepResult step(int action) override {
    if (done_) throw std::logic_error("step on a finished episode");
    if (action < 0 || action > 1) throw std::invalid_argument("cart-pole action must be 0 or 1");
    const double total_mass = kCartMass + kPoleMass;
    const double pml = kPoleMass * kHalfLength;
    double x = s_[0], x_dot = s_[1], theta = s_[2], theta_dot = s_[3];
    double force = action == 1 ? kForce : -kForce;
    double cos_t = std::cos(theta), sin_t = std::sin(theta);
    double temp = (force + pml * theta_dot * theta_dot * sin_t) / total_mass;
    double theta_acc = (kGravity * sin_t - cos_t * temp) /
                       (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total_mass));
    double x_acc = temp - pml * theta_acc * cos_t / total_mass;
    s_[0] = x + kDt * x_dot;
    s_[1] = x_dot + kDt * x_acc;
    s_[2] = theta + kDt * theta_dot;
    s_[3] = theta_dot + kDt * theta_acc;
    ++steps_;

    StepResult r;
    r.state = {s_.begin(), s_.end()};
    r.reward = 1.0;
    bool fell = s_[0] < -kPositionLimit || s_[0] > kPositionLimit || s_[2] < -kAngleLimit ||
                s_[2] > kAngleLimit;
    r.truncated = !fell && steps_ >= kMaxSteps;
    r.terminal = fell || r.truncated;
    done_ = r.terminal;
    return r;
  }

 private:
  std::array<double, 4> s_{};
  int steps_ = 0;
  bool done_ = true;
};

/**
 * Sparse-reward corridor: positions 0..length-1 observed one-hot, start in
 * the middle. Walking off the right end pays 1 and ends the episode; walking
 * off the left end ends it with nothing; interiors pay 0. Episodes cap at
 * 4 * length steps.
 */
class SparseChainEnv final : public Env {
 public:
  explicit SparseChainEnv(int length) : length_(length) {
    if (length < 2) throw std::invalid_argument("chain length must be at least 2");
  }

  std::size_t obs_dim() const override { return static_cast<std::size_t>(length_); }
  int action_count() const override { return 2; }

  std::vector<double> reset(Rng&) override {
    pos_ = length_ / 2;
    steps_ = 0;
    done_ = false;
    return one_hot(pos_);
  }

  StepResult step(int action) override {
    if (done_) throw std::logic_error("step on a finished episode");
    if (action < 0 || action > 1) throw std::invalid_argument("chain action must be 0 or 1");
    int np = pos_ + (action == 1 ? 1 : -1);
    ++steps_;
    StepResult r;
    if (np >= length_) {
      r.reward = 1.0;
      r.terminal = true;
      np = length_ - 1;
    } else if (np < 0) {
      r.terminal = true;
      np = 0;
    } else {
      pos_ = np;
      r.truncated = steps_ >= 4 * length_;
      r.terminal = r.truncated;
    }
    r.state = one_hot(np);
    done_ = r.terminal;
    return r;
  }

 private:
  std::vector<double> one_hot(int pos) const {
    std::vector<double> v(static_cast<std::size_t>(length_), 0.0);
    v[static_cast<std::size_t>(pos)] = 1.0;
    return v;
  }

  int length_;
  int pos_ = 0;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace replab
