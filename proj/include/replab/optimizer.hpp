#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace replab {

/** Adaptive-moment optimizer with bias correction. */
class AdamState {
 public:
  AdamState(std::size_t n, double step_size, double beta1 = 0.9, double beta2 = 0.999,
            double eps = 1e-8)
      : step_size_(step_size), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {
    if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  }

  std::size_t param_count() const { return m_.size(); }
  std::int64_t timestep() const { return t_; }
  double step_size() const { return step_size_; }

  /** One update. Non-finite gradients abort the experiment. */
  void step(std::vector<double>& params, std::span<const double> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
      throw std::invalid_argument("optimizer state does not match parameter count");
    for (std::size_t i = 0; i < grads.size(); ++i)
      if (!std::isfinite(grads[i]))
        throw std::runtime_error("non-finite gradient at parameter " + std::to_string(i) +
                                 " on optimizer step " + std::to_string(t_ + 1));
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < grads.size(); ++i) {
      double g = grads[i];
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
      params[i] -= step_size_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
  }

 private:
  double step_size_;
  double beta1_;
  double beta2_;
  double eps_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t t_ = 0;
};

}  // namespace replab
