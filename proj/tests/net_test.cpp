#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "replab/net.hpp"
#include "replab/optimizer.hpp"
#include "replab/rng.hpp"

using namespace replab;

namespace {

QBatch random_batch(Rng& rng, int in_dim, int out_dim, int size) {
  QBatch b;
  for (int s = 0; s < size; ++s) {
    std::vector<double> st(in_dim);
    for (auto& v : st) v = rng.uniform(-1.5, 1.5);
    b.states.push_back(std::move(st));
    b.actions.push_back(rng.uniform_int(out_dim));
    b.targets.push_back(rng.uniform(-3.0, 3.0));
    b.weights.push_back(rng.uniform(0.05, 1.0));
  }
  return b;
}

// Oracle: central finite differences of batch_loss, h = 1e-5.
double fd_gradient(DenseNet& net, const QBatch& batch, LossKind kind, std::size_t i) {
  const double h = 1e-5;
  double keep = net.params()[i];
  net.params()[i] = keep + h;
  double up = batch_loss(net, batch, kind);
  net.params()[i] = keep - h;
  double down = batch_loss(net, batch, kind);
  net.params()[i] = keep;
  return (up - down) / (2.0 * h);
}

double rel_error(double a, double b) {
  double scale = std::max(std::fabs(a), std::fabs(b));
  if (scale < 1e-8) return 0.0;
  return std::fabs(a - b) / scale;
}

}  // namespace

TEST_CASE("huber loss values and derivative") {
  REQUIRE(huber_loss(0.5).value == 0.125);
  REQUIRE(huber_loss(-2.0).value == 2.0);
  REQUIRE(huber_loss(1.0).value == 0.5);
  REQUIRE(mse_loss(1.0).value == 0.5);  // branches agree at the boundary
  REQUIRE(huber_loss(1.0).deriv == 1.0);
  REQUIRE(huber_loss(-1.0).deriv == -1.0);
  REQUIRE(huber_loss(3.0).deriv == 1.0);
  REQUIRE(huber_loss(-0.25).deriv == -0.25);
}

TEST_CASE("huber derivative is continuous at the branch point") {
  // the boundary belongs to the quadratic branch (0.5 at delta = 1) and the
  // gradient is what training consumes: clamp(delta, -1, 1) has no jump
  for (double eps : {1e-9, 1e-7, 1e-5}) {
    REQUIRE(std::fabs(huber_loss(1.0 - eps).deriv - huber_loss(1.0 + eps).deriv) < 2 * eps + 1e-12);
    REQUIRE(std::fabs(huber_loss(-1.0 - eps).deriv - huber_loss(-1.0 + eps).deriv) <
            2 * eps + 1e-12);
  }
  REQUIRE(huber_loss(1.0).value == 0.5);
  REQUIRE(huber_loss(std::nextafter(1.0, 2.0)).value > 1.0 - 1e-12);
}

TEST_CASE("weighted batch loss examples") {
  {
    std::vector<double> w{1.0}, d{2.0};
    REQUIRE(weighted_batch_loss(w, d, LossKind::mse).value == 2.0);
  }
  {
    std::vector<double> w{0.5}, d{2.0};
    REQUIRE(weighted_batch_loss(w, d, LossKind::huber).value == 1.0);
  }
  {
    std::vector<double> w{0.0, 0.0, 0.0}, d{1.0, -2.0, 0.3};
    auto out = weighted_batch_loss(w, d, LossKind::mse);
    REQUIRE(out.value == 0.0);
    for (double g : out.d_delta) REQUIRE(g == 0.0);
  }
  std::vector<double> w{1.0, 1.0}, d{1.0};
  REQUIRE_THROWS_AS(weighted_batch_loss(w, d, LossKind::mse), std::invalid_argument);
}

TEST_CASE("weighted batch loss is linear in the weights and order-free") {
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 1 + std::size_t(rng.uniform_int(8));
    std::vector<double> w(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = rng.uniform(0.0, 1.0);
      d[i] = rng.uniform(-3.0, 3.0);
    }
    LossKind kind = trial % 2 ? LossKind::huber : LossKind::mse;
    auto base = weighted_batch_loss(w, d, kind);

    std::vector<double> w2(w);
    for (auto& v : w2) v *= 2.0;
    auto doubled = weighted_batch_loss(w2, d, kind);
    REQUIRE_THAT(doubled.value, Catch::Matchers::WithinRel(2.0 * base.value, 1e-12));

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i-- > 1;)
      std::swap(perm[i], perm[std::size_t(rng.uniform_int(int(i + 1)))]);
    std::vector<double> wp(n), dp(n);
    for (std::size_t i = 0; i < n; ++i) {
      wp[i] = w[perm[i]];
      dp[i] = d[perm[i]];
    }
    auto permuted = weighted_batch_loss(wp, dp, kind);
    REQUIRE_THAT(permuted.value, Catch::Matchers::WithinAbs(base.value, 1e-12));
  }
}

TEST_CASE("forward examples") {
  {
    DenseNet net({3, 2, 2}, 5);
    for (auto& p : net.params()) p = 0.0;
    std::vector<double> in{0.3, -0.4, 1.0};
    for (double v : net.forward(in)) REQUIRE(v == 0.0);
  }
  {
    // single linear layer wired to the identity
    DenseNet net({3, 3}, 5);
    for (auto& p : net.params()) p = 0.0;
    for (int i = 0; i < 3; ++i) net.params()[net.weight_offset(0) + std::size_t(i) * 3 + i] = 1.0;
    std::vector<double> in{0.25, -1.5, 2.0};
    auto out = net.forward(in);
    REQUIRE(out == in);
  }
  {
    DenseNet net({4, 8, 3}, 99);
    std::vector<double> in{0.1, 0.2, -0.3, 0.7};
    REQUIRE(net.forward(in) == net.forward(in));  // bit-identical reruns
    std::vector<double> bad{1.0};
    REQUIRE_THROWS_AS(net.forward(bad), std::invalid_argument);
  }
  REQUIRE_THROWS_AS(DenseNet({4}, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(DenseNet({4, 0, 2}, 1), std::invalid_argument);
}

TEST_CASE("backward on a perfect fit is zero") {
  Rng rng(72);
  DenseNet net({2, 4, 2}, 42);
  QBatch b;
  for (int s = 0; s < 3; ++s) {
    std::vector<double> st{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    auto q = net.forward(st);
    int a = rng.uniform_int(2);
    b.states.push_back(st);
    b.actions.push_back(a);
    b.targets.push_back(q[std::size_t(a)]);  // target equals output
    b.weights.push_back(1.0);
  }
  double loss = 1.0;
  auto g = backward(net, b, LossKind::mse, &loss);
  REQUIRE(loss == 0.0);
  for (double v : g) REQUIRE(v == 0.0);
}

TEST_CASE("backward matches central finite differences on a tiny net") {
  Rng rng(73);
  DenseNet net({1, 1}, 7);  // 2 parameters
  QBatch b = random_batch(rng, 1, 1, 4);
  auto g = backward(net, b, LossKind::mse);
  for (std::size_t i = 0; i < net.param_count(); ++i)
    REQUIRE(rel_error(g[i], fd_gradient(net, b, LossKind::mse, i)) <= 1e-4);
}

TEST_CASE("backward matches finite differences on random nets") {
  Rng rng(74);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<int> sizes{1 + rng.uniform_int(4), 1 + rng.uniform_int(6), 1 + rng.uniform_int(3)};
    DenseNet net(sizes, rng.next_u64());
    QBatch b = random_batch(rng, sizes.front(), sizes.back(), 1 + rng.uniform_int(6));
    LossKind kind = trial % 2 ? LossKind::huber : LossKind::mse;
    double loss = 0.0;
    auto g = backward(net, b, kind, &loss);
    REQUIRE_THAT(loss, Catch::Matchers::WithinAbs(batch_loss(net, b, kind), 1e-12));
    for (std::size_t i = 0; i < net.param_count(); ++i)
      REQUIRE(rel_error(g[i], fd_gradient(net, b, kind, i)) <= 1e-4);
  }
}

TEST_CASE("doubling the weights doubles the gradient") {
  Rng rng(75);
  DenseNet net({3, 5, 2}, 11);
  QBatch b = random_batch(rng, 3, 2, 6);
  auto g1 = backward(net, b, LossKind::huber);
  for (auto& w : b.weights) w *= 2.0;
  auto g2 = backward(net, b, LossKind::huber);
  for (std::size_t i = 0; i < g1.size(); ++i)
    REQUIRE_THAT(g2[i], Catch::Matchers::WithinAbs(2.0 * g1[i], 1e-12));
}

TEST_CASE("optimizer leaves parameters alone on zero gradient") {
  DenseNet net({2, 3, 2}, 13);
  auto before = net.params();
  AdamState opt(net.param_count(), 1e-3);
  std::vector<double> zeros(net.param_count(), 0.0);
  opt.step(net.params(), zeros);
  REQUIRE(net.params() == before);
}

TEST_CASE("optimizer moves against a constant gradient") {
  DenseNet net({1, 1}, 17);
  AdamState opt(net.param_count(), 1e-2);
  std::vector<double> g(net.param_count(), 0.5);
  double before = net.params()[0];
  for (int i = 0; i < 10; ++i) opt.step(net.params(), g);
  REQUIRE(net.params()[0] < before);

  std::vector<double> neg(net.param_count(), -0.5);
  double mid = net.params()[0];
  for (int i = 0; i < 30; ++i) opt.step(net.params(), neg);
  REQUIRE(net.params()[0] > mid);
}

TEST_CASE("one optimizer step matches the hand-computed update") {
  std::vector<double> params{0.5};
  AdamState opt(1, 0.1);
  std::vector<double> g{0.2};
  opt.step(params, g);
  // first step by hand: m = 0.1 g_hat after bias correction is g, v_hat g^2
  double m = (1.0 - 0.9) * 0.2;
  double v = (1.0 - 0.999) * 0.2 * 0.2;
  double m_hat = m / (1.0 - 0.9);
  double v_hat = v / (1.0 - 0.999);
  double expect = 0.5 - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8);
  REQUIRE_THAT(params[0], Catch::Matchers::WithinAbs(expect, 1e-15));
  REQUIRE(opt.timestep() == 1);
}

TEST_CASE("non-finite gradients abort") {
  std::vector<double> params{0.0, 1.0};
  AdamState opt(2, 1e-3);
  std::vector<double> g{0.1, std::numeric_limits<double>::quiet_NaN()};
  REQUIRE_THROWS_WITH(opt.step(params, g),
                      Catch::Matchers::ContainsSubstring("non-finite gradient"));
  std::vector<double> inf{std::numeric_limits<double>::infinity(), 0.0};
  REQUIRE_THROWS_AS(opt.step(params, inf), std::runtime_error);
}
