#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "replab/replab.hpp"

namespace replab {

namespace selftest_detail {

inline Transition make_transition(Rng& rng, std::size_t obs_dim, int episode = 0) {
  Transition t;
  t.state.resize(obs_dim);
  t.next_state.resize(obs_dim);
  for (auto& v : t.state) v = rng.uniform(-1.0, 1.0);
  for (auto& v : t.next_state) v = rng.uniform(-1.0, 1.0);
  t.action = rng.uniform_int(2);
  t.reward = rng.uniform(-1.0, 1.0);
  t.episode = episode;
  return t;
}

}  // namespace selftest_detail

/**
 * Fast property battery behind the CLI selftest subcommand: sum-tree
 * consistency, sampler-vs-prefix-scan agreement, the unbiasedness identity,
 * gradient checks, encouragement-oracle equality, schedule values and
 * train-loop determinism. Prints one line per check.
 */
inline bool selftest() {
  using selftest_detail::make_transition;
  bool all_ok = true;
  auto check = [&](const char* name, bool ok) {
    std::printf("%s  %s\n", ok ? "ok  " : "FAIL", name);
    if (!ok) all_ok = false;
  };

  {  // sum-tree root vs direct summation over random operations
    Rng rng(11);
    PrefixSumTree tree(37);
    std::vector<double> leaves(37, 0.0);
    for (int i = 0; i < 10000; ++i) {
      std::size_t at = static_cast<std::size_t>(rng.uniform_int(37));
      double v = rng.uniform(0.0, 5.0);
      tree.set(at, v);
      leaves[at] = v;
    }
    double direct = 0.0;
    for (double v : leaves) direct += v;
    check("sum-tree root matches direct leaf sum", std::fabs(tree.total() - direct) < 1e-6);
  }

  {  // prefix descent vs linear scan
    Rng rng(12);
    PrefixSumTree tree(16);
    std::vector<double> leaves(16);
    for (std::size_t i = 0; i < 16; ++i) {
      leaves[i] = rng.uniform(0.01, 3.0);
      tree.set(i, leaves[i]);
    }
    bool ok = true;
    for (int trial = 0; trial < 2000; ++trial) {
      double mass = rng.uniform01() * tree.total();
      std::size_t got = tree.find_prefix(mass);
      std::size_t want = 0;
      double acc = 0.0;
      for (std::size_t i = 0; i < 16; ++i) {
        acc += leaves[i];
        if (mass < acc) {
          want = i;
          break;
        }
      }
      ok &= got == want;
    }
    check("prefix descent agrees with linear scan", ok);
  }

  {  // P(i) * w(i) == 1/N at beta = 1
    Rng rng(13);
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
      std::size_t n = 4 + static_cast<std::size_t>(rng.uniform_int(30));
      SamplingPolicy policy{SamplingMode::per, 0.6, 1e-4};
      PrioritizedStore store(n, 2, make_transform(policy), 1e-4);
      for (std::size_t i = 0; i < n; ++i) {
        store.push(make_transition(rng, 2));
        store.update_priority(i, rng.uniform(0.0, 4.0));
      }
      for (double p : probability_of(store)) {
        double product = p * raw_weight(p, 1.0, n);
        ok &= std::fabs(product * static_cast<double>(n) - 1.0) <= 1e-12;
      }
    }
    check("unbiasedness identity P(i)w(i) = 1/N at beta=1", ok);
  }

  {  // analytic gradients vs central finite differences
    Rng rng(14);
    bool ok = true;
    for (int trial = 0; trial < 10; ++trial) {
      DenseNet net({3, 5, 2}, rng.next_u64());
      QBatch batch;
      for (int s = 0; s < 4; ++s) {
        batch.states.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        batch.actions.push_back(rng.uniform_int(2));
        batch.targets.push_back(rng.uniform(-2, 2));
        batch.weights.push_back(rng.uniform(0.1, 1.0));
      }
      LossKind kind = trial % 2 ? LossKind::huber : LossKind::mse;
      auto grads = backward(net, batch, kind);
      const double h = 1e-5;
      for (std::size_t i = 0; i < net.param_count(); ++i) {
        double keep = net.params()[i];
        net.params()[i] = keep + h;
        double up = batch_loss(net, batch, kind);
        net.params()[i] = keep - h;
        double down = batch_loss(net, batch, kind);
        net.params()[i] = keep;
        double fd = (up - down) / (2 * h);
        double scale = std::max({1e-8, std::fabs(fd), std::fabs(grads[i])});
        if (std::fabs(fd - grads[i]) > 1e-8 && std::fabs(fd - grads[i]) / scale > 1e-4)
          ok = false;
      }
    }
    check("backward matches central finite differences", ok);
  }

  {  // encouragement against a naive per-term oracle
    Rng rng(15);
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      std::size_t cap = 8 + static_cast<std::size_t>(rng.uniform_int(8));
      SamplingPolicy policy{SamplingMode::per, 1.0, 1e-4};
      PrioritizedStore store(cap, 1, make_transform(policy), 1e-4);
      std::size_t pushes = cap + static_cast<std::size_t>(rng.uniform_int(int(cap)));
      for (std::size_t i = 0; i < pushes; ++i) {
        Transition t = make_transition(rng, 1, int(i / 5));
        store.push(std::move(t));
      }
      for (std::size_t i = 0; i < store.size(); ++i)
        store.update_priority(i, rng.uniform(0.0, 2.0));
      std::size_t goal = static_cast<std::size_t>(rng.uniform_int(int(store.size())));
      double rho = rng.uniform(0.2, 0.9);
      int window = compute_window(rho);
      double cap_value = store.priority(goal);

      std::vector<double> expect(store.size());
      for (std::size_t i = 0; i < store.size(); ++i) expect[i] = store.priority(i);
      double p_n = store.priority(goal);
      int goal_episode = store.transition(goal).episode;
      for (int i = 1; i <= window; ++i) {
        if (store.stamp(goal) < store.oldest_stamp() + static_cast<std::uint64_t>(i)) break;
        std::size_t idx = (goal + store.capacity() - std::size_t(i)) % store.capacity();
        if (store.transition(idx).episode != goal_episode) break;
        double grown = std::min(expect[idx] + p_n * std::pow(rho, i), cap_value);
        if (grown > expect[idx]) expect[idx] = grown;
      }
      encourage(store, store.ref(goal), rho, window, cap_value);
      for (std::size_t i = 0; i < store.size(); ++i) ok &= store.priority(i) == expect[i];
    }
    check("priority encouragement matches the naive oracle", ok);
  }

  {  // decay window and rho schedule landmarks
    bool ok = compute_window(0.1) == 2 && compute_window(0.4) == 5 && compute_window(0.65) == 10;
    EncouragementState st(0.65, 200);
    ok &= st.decay(0) == 0.65;
    ok &= st.decay(100) == 0.65 * 0.5;
    ok &= st.decay(200) == 0.0;
    check("decay window and rho schedule values", ok);
  }

  {  // beta fitter bounds
    BetaFitter fit(0.4);
    bool ok = fit.update(0.0) == 0.4;
    ok &= fit.update(1.0) == 1.0;
    double mid = fit.update(0.5);
    ok &= std::fabs(mid - 0.7) < 1e-12;
    ok &= fit.update(-5.0) == 0.4;
    check("beta fitter normalization bounds", ok);
  }

  {  // train determinism on a tiny chain run
    ExperimentConfig cfg;
    cfg.env = EnvKind::chain;
    cfg.chain_length = 8;
    cfg.episodes = 6;
    cfg.budget = 400;
    cfg.batch = 8;
    cfg.capacity = 256;
    cfg.hidden = {8};
    cfg.framework = Framework::dalap;
    cfg.seed = 3;
    TrainResult a = train(cfg);
    TrainResult b = train(cfg);
    bool ok = a.param_checksum == b.param_checksum &&
              a.episode_rewards == b.episode_rewards && a.total_steps == b.total_steps;
    check("train loop is deterministic per seed", ok);
  }

  return all_ok;
}

}  // namespace replab
