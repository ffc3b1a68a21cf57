#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "replab/config.hpp"
#include "replab/encouragement.hpp"
#include "replab/env.hpp"
#include "replab/net.hpp"
#include "replab/optimizer.hpp"
#include "replab/sampling.hpp"
#include "replab/similarity.hpp"
#include "replab/store.hpp"

namespace replab {

/** Bootstrapped regression target r + gamma * max_a' Q_target(s', a'). */
inline double bootstrap_target(const DenseNet& target, const Transition& t, double gamma) {
  double y = t.reward;
  if (t.discount_active) {
    auto qn = target.forward(t.next_state);
    y += gamma * *std::max_element(qn.begin(), qn.end());
  }
  return y;
}

/** TD error of one transition under the current nets. */
inline double td_error(const DenseNet& net, const DenseNet& target, const Transition& t,
                       double gamma) {
  return bootstrap_target(target, t, gamma) -
         net.forward(t.state)[static_cast<std::size_t>(t.action)];
}

/** Epsilon-greedy action; greedy ties resolve to the lowest index. */
inline int act(const DenseNet& net, std::span<const double> state, double eps_greedy, Rng& rng,
               int action_count) {
  if (!(eps_greedy >= 0.0 && eps_greedy <= 1.0))
    throw std::invalid_argument("eps_greedy must be in [0,1]");
  if (rng.uniform01() < eps_greedy) return rng.uniform_int(action_count);
  auto q = net.forward(state);
  int best = 0;
  for (int a = 1; a < action_count; ++a)
    if (q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
  return best;
}

inline std::unique_ptr<Env> make_env(const ExperimentConfig& cfg) {
  if (cfg.env == EnvKind::cartpole) return std::make_unique<CartPoleEnv>();
  return std::make_unique<SparseChainEnv>(cfg.chain_length);
}

/** Linear decay from eps.start to eps.end over the configured steps. */
inline double epsilon_greedy_at(const ExperimentConfig& cfg, std::int64_t t) {
  std::int64_t d = cfg.eps.decay_steps > 0 ? cfg.eps.decay_steps : cfg.budget / 2;
  if (d <= 0 || t >= d) return cfg.eps.end;
  return cfg.eps.start +
         (cfg.eps.end - cfg.eps.start) * (static_cast<double>(t) / static_cast<double>(d));
}

/** Episode-linear beta from beta0 to 1, the schedule the PER lineage uses. */
inline double beta_schedule_at(const ExperimentConfig& cfg, int episode) {
  if (cfg.episodes <= 1) return 1.0;
  double frac = static_cast<double>(episode) / static_cast<double>(cfg.episodes - 1);
  return std::min(cfg.beta0 + (1.0 - cfg.beta0) * frac, 1.0);
}

inline std::uint64_t bytes_checksum(const std::vector<double>& v) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double d : v) {
    unsigned char b[sizeof(double)];
    std::memcpy(b, &d, sizeof b);
    for (unsigned char c : b) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

/** One replay phase's diagnostics (averaged over its inner iterations). */
struct DiagRow {
  std::int64_t step;
  double beta;
  double delta_i;
  double rho;
};

struct TrainResult {
  std::vector<double> episode_rewards;
  std::vector<DiagRow> diagnostics;
  std::vector<std::int64_t> encouraged_per_episode;
  double weight_min = 1.0;
  double weight_max = 1.0;
  std::int64_t total_steps = 0;
  std::uint64_t param_checksum = 0;
};

/**
 * The full training loop. Each environment step stores the transition in
 * both buffers; once past warm-up (t > K and a full batch available) it runs
 * K replay iterations - prioritized draw, goal encouragement, mirror draw,
 * beta fit, TD errors, priority refresh, importance weights, gradient
 * accumulation - then applies one optimizer step and syncs the target net on
 * its interval. Deterministic given the config, including the seed.
 */
inline TrainResult train(const ExperimentConfig& cfg) {
  cfg.validate();
  const FrameworkTraits traits = traits_of(cfg.framework);
  const LossKind loss = effective_loss(cfg);

  const std::uint64_t engine_seed =
      cfg.engine_seed ? cfg.engine_seed : mix_seed(cfg.seed, fnv1a(framework_name(cfg.framework)));
  Rng rng(mix_seed(engine_seed, fnv1a("run")));

  auto env = make_env(cfg);
  const std::size_t obs = env->obs_dim();
  const int n_actions = env->action_count();

  SamplingPolicy policy{traits.mode, cfg.alpha, cfg.priority_floor};
  StorePair stores(cfg.capacity, obs, make_transform(policy), cfg.priority_floor);

  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(obs));
  for (int h : cfg.hidden) sizes.push_back(h);
  sizes.push_back(n_actions);
  DenseNet net(sizes, mix_seed(engine_seed, fnv1a("net")));
  DenseNet target = net;
  AdamState opt(net.param_count(), cfg.step_size);

  AttentionParams attn =
      make_attention_params(obs + 1, cfg.d_k, mix_seed(engine_seed, fnv1a("attention")),
                            mix_seed(engine_seed, fnv1a("shuffle")));
  BetaFitter fitter(cfg.beta0);

  std::optional<EncouragementState> enc;
  if (traits.pe == PeKind::batch_goals) enc.emplace(cfg.rho0, cfg.episodes);
  const double pser_rho = traits.pe == PeKind::max_goal ? cfg.rho0 : 0.0;
  const int pser_window = traits.pe == PeKind::max_goal ? compute_window(pser_rho) : 0;

  TrainResult out;
  out.episode_rewards.reserve(static_cast<std::size_t>(cfg.episodes));
  std::int64_t t = 0;
  std::int64_t phases = 0;
  QBatch qb;
  std::vector<double> grad_acc(net.param_count(), 0.0);

  for (int e = 0; e < cfg.episodes; ++e) {
    double rho = 0.0;
    int window = 0;
    if (traits.pe == PeKind::batch_goals) {
      rho = enc->decay(e);
      window = enc->window;
    } else if (traits.pe == PeKind::max_goal) {
      rho = pser_rho;
      window = pser_window;
    }

    std::vector<double> state = env->reset(rng);
    double ep_reward = 0.0;
    std::int64_t ep_encouraged = 0;
    bool done = false;

    while (!done) {
      int a = act(net, state, epsilon_greedy_at(cfg, t), rng, n_actions);
      StepResult sr = env->step(a);
      ep_reward += sr.reward;

      Transition tr;
      tr.state = state;
      tr.action = a;
      tr.reward = sr.reward;
      tr.discount_active = !sr.terminal;
      tr.next_state = sr.state;
      tr.episode = e;
      stores.push(std::move(tr));
      ++t;

      if (t > cfg.replay_period && stores.size() >= static_cast<std::size_t>(cfg.batch)) {
        std::fill(grad_acc.begin(), grad_acc.end(), 0.0);
        double beta_sum = 0.0, delta_sum = 0.0;
        auto& d = stores.prioritized();

        for (int k = 0; k < cfg.replay_period; ++k) {
          Minibatch ps = draw_minibatch(stores, static_cast<std::size_t>(cfg.batch), Arm::PS, rng);

          if (traits.pe == PeKind::batch_goals) {
            for (const SlotRef& g : select_goals(ps))
              ep_encouraged += static_cast<std::int64_t>(
                  encourage(d, g, rho, window, d.priority(g.index)));
          } else if (traits.pe == PeKind::max_goal) {
            const SlotRef& g = ps.slots[max_priority_position(ps)];
            ep_encouraged +=
                static_cast<std::int64_t>(encourage(d, g, rho, window, d.max_priority()));
          }

          double beta = 0.0, delta_i = 0.0;
          switch (traits.beta) {
            case BetaSource::none:
              break;
            case BetaSource::schedule:
              beta = beta_schedule_at(cfg, e);
              break;
            case BetaSource::fixed_one:
              beta = 1.0;
              break;
            case BetaSource::single_arm: {
              Minibatch rus =
                  draw_minibatch(stores, static_cast<std::size_t>(cfg.batch), Arm::RUS, rng);
              beta = fitter.update(
                  batch_similarity(batch_features(rus.transitions), attn, rng.next_u64()));
              break;
            }
            case BetaSource::parallel: {
              Minibatch rus =
                  draw_minibatch(stores, static_cast<std::size_t>(cfg.batch), Arm::RUS, rng);
              ParallelScore s =
                  parallel_similarity(ps, rus, attn, rng.next_u64(), rng.next_u64());
              delta_i = s.delta;
              beta = fitter.update(s.delta);
              break;
            }
          }

          qb.clear();
          for (std::size_t j = 0; j < ps.size(); ++j) {
            const Transition& trj = ps.transitions[j];
            double y = bootstrap_target(target, trj, cfg.gamma);
            auto q = net.forward(trj.state);
            ps.td_errors[j] = y - q[static_cast<std::size_t>(trj.action)];
            qb.states.push_back(trj.state);
            qb.actions.push_back(trj.action);
            qb.targets.push_back(y);
          }
          if (traits.prioritized && !cfg.pin_priorities)
            for (std::size_t j = 0; j < ps.size(); ++j)
              d.update_priority(ps.slots[j], std::fabs(ps.td_errors[j]) + cfg.priority_floor);

          if (traits.weighted) {
            std::vector<double> pb(ps.size());
            for (std::size_t j = 0; j < ps.size(); ++j)
              pb[j] = d.probability(ps.slots[j].index);
            ps.weights = normalized_weights(pb, d.min_probability(), beta, d.size());
            for (double w : ps.weights) {
              out.weight_min = std::min(out.weight_min, w);
              out.weight_max = std::max(out.weight_max, w);
            }
          }
          qb.weights = ps.weights;

          auto g = backward(net, qb, loss);
          for (std::size_t i = 0; i < grad_acc.size(); ++i) grad_acc[i] += g[i];
          beta_sum += beta;
          delta_sum += delta_i;
        }

        opt.step(net.params(), grad_acc);
        ++phases;
        if (phases % cfg.target_sync == 0) target = net;

        if (traits.beta != BetaSource::none || traits.prioritized)
          out.diagnostics.push_back({t, beta_sum / cfg.replay_period,
                                     delta_sum / cfg.replay_period, rho});
      }

      state = std::move(sr.state);
      done = sr.terminal;
    }
    out.episode_rewards.push_back(ep_reward);
    out.encouraged_per_episode.push_back(ep_encouraged);
  }

  out.total_steps = t;
  out.param_checksum = bytes_checksum(net.params());
  return out;
}

}  // namespace replab
