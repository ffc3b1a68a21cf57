// Acceptance suite: one check per criterion, each printing a PASS/FAIL line.
// Usage: acceptance [n]   (no argument runs all nine)

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "replab/replab.hpp"

using namespace replab;
namespace fs = std::filesystem;

namespace {

Transition random_transition(Rng& rng, std::size_t obs_dim, int episode = 0) {
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

// ---------------------------------------------------------------- criterion 1
// Sampling fidelity: over 50 random priority vectors of size 64, a million
// tree draws stay within total-variation 0.01 of the target distribution.
bool criterion_sampling_fidelity() {
  Rng rng(1001);
  const std::size_t n = 64;
  const int draws = 1000000;
  for (int vec = 0; vec < 50; ++vec) {
    SamplingPolicy policy{vec % 2 ? SamplingMode::per : SamplingMode::lap,
                          rng.uniform(0.2, 1.0), 1e-4};
    PrioritizedStore store(n, 2, make_transform(policy), 1e-4);
    for (std::size_t i = 0; i < n; ++i) store.push(random_transition(rng, 2));
    for (std::size_t i = 0; i < n; ++i)
      store.update_priority(i, rng.uniform(0.0, 5.0));

    std::vector<double> p = probability_of(store);
    std::vector<int> hits(n, 0);
    for (int d = 0; d < draws; ++d) ++hits[store.sample_mass(rng.uniform01())];
    double tv = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      tv += std::fabs(static_cast<double>(hits[i]) / draws - p[i]);
    tv /= 2.0;
    if (tv >= 0.01) {
      std::printf("  vector %d: tv = %.5f\n", vec, tv);
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------- criterion 2
// Unbiasedness identity: P(i) w(i) = 1/N at beta = 1, relative error 1e-12.
bool criterion_unbiasedness() {
  Rng rng(1002);
  for (int trial = 0; trial < 100; ++trial) {
    SamplingPolicy policy{trial % 2 ? SamplingMode::per : SamplingMode::lap,
                          rng.uniform(0.0, 1.0), 1e-4};
    std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(126));
    PrioritizedStore store(n, 2, make_transform(policy), 1e-4);
    for (std::size_t i = 0; i < n; ++i) store.push(random_transition(rng, 2));
    for (std::size_t i = 0; i < n; ++i)
      store.update_priority(i, rng.uniform(0.0, 8.0));
    for (double p : probability_of(store)) {
      double product = p * raw_weight(p, 1.0, n);
      double target = 1.0 / static_cast<double>(n);
      if (std::fabs(product - target) / target > 1e-12) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------- criterion 3
// Gradient correctness: backward vs central finite differences on a hundred
// random nets of up to ~200 parameters, max relative error 1e-4.
bool criterion_gradients() {
  Rng rng(1003);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> sizes{1 + rng.uniform_int(5), 1 + rng.uniform_int(10),
                           1 + rng.uniform_int(4)};
    if (trial % 3 == 0) sizes = {1 + rng.uniform_int(4), 1 + rng.uniform_int(6),
                                 1 + rng.uniform_int(6), 1 + rng.uniform_int(3)};
    DenseNet net(sizes, rng.next_u64());
    if (net.param_count() > 200) continue;

    QBatch batch;
    int m = 1 + rng.uniform_int(8);
    for (int s = 0; s < m; ++s) {
      std::vector<double> st(static_cast<std::size_t>(sizes.front()));
      for (auto& v : st) v = rng.uniform(-1.5, 1.5);
      batch.states.push_back(std::move(st));
      batch.actions.push_back(rng.uniform_int(sizes.back()));
      batch.targets.push_back(rng.uniform(-3.0, 3.0));
      batch.weights.push_back(rng.uniform(0.05, 1.0));
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
      double fd = (up - down) / (2.0 * h);
      double scale = std::max(std::fabs(fd), std::fabs(grads[i]));
      if (scale < 1e-8) continue;
      if (std::fabs(fd - grads[i]) / scale > 1e-4) {
        std::printf("  trial %d param %zu: analytic %.12g vs fd %.12g\n", trial, i, grads[i], fd);
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------- criterion 4
// Encouragement oracle: the naive per-term recurrence replayed on a copied
// priority vector matches encourage() bit-exactly on 1000 random states.
bool criterion_pe_oracle() {
  Rng rng(1004);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t capacity = 4 + static_cast<std::size_t>(rng.uniform_int(60));
    SamplingPolicy policy{SamplingMode::per, 1.0, 1e-4};
    PrioritizedStore store(capacity, 1, make_transform(policy), 1e-4);
    std::size_t pushes = 1 + static_cast<std::size_t>(rng.uniform_int(int(2 * capacity)));
    int span = 1 + rng.uniform_int(8);
    for (std::size_t i = 0; i < pushes; ++i) {
      Transition t;
      t.state = {rng.uniform(-1.0, 1.0)};
      t.next_state = {0.0};
      t.episode = static_cast<int>(i) / span;
      store.push(std::move(t));
    }
    for (std::size_t i = 0; i < store.size(); ++i)
      store.update_priority(i, rng.uniform(0.0, 3.0));

    std::size_t goal = static_cast<std::size_t>(rng.uniform_int(int(store.size())));
    double rho = rng.uniform(0.02, 0.98);
    int window = compute_window(rho);
    double cap = trial % 2 ? store.priority(goal) : store.max_priority();

    // oracle: term-by-term replay with independent bookkeeping
    std::vector<double> expect(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) expect[i] = store.priority(i);
    double p_n = store.priority(goal);
    int goal_episode = store.transition(goal).episode;
    for (int i = 1; i <= window; ++i) {
      if (store.stamp(goal) < store.oldest_stamp() + static_cast<std::uint64_t>(i)) break;
      std::size_t idx = (goal + store.capacity() - static_cast<std::size_t>(i)) %
                        store.capacity();
      if (store.transition(idx).episode != goal_episode) break;
      double grown = std::min(p_n * std::pow(rho, i) + expect[idx], cap);
      if (grown > expect[idx]) expect[idx] = grown;
    }

    encourage(store, store.ref(goal), rho, window, cap);
    for (std::size_t i = 0; i < store.size(); ++i)
      if (store.priority(i) != expect[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------- criterion 5
// Schedule exactness: rho(e) at the landmarks and the window values.
bool criterion_schedules() {
  EncouragementState st(0.65, 200);
  bool ok = st.decay(0) == 0.65;
  ok = ok && st.decay(100) == 0.65 * (1.0 - 100.0 / 200.0);
  ok = ok && st.decay(100) == 0.325;
  ok = ok && st.decay(200) == 0.0;
  ok = ok && compute_window(0.1) == 2;
  ok = ok && compute_window(0.4) == 5;
  ok = ok && compute_window(0.65) == 10;
  return ok;
}

// ---------------------------------------------------------------- criterion 6
// Similarity null test: two uniform arms give a mean increment within two
// standard errors of zero; a degenerate all-identical prioritized batch
// scores positive in at least 95 of 100 trials.
bool criterion_similarity_null() {
  Rng rng(1006);
  SamplingPolicy policy{SamplingMode::per, 0.6, 1e-4};
  StorePair pair(256, 4, make_transform(policy), 1e-4);
  for (int i = 0; i < 256; ++i) pair.push(random_transition(rng, 4));
  AttentionParams params = make_attention_params(5, 16, rng.next_u64(), rng.next_u64());

  const int trials = 100;
  const std::size_t m = 32;
  std::vector<double> deltas(trials);
  double sum = 0.0;
  for (int i = 0; i < trials; ++i) {
    Minibatch a = draw_minibatch(pair, m, Arm::RUS, rng);
    Minibatch b = draw_minibatch(pair, m, Arm::RUS, rng);
    deltas[i] = parallel_similarity(a, b, params, rng.next_u64(), rng.next_u64()).delta;
    sum += deltas[i];
  }
  double mean = sum / trials;
  double var = 0.0;
  for (double d : deltas) var += (d - mean) * (d - mean);
  var /= trials - 1;
  double se = std::sqrt(var / trials);
  if (!(std::fabs(mean) < 2.0 * se)) {
    std::printf("  null arms: mean %.4f vs 2 se %.4f\n", mean, 2.0 * se);
    return false;
  }

  int positive = 0;
  for (int i = 0; i < trials; ++i) {
    Minibatch rus = draw_minibatch(pair, m, Arm::RUS, rng);
    // force the degenerate prioritized batch: m copies of one transition
    Minibatch ps = rus;
    std::size_t pick = pair.prioritized().sample_mass(rng.uniform01());
    for (std::size_t j = 0; j < m; ++j) {
      ps.slots[j] = pair.prioritized().ref(pick);
      ps.transitions[j] = pair.prioritized().transition(pick);
    }
    auto s = parallel_similarity(ps, rus, params, rng.next_u64(), rng.next_u64());
    positive += s.delta > 0.0;
  }
  if (positive < 95) {
    std::printf("  degenerate batch positive in %d/100 trials\n", positive);
    return false;
  }
  return true;
}

// ---------------------------------------------------------------- criterion 7
// Cart-pole comparison: ten paired seeds, DALAP final-20 mean >= 170 on at
// least 7, and DALAP AUC >= the PER baseline's on at least 7 paired seeds.
SuiteConfig cartpole_suite() {
  SuiteConfig suite;
  suite.base.env = EnvKind::cartpole;
  suite.base.episodes = 200;
  suite.base.budget = 40000;
  suite.base.batch = 64;
  suite.base.step_size = 1e-3;
  suite.base.replay_period = 2;
  suite.base.capacity = 20000;
  suite.base.gamma = 0.99;
  suite.base.hidden = {24, 24, 24};
  suite.base.target_sync = 100;
  suite.base.eps = {1.0, 0.01, 4000};
  suite.base.alpha = 0.6;
  suite.base.beta0 = 0.4;
  suite.base.priority_floor = 1e-4;
  suite.base.rho0 = 0.65;
  suite.base.d_k = 16;
  suite.master_seed = 1;
  suite.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  suite.frameworks = {Framework::dalap, Framework::per};
  suite.reward_threshold = 195.0;
  suite.jobs = 0;
  return suite;
}

bool criterion_cartpole() {
  SuiteConfig suite = cartpole_suite();
  auto records = run_suite(suite);

  int good_final = 0, auc_wins = 0, pairs = 0;
  for (std::uint64_t seed : suite.seeds) {
    const RunRecord* dalap = nullptr;
    const RunRecord* per = nullptr;
    for (const auto& r : records) {
      if (r.seed != seed || !r.ok()) continue;
      if (r.framework == Framework::dalap) dalap = &r;
      if (r.framework == Framework::per) per = &r;
    }
    if (!dalap || !per) continue;
    ++pairs;
    double final20 = final_n_mean(dalap->result.episode_rewards);
    double auc_d = run_auc(*dalap);
    double auc_p = run_auc(*per);
    good_final += final20 >= 170.0;
    auc_wins += auc_d >= auc_p;
    std::printf("  seed %llu: dalap final20 %.1f auc %.0f | per auc %.0f\n",
                static_cast<unsigned long long>(seed), final20, auc_d, auc_p);
  }
  std::printf("  final20 >= 170 on %d/%d seeds; dalap auc >= per auc on %d/%d\n", good_final,
              pairs, auc_wins, pairs);
  return pairs == 10 && good_final >= 7 && auc_wins >= 7;
}

// ---------------------------------------------------------------- criterion 8
// Determinism: rerunning the same suite emits byte-identical runs.csv and
// diag.csv.
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool criterion_determinism() {
  SuiteConfig suite;
  suite.base.env = EnvKind::chain;
  suite.base.chain_length = 10;
  suite.base.episodes = 12;
  suite.base.budget = 1500;
  suite.base.batch = 16;
  suite.base.replay_period = 2;
  suite.base.capacity = 1024;
  suite.base.hidden = {16};
  suite.seeds = {1, 2};
  suite.frameworks = {Framework::dalap, Framework::per, Framework::uniform};
  suite.reward_threshold = 0.5;

  fs::path base = fs::temp_directory_path() / "replab_acceptance_determinism";
  fs::remove_all(base);
  fs::path dir_a = base / "a";
  fs::path dir_b = base / "b";
  emit(suite, run_suite(suite), dir_a.string());
  emit(suite, run_suite(suite), dir_b.string());
  bool ok = slurp(dir_a / "runs.csv") == slurp(dir_b / "runs.csv") &&
            slurp(dir_a / "diag.csv") == slurp(dir_b / "diag.csv") &&
            !slurp(dir_a / "runs.csv").empty();
  fs::remove_all(base);
  return ok;
}

// ---------------------------------------------------------------- criterion 9
// Sparse-reward probe: on the chain, DALAP's encouragement touches at least
// one slot per episode on average once the first success exists, while the
// PER baseline never propagates any priority growth.
bool criterion_sparse_probe() {
  SuiteConfig suite;
  suite.base.env = EnvKind::chain;
  suite.base.chain_length = 20;
  suite.base.episodes = 60;
  suite.base.budget = 5000;
  suite.base.batch = 16;
  suite.base.replay_period = 2;
  suite.base.capacity = 8192;
  suite.base.hidden = {24, 24, 24};
  suite.base.eps = {1.0, 0.05, 2400};
  suite.seeds = {0};
  suite.frameworks = {Framework::dalap, Framework::per};
  suite.reward_threshold = 0.5;

  auto records = run_suite(suite);
  const RunRecord* dalap = nullptr;
  const RunRecord* per = nullptr;
  for (const auto& r : records) {
    if (!r.ok()) {
      std::printf("  run failed: %s\n", r.error.c_str());
      return false;
    }
    if (r.framework == Framework::dalap) dalap = &r;
    if (r.framework == Framework::per) per = &r;
  }
  if (!dalap || !per) return false;

  int first_success = -1;
  for (std::size_t e = 0; e < dalap->result.episode_rewards.size(); ++e)
    if (dalap->result.episode_rewards[e] > 0.0) {
      first_success = static_cast<int>(e);
      break;
    }
  if (first_success < 0) {
    std::printf("  dalap never reached the rewarding end\n");
    return false;
  }
  std::int64_t encouraged = 0;
  std::int64_t episodes_after = 0;
  for (std::size_t e = static_cast<std::size_t>(first_success);
       e < dalap->result.encouraged_per_episode.size(); ++e) {
    encouraged += dalap->result.encouraged_per_episode[e];
    ++episodes_after;
  }
  double avg = static_cast<double>(encouraged) / static_cast<double>(episodes_after);

  std::int64_t per_encouraged = 0;
  for (auto v : per->result.encouraged_per_episode) per_encouraged += v;

  std::printf("  dalap: first success episode %d, %.1f encouraged slots/episode after; per: %lld\n",
              first_success, avg, static_cast<long long>(per_encouraged));
  return avg >= 1.0 && per_encouraged == 0;
}

struct Criterion {
  int number;
  const char* description;
  bool (*fn)();
};

const Criterion kCriteria[] = {
    {1, "sampling fidelity: tree draws match the priority distribution (TV < 0.01)",
     criterion_sampling_fidelity},
    {2, "unbiasedness identity: P(i) w(i) = 1/N at beta = 1 (rel err <= 1e-12)",
     criterion_unbiasedness},
    {3, "gradient correctness: backward vs finite differences (rel err <= 1e-4)",
     criterion_gradients},
    {4, "priority encouragement matches the naive oracle bit-exactly", criterion_pe_oracle},
    {5, "rho schedule and decay window are exact at the landmark values", criterion_schedules},
    {6, "similarity null test and degenerate-batch positivity", criterion_similarity_null},
    {7, "cart-pole: dalap final-20 >= 170 and auc >= per on >= 7/10 paired seeds",
     criterion_cartpole},
    {8, "determinism: identical configs emit byte-identical runs.csv and diag.csv",
     criterion_determinism},
    {9, "sparse chain: dalap propagates priority growth, the per baseline does not",
     criterion_sparse_probe},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  bool all_ok = true;
  for (const Criterion& c : kCriteria) {
    if (only != 0 && c.number != only) continue;
    bool ok = c.fn();
    std::printf("%s  [%d] %s\n", ok ? "PASS" : "FAIL", c.number, c.description);
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
