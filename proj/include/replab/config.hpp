#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "replab/net.hpp"
#include "replab/rng.hpp"
#include "replab/sampling.hpp"

namespace replab {

enum class Framework { uniform, per, lap, pser, alap, dalap };
enum class EnvKind { cartpole, chain };
enum class BetaSource { none, schedule, fixed_one, single_arm, parallel };
enum class PeKind { none, batch_goals, max_goal };
enum class LossChoice { framework_default, mse, huber };

inline const char* framework_name(Framework f) {
  switch (f) {
    case Framework::uniform: return "uniform";
    case Framework::per: return "per";
    case Framework::lap: return "lap";
    case Framework::pser: return "pser";
    case Framework::alap: return "alap";
    case Framework::dalap: return "dalap";
  }
  return "?";
}

inline Framework parse_framework(const std::string& s) {
  for (Framework f : {Framework::uniform, Framework::per, Framework::lap, Framework::pser,
                      Framework::alap, Framework::dalap})
    if (s == framework_name(f)) return f;
  throw std::invalid_argument("unknown framework '" + s +
                              "' (valid: uniform, per, lap, pser, alap, dalap)");
}

/** What each training framework turns on. */
struct FrameworkTraits {
  SamplingMode mode;
  bool prioritized;  // refresh priorities from TD errors
  bool weighted;     // apply importance weights
  BetaSource beta;
  PeKind pe;
  LossKind default_loss;
};

inline FrameworkTraits traits_of(Framework f) {
  switch (f) {
    case Framework::uniform:
      return {SamplingMode::uniform, false, false, BetaSource::none, PeKind::none, LossKind::mse};
    case Framework::per:
      return {SamplingMode::per, true, true, BetaSource::schedule, PeKind::none, LossKind::mse};
    case Framework::lap:
      return {SamplingMode::lap, true, true, BetaSource::fixed_one, PeKind::none, LossKind::huber};
    case Framework::pser:
      return {SamplingMode::per, true, true, BetaSource::schedule, PeKind::max_goal,
              LossKind::mse};
    case Framework::alap:
      return {SamplingMode::lap, true, true, BetaSource::single_arm, PeKind::none,
              LossKind::huber};
    case Framework::dalap:
      return {SamplingMode::lap, true, true, BetaSource::parallel, PeKind::batch_goals,
              LossKind::huber};
  }
  throw std::logic_error("unreachable framework");
}

struct EpsSchedule {
  double start = 1.0;
  double end = 0.01;
  std::int64_t decay_steps = 0;  // 0: first half of the step budget
};

/** Everything one run needs, in one validated record. */
struct ExperimentConfig {
  Framework framework = Framework::dalap;
  EnvKind env = EnvKind::cartpole;
  int chain_length = 20;
  int episodes = 200;           // e_total
  std::int64_t budget = 40000;  // step budget T; schedule horizon
  int batch = 64;               // m
  double step_size = 1e-3;      // sigma
  int replay_period = 4;        // K: warm-up gate and iterations per phase
  std::size_t capacity = 20000; // N
  double gamma = 0.99;
  std::vector<int> hidden = {24, 24, 24};
  int target_sync = 1;          // replay phases between target refreshes
  EpsSchedule eps;
  double alpha = 0.6;
  double beta0 = 0.4;
  double priority_floor = 1e-4; // epsilon
  double rho0 = 0.65;
  std::size_t d_k = 16;
  LossChoice loss = LossChoice::framework_default;
  std::uint64_t seed = 0;        // user-visible per-run seed
  std::uint64_t engine_seed = 0; // derived stream seed; 0 derives from seed
  bool pin_priorities = false;   // test hook: freeze priorities after push

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
    if (chain_length < 2) fail("chain_length must be at least 2");
    if (episodes < 1) fail("episodes must be positive");
    if (budget < 1) fail("budget must be positive");
    if (batch < 1) fail("batch must be positive");
    if (static_cast<std::size_t>(batch) > capacity) fail("batch must not exceed capacity");
    if (!(step_size > 0.0)) fail("step_size must be positive");
    if (replay_period < 1) fail("replay_period must be positive");
    if (capacity < 1) fail("capacity must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma must be in (0,1)");
    if (hidden.empty()) fail("hidden layer list must not be empty");
    for (int h : hidden)
      if (h < 1) fail("hidden layer sizes must be positive");
    if (target_sync < 1) fail("target_sync must be positive");
    if (!(eps.start >= 0.0 && eps.start <= 1.0)) fail("eps_start must be in [0,1]");
    if (!(eps.end >= 0.0 && eps.end <= 1.0)) fail("eps_end must be in [0,1]");
    if (eps.decay_steps < 0) fail("eps_decay_steps must be nonnegative");
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must be in [0,1]");
    if (!(beta0 >= 0.0 && beta0 < 1.0)) fail("beta0 must be in [0,1)");
    if (!(priority_floor > 0.0)) fail("priority_floor must be positive");
    if (traits_of(framework).pe != PeKind::none && !(rho0 > 0.0 && rho0 < 1.0))
      fail("rho0 must be in (0,1)");
    if (d_k < 1) fail("d_k must be positive");
  }
};

inline LossKind effective_loss(const ExperimentConfig& cfg) {
  if (cfg.loss == LossChoice::mse) return LossKind::mse;
  if (cfg.loss == LossChoice::huber) return LossKind::huber;
  return traits_of(cfg.framework).default_loss;
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

inline double parse_double(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where + ": invalid number '" + v + "'");
  }
}

inline std::int64_t parse_i64(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    std::int64_t d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where + ": invalid integer '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  std::int64_t d = parse_i64(v, where);
  if (d < 0) throw ConfigError(where + ": expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::uint64_t>(d);
}

inline int parse_int(const std::string& v, const std::string& where) {
  return static_cast<int>(parse_i64(v, where));
}

/** Keys legal inside a [framework.<name>] section. */
inline void apply_framework_key(ExperimentConfig& cfg, const std::string& key,
                                const std::string& value, const std::string& where) {
  if (key == "alpha") {
    cfg.alpha = parse_double(value, where);
  } else if (key == "beta0") {
    cfg.beta0 = parse_double(value, where);
  } else if (key == "priority_floor") {
    cfg.priority_floor = parse_double(value, where);
  } else if (key == "rho0") {
    cfg.rho0 = parse_double(value, where);
  } else if (key == "d_k") {
    cfg.d_k = static_cast<std::size_t>(parse_u64(value, where));
  } else if (key == "loss") {
    if (value == "default") cfg.loss = LossChoice::framework_default;
    else if (value == "mse") cfg.loss = LossChoice::mse;
    else if (value == "huber") cfg.loss = LossChoice::huber;
    else throw ConfigError(where + ": loss must be one of default, mse, huber");
  } else {
    throw ConfigError(where + ": unknown key '" + key + "' in framework section");
  }
}

}  // namespace detail

/**
 * A whole sweep: the shared run template, the seed list, the frameworks to
 * compare, and per-framework overrides kept as raw key/value pairs.
 */
struct SuiteConfig {
  ExperimentConfig base;
  std::uint64_t master_seed = 1;
  std::vector<std::uint64_t> seeds = {0};
  std::vector<Framework> frameworks = {Framework::dalap};
  double reward_threshold = 195.0;
  int jobs = 1;  // 0: hardware concurrency
  std::string out_dir = "out";
  std::map<Framework, std::map<std::string, std::string>> overrides;

  /** Per-run stream seed := hash(master seed, framework name, run seed). */
  ExperimentConfig make_run_config(Framework fw, std::uint64_t run_seed) const {
    ExperimentConfig cfg = base;
    auto it = overrides.find(fw);
    if (it != overrides.end())
      for (const auto& [k, v] : it->second)
        detail::apply_framework_key(cfg, k, v, std::string("framework.") + framework_name(fw));
    cfg.framework = fw;
    cfg.seed = run_seed;
    cfg.engine_seed = mix_seed(mix_seed(master_seed, fnv1a(framework_name(fw))), run_seed);
    cfg.validate();
    return cfg;
  }

  /** Canonical text of every reproducibility-relevant setting. */
  std::string canonical_description() const {
    std::ostringstream os;
    os.precision(17);
    os << "env=" << (base.env == EnvKind::cartpole ? "cartpole" : "chain") << '\n'
       << "chain_length=" << base.chain_length << '\n'
       << "episodes=" << base.episodes << '\n'
       << "budget=" << base.budget << '\n'
       << "batch=" << base.batch << '\n'
       << "step_size=" << base.step_size << '\n'
       << "replay_period=" << base.replay_period << '\n'
       << "capacity=" << base.capacity << '\n'
       << "gamma=" << base.gamma << '\n';
    os << "hidden=";
    for (std::size_t i = 0; i < base.hidden.size(); ++i)
      os << (i ? "," : "") << base.hidden[i];
    os << '\n'
       << "target_sync=" << base.target_sync << '\n'
       << "eps_start=" << base.eps.start << '\n'
       << "eps_end=" << base.eps.end << '\n'
       << "eps_decay_steps=" << base.eps.decay_steps << '\n'
       << "alpha=" << base.alpha << '\n'
       << "beta0=" << base.beta0 << '\n'
       << "priority_floor=" << base.priority_floor << '\n'
       << "rho0=" << base.rho0 << '\n'
       << "d_k=" << base.d_k << '\n'
       << "loss=" << (base.loss == LossChoice::framework_default
                          ? "default"
                          : base.loss == LossChoice::mse ? "mse" : "huber")
       << '\n'
       << "seed=" << master_seed << '\n'
       << "reward_threshold=" << reward_threshold << '\n';
    os << "seeds=";
    for (std::size_t i = 0; i < seeds.size(); ++i) os << (i ? "," : "") << seeds[i];
    os << '\n' << "frameworks=";
    for (std::size_t i = 0; i < frameworks.size(); ++i)
      os << (i ? "," : "") << framework_name(frameworks[i]);
    os << '\n';
    for (const auto& [fw, kv] : overrides)
      for (const auto& [k, v] : kv)
        os << "framework." << framework_name(fw) << "." << k << "=" << v << '\n';
    return os.str();
  }

  std::string experiment_id() const {
    std::uint64_t h = fnv1a(canonical_description());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

/**
 * Key-value config with [experiment], [agent] and [framework.<name>]
 * sections. Lines starting with # or ; are comments. Unknown sections and
 * keys are errors carrying the source name and line number.
 */
inline SuiteConfig parse_suite_text(const std::string& text, const std::string& source_name) {
  SuiteConfig suite;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  bool seen_seeds = false, seen_frameworks = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string where = source_name + ":" + std::to_string(lineno);
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = detail::trim(t.substr(1, t.size() - 2));
      if (section != "experiment" && section != "agent" &&
          section.rfind("framework.", 0) != 0)
        throw ConfigError(where + ": unknown section [" + section + "]");
      if (section.rfind("framework.", 0) == 0) {
        std::string name = section.substr(10);
        try {
          parse_framework(name);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(where + ": " + e.what());
        }
      }
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    std::string key = detail::trim(t.substr(0, eq));
    std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty()) throw ConfigError(where + ": key outside any section");

    if (section == "experiment") {
      if (key == "env") {
        if (value == "cartpole") suite.base.env = EnvKind::cartpole;
        else if (value == "chain") suite.base.env = EnvKind::chain;
        else throw ConfigError(where + ": env must be cartpole or chain");
      } else if (key == "chain_length") {
        suite.base.chain_length = detail::parse_int(value, where);
      } else if (key == "episodes") {
        suite.base.episodes = detail::parse_int(value, where);
      } else if (key == "budget") {
        suite.base.budget = detail::parse_i64(value, where);
      } else if (key == "seed") {
        suite.master_seed = detail::parse_u64(value, where);
      } else if (key == "seeds") {
        suite.seeds.clear();
        for (const auto& s : detail::split(value, ','))
          if (!s.empty()) suite.seeds.push_back(detail::parse_u64(s, where));
        if (suite.seeds.empty()) throw ConfigError(where + ": seeds list is empty");
        seen_seeds = true;
      } else if (key == "frameworks") {
        suite.frameworks.clear();
        for (const auto& s : detail::split(value, ','))
          if (!s.empty()) {
            try {
              suite.frameworks.push_back(parse_framework(s));
            } catch (const std::invalid_argument& e) {
              throw ConfigError(where + ": " + e.what());
            }
          }
        if (suite.frameworks.empty()) throw ConfigError(where + ": frameworks list is empty");
        seen_frameworks = true;
      } else if (key == "reward_threshold") {
        suite.reward_threshold = detail::parse_double(value, where);
      } else if (key == "jobs") {
        suite.jobs = detail::parse_int(value, where);
      } else if (key == "out") {
        suite.out_dir = value;
      } else {
        throw ConfigError(where + ": unknown key '" + key + "' in [experiment]");
      }
    } else if (section == "agent") {
      if (key == "batch") suite.base.batch = detail::parse_int(value, where);
      else if (key == "step_size") suite.base.step_size = detail::parse_double(value, where);
      else if (key == "replay_period") suite.base.replay_period = detail::parse_int(value, where);
      else if (key == "capacity")
        suite.base.capacity = static_cast<std::size_t>(detail::parse_u64(value, where));
      else if (key == "gamma") suite.base.gamma = detail::parse_double(value, where);
      else if (key == "hidden") {
        suite.base.hidden.clear();
        for (const auto& s : detail::split(value, ','))
          if (!s.empty()) suite.base.hidden.push_back(detail::parse_int(s, where));
      } else if (key == "target_sync") suite.base.target_sync = detail::parse_int(value, where);
      else if (key == "eps_start") suite.base.eps.start = detail::parse_double(value, where);
      else if (key == "eps_end") suite.base.eps.end = detail::parse_double(value, where);
      else if (key == "eps_decay_steps")
        suite.base.eps.decay_steps = detail::parse_i64(value, where);
      else throw ConfigError(where + ": unknown key '" + key + "' in [agent]");
    } else {
      // [framework.<name>]: validate eagerly, apply lazily per run
      Framework fw = parse_framework(section.substr(10));
      ExperimentConfig probe = suite.base;
      detail::apply_framework_key(probe, key, value, where);
      suite.overrides[fw][key] = value;
    }
  }
  (void)seen_seeds;
  (void)seen_frameworks;
  return suite;
}

inline SuiteConfig parse_suite_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_suite_text(ss.str(), path);
}

}  // namespace replab
