#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "replab/agent.hpp"
#include "replab/config.hpp"

namespace replab {

/** One (framework, seed) run. duration_ms is wall clock and only ever lands
 *  in the metadata file, keeping the data files byte-reproducible. */
struct RunRecord {
  Framework framework = Framework::dalap;
  std::uint64_t seed = 0;
  TrainResult result;
  double duration_ms = 0.0;
  std::string error;  // nonempty: the run failed and carries no data

  bool ok() const { return error.empty(); }
};

/** Shortest text that parses back to the same double (17 significant digits). */
inline std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/**
 * Runs every (framework, seed) pair of the suite. Failures are recorded on
 * the affected run and the suite continues. jobs > 1 runs them concurrently;
 * results land in configuration order either way.
 */
inline std::vector<RunRecord> run_suite(const SuiteConfig& suite) {
  struct Job {
    Framework fw;
    std::uint64_t seed;
  };
  std::vector<Job> todo;
  for (Framework fw : suite.frameworks)
    for (std::uint64_t s : suite.seeds) todo.push_back({fw, s});

  std::vector<RunRecord> records(todo.size());
  int jobs = suite.jobs;
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  jobs = std::min<int>(jobs, static_cast<int>(todo.size()) > 0 ? static_cast<int>(todo.size()) : 1);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      RunRecord& rec = records[i];
      rec.framework = todo[i].fw;
      rec.seed = todo[i].seed;
      auto begin = std::chrono::steady_clock::now();
      try {
        ExperimentConfig cfg = suite.make_run_config(todo[i].fw, todo[i].seed);
        rec.result = train(cfg);
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      rec.duration_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin)
              .count();
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

/** Percentile with linear interpolation between order statistics. */
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of empty set");
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  double pos = q * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(pos);
  if (lo >= values.size() - 1) return values.back();
  double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

/** Per-episode mean with the interquartile band across runs. */
struct AggregateCurve {
  std::vector<double> mean;
  std::vector<double> band_low;   // 25th percentile
  std::vector<double> band_high;  // 75th percentile
  std::size_t runs = 0;
};

inline AggregateCurve aggregate(const std::vector<const RunRecord*>& records) {
  std::vector<const RunRecord*> good;
  for (const RunRecord* r : records)
    if (r && r->ok()) good.push_back(r);
  if (good.empty()) throw std::invalid_argument("aggregate needs at least one successful run");
  std::size_t episodes = good[0]->result.episode_rewards.size();
  for (const RunRecord* r : good)
    if (r->result.episode_rewards.size() != episodes)
      throw std::invalid_argument("aggregate: episode counts differ across runs");

  AggregateCurve curve;
  curve.runs = good.size();
  curve.mean.resize(episodes);
  curve.band_low.resize(episodes);
  curve.band_high.resize(episodes);
  std::vector<double> col(good.size());
  for (std::size_t e = 0; e < episodes; ++e) {
    double sum = 0.0;
    for (std::size_t r = 0; r < good.size(); ++r) {
      col[r] = good[r]->result.episode_rewards[e];
      sum += col[r];
    }
    curve.mean[e] = sum / static_cast<double>(good.size());
    curve.band_low[e] = percentile(col, 0.25);
    curve.band_high[e] = percentile(col, 0.75);
  }
  return curve;
}

inline std::vector<const RunRecord*> records_of(const std::vector<RunRecord>& records,
                                                Framework fw) {
  std::vector<const RunRecord*> out;
  for (const RunRecord& r : records)
    if (r.framework == fw) out.push_back(&r);
  return out;
}

inline std::vector<Framework> frameworks_present(const std::vector<RunRecord>& records) {
  std::vector<Framework> out;
  for (const RunRecord& r : records)
    if (std::find(out.begin(), out.end(), r.framework) == out.end()) out.push_back(r.framework);
  return out;
}

/** Scalar summaries per framework. episodes_to_threshold is 1-based;
 *  std::nullopt when the mean curve never reaches the threshold. */
struct FrameworkSummary {
  Framework framework = Framework::dalap;
  double final20_mean = 0.0;
  double auc = 0.0;
  std::optional<int> episodes_to_threshold;
  std::vector<std::uint64_t> seeds;
};

inline double curve_auc(const std::vector<double>& mean) {
  double s = 0.0;
  for (double v : mean) s += v;
  return s;
}

inline double final_n_mean(const std::vector<double>& mean, std::size_t n = 20) {
  if (mean.empty()) return 0.0;
  std::size_t take = std::min(n, mean.size());
  double s = 0.0;
  for (std::size_t i = mean.size() - take; i < mean.size(); ++i) s += mean[i];
  return s / static_cast<double>(take);
}

inline std::vector<FrameworkSummary> summarize(const std::vector<RunRecord>& records,
                                               double threshold) {
  std::vector<FrameworkSummary> out;
  for (Framework fw : frameworks_present(records)) {
    auto subset = records_of(records, fw);
    std::vector<const RunRecord*> good;
    for (auto* r : subset)
      if (r->ok()) good.push_back(r);
    if (good.empty()) continue;
    AggregateCurve curve = aggregate(subset);
    FrameworkSummary s;
    s.framework = fw;
    s.final20_mean = final_n_mean(curve.mean);
    s.auc = curve_auc(curve.mean);
    for (std::size_t e = 0; e < curve.mean.size(); ++e)
      if (curve.mean[e] >= threshold) {
        s.episodes_to_threshold = static_cast<int>(e) + 1;
        break;
      }
    for (auto* r : good) s.seeds.push_back(r->seed);
    out.push_back(std::move(s));
  }
  return out;
}

/** Per-seed AUC comparison between two frameworks over their shared seeds. */
struct PairedAuc {
  int wins_a = 0;
  int wins_b = 0;
  int ties = 0;
};

inline double run_auc(const RunRecord& r) { return curve_auc(r.result.episode_rewards); }

inline PairedAuc paired_auc(const std::vector<RunRecord>& records, Framework a, Framework b) {
  std::map<std::uint64_t, double> auc_a, auc_b;
  for (const RunRecord& r : records) {
    if (!r.ok()) continue;
    if (r.framework == a) auc_a[r.seed] = run_auc(r);
    if (r.framework == b) auc_b[r.seed] = run_auc(r);
  }
  PairedAuc out;
  for (const auto& [seed, va] : auc_a) {
    auto it = auc_b.find(seed);
    if (it == auc_b.end()) continue;
    if (va > it->second) ++out.wins_a;
    else if (va < it->second) ++out.wins_b;
    else ++out.ties;
  }
  return out;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write output file: " + p.string());
  return f;
}

}  // namespace detail

/**
 * Writes the suite outputs:
 *   runs.csv      experiment_id,framework,seed,episode,reward
 *   diag.csv      experiment_id,framework,seed,step,beta,delta_i,rho
 *   curves.csv    framework,episode,mean,band_low,band_high
 *   summary.csv   framework,final20_mean,auc,episodes_to_threshold,seeds
 *   meta.csv      experiment_id,framework,seed,status,duration_ms
 *   plot_columns.txt  column spec for redrawing the reward figures
 * Only meta.csv carries wall-clock values.
 */
inline void emit(const SuiteConfig& suite, const std::vector<RunRecord>& records,
                 const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + dir.string());
  const std::string id = suite.experiment_id();

  {
    auto f = detail::open_out(dir / "runs.csv");
    f << "experiment_id,framework,seed,episode,reward\n";
    for (const RunRecord& r : records) {
      if (!r.ok()) continue;
      for (std::size_t e = 0; e < r.result.episode_rewards.size(); ++e)
        f << id << ',' << framework_name(r.framework) << ',' << r.seed << ',' << e << ','
          << fmt_g17(r.result.episode_rewards[e]) << '\n';
    }
  }
  {
    auto f = detail::open_out(dir / "diag.csv");
    f << "experiment_id,framework,seed,step,beta,delta_i,rho\n";
    for (const RunRecord& r : records) {
      if (!r.ok()) continue;
      for (const DiagRow& row : r.result.diagnostics)
        f << id << ',' << framework_name(r.framework) << ',' << r.seed << ',' << row.step << ','
          << fmt_g17(row.beta) << ',' << fmt_g17(row.delta_i) << ',' << fmt_g17(row.rho) << '\n';
    }
  }
  {
    auto f = detail::open_out(dir / "curves.csv");
    f << "framework,episode,mean,band_low,band_high\n";
    for (Framework fw : frameworks_present(records)) {
      auto subset = records_of(records, fw);
      bool any_ok = false;
      for (auto* r : subset) any_ok |= r->ok();
      if (!any_ok) continue;
      AggregateCurve curve = aggregate(subset);
      for (std::size_t e = 0; e < curve.mean.size(); ++e)
        f << framework_name(fw) << ',' << e << ',' << fmt_g17(curve.mean[e]) << ','
          << fmt_g17(curve.band_low[e]) << ',' << fmt_g17(curve.band_high[e]) << '\n';
    }
  }
  {
    auto f = detail::open_out(dir / "summary.csv");
    f << "framework,final20_mean,auc,episodes_to_threshold,seeds\n";
    for (const FrameworkSummary& s : summarize(records, suite.reward_threshold)) {
      f << framework_name(s.framework) << ',' << fmt_g17(s.final20_mean) << ','
        << fmt_g17(s.auc) << ',';
      if (s.episodes_to_threshold) f << *s.episodes_to_threshold;
      else f << "not_reached";
      f << ',';
      for (std::size_t i = 0; i < s.seeds.size(); ++i) f << (i ? ";" : "") << s.seeds[i];
      f << '\n';
    }
  }
  {
    auto f = detail::open_out(dir / "meta.csv");
    f << "experiment_id,framework,seed,status,duration_ms\n";
    for (const RunRecord& r : records) {
      std::string status = r.ok() ? "ok" : "error: " + r.error;
      std::replace(status.begin(), status.end(), ',', ';');
      std::replace(status.begin(), status.end(), '\n', ' ');
      f << id << ',' << framework_name(r.framework) << ',' << r.seed << ',' << status << ','
        << fmt_g17(r.duration_ms) << '\n';
    }
  }
  {
    auto f = detail::open_out(dir / "plot_columns.txt");
    f << "curves.csv columns, one reward figure per suite:\n"
         "  framework   series name (one shaded band per framework)\n"
         "  episode     x axis, 0-based\n"
         "  mean        y: mean episode reward across seeds\n"
         "  band_low    y: 25th percentile across seeds (band lower edge)\n"
         "  band_high   y: 75th percentile across seeds (band upper edge)\n";
  }
}

/** Reads runs.csv back into records (rewards only, no diagnostics). */
inline std::vector<RunRecord> load_runs(const std::string& runs_csv_path) {
  std::ifstream f(runs_csv_path);
  if (!f) throw std::runtime_error("cannot open " + runs_csv_path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty runs file: " + runs_csv_path);
  std::vector<RunRecord> records;
  std::map<std::pair<std::string, std::uint64_t>, std::size_t> slots;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols = detail::split(line, ',');
    if (cols.size() != 5)
      throw std::runtime_error(runs_csv_path + ":" + std::to_string(lineno) +
                               ": expected 5 columns");
    std::string where = runs_csv_path + ":" + std::to_string(lineno);
    Framework fw = parse_framework(cols[1]);
    std::uint64_t seed = detail::parse_u64(cols[2], where);
    auto episode = static_cast<std::size_t>(detail::parse_u64(cols[3], where));
    double reward = detail::parse_double(cols[4], where);
    auto key = std::make_pair(cols[1], seed);
    auto it = slots.find(key);
    if (it == slots.end()) {
      it = slots.emplace(key, records.size()).first;
      RunRecord r;
      r.framework = fw;
      r.seed = seed;
      records.push_back(std::move(r));
    }
    auto& rewards = records[it->second].result.episode_rewards;
    if (rewards.size() != episode)
      throw std::runtime_error(where + ": episodes out of order");
    rewards.push_back(reward);
  }
  return records;
}

/** Human-readable summary table plus pairwise AUC records. */
inline std::string format_comparison(const std::vector<RunRecord>& records, double threshold) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-9s %6s %12s %12s %14s\n", "framework", "runs", "final20",
                "auc", "ep_to_thresh");
  os << buf;
  for (const FrameworkSummary& s : summarize(records, threshold)) {
    std::string thr = s.episodes_to_threshold ? std::to_string(*s.episodes_to_threshold)
                                              : std::string("not reached");
    std::snprintf(buf, sizeof buf, "%-9s %6zu %12.2f %12.1f %14s\n", framework_name(s.framework),
                  s.seeds.size(), s.final20_mean, s.auc, thr.c_str());
    os << buf;
  }
  auto fws = frameworks_present(records);
  for (std::size_t i = 0; i < fws.size(); ++i)
    for (std::size_t j = i + 1; j < fws.size(); ++j) {
      PairedAuc p = paired_auc(records, fws[i], fws[j]);
      if (p.wins_a + p.wins_b + p.ties == 0) continue;
      std::snprintf(buf, sizeof buf, "paired AUC %s vs %s: %d-%d (%d ties)\n",
                    framework_name(fws[i]), framework_name(fws[j]), p.wins_a, p.wins_b, p.ties);
      os << buf;
    }
  return os.str();
}

}  // namespace replab
