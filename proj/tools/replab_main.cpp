#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "replab/replab.hpp"
#include "replab/selftest.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> out;
  for (const auto& s : replab::detail::split(csv, ','))
    if (!s.empty()) out.push_back(replab::detail::parse_u64(s, "--seeds"));
  if (out.empty()) throw replab::ConfigError("--seeds: empty list");
  return out;
}

std::vector<replab::Framework> parse_framework_list(const std::string& csv) {
  std::vector<replab::Framework> out;
  for (const auto& s : replab::detail::split(csv, ','))
    if (!s.empty()) out.push_back(replab::parse_framework(s));
  if (out.empty()) throw replab::ConfigError("--frameworks: empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"replab: replay-sampling laboratory"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a sweep from a config file and emit CSV outputs");
  std::string config_path, out_dir, seeds_csv, frameworks_csv;
  int jobs = -1;
  run->add_option("--config", config_path, "suite config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--seeds", seeds_csv, "comma-separated seed list (overrides the config)");
  run->add_option("--frameworks", frameworks_csv,
                  "comma-separated framework list (overrides the config)");
  run->add_option("--jobs", jobs, "concurrent runs; 0 = hardware concurrency");

  auto* compare = app.add_subcommand("compare", "summarize an emitted output directory");
  std::string in_dir;
  double threshold = 195.0;
  compare->add_option("--in", in_dir, "directory holding runs.csv")->required();
  compare->add_option("--threshold", threshold, "reward threshold for episodes-to-threshold");

  auto* selftest = app.add_subcommand("selftest", "run the built-in property checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      replab::SuiteConfig suite = replab::parse_suite_file(config_path);
      if (!out_dir.empty()) suite.out_dir = out_dir;
      if (!seeds_csv.empty()) suite.seeds = parse_seed_list(seeds_csv);
      if (!frameworks_csv.empty()) suite.frameworks = parse_framework_list(frameworks_csv);
      if (jobs >= 0) suite.jobs = jobs;
      if (suite.out_dir.empty()) throw replab::ConfigError("no output directory configured");

      auto records = replab::run_suite(suite);
      replab::emit(suite, records, suite.out_dir);
      std::printf("experiment %s: %zu runs -> %s\n", suite.experiment_id().c_str(),
                  records.size(), suite.out_dir.c_str());
      std::fputs(replab::format_comparison(records, suite.reward_threshold).c_str(), stdout);
      for (const auto& r : records)
        if (!r.ok())
          std::fprintf(stderr, "run %s seed %llu failed: %s\n",
                       replab::framework_name(r.framework),
                       static_cast<unsigned long long>(r.seed), r.error.c_str());
      return 0;
    }
    if (compare->parsed()) {
      auto records = replab::load_runs(in_dir + "/runs.csv");
      std::fputs(replab::format_comparison(records, threshold).c_str(), stdout);
      return 0;
    }
    if (selftest->parsed()) return replab::selftest() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
