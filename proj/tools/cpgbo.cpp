// Command-line front end: optimize, replay, ablate, plot-data.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cpgbo/io.hpp"

namespace fs = std::filesystem;
using namespace cpgbo;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> budget;
  bool inference = false;
};

void apply(const Overrides& o, ScenarioConfig& c) {
  if (o.seed) c.seed = *o.seed;
  if (o.budget) c.budget = *o.budget;
  if (o.inference) c.inference_mode = true;
  c.validate();
}

void print_row(const ReportRow& r) {
  std::printf("trial %3d  vx %6.3f  CoT %7.3f  J %7.3f  beta %8.3g  c=(%5.1f, %6.3f)%s%s\n", r.trial,
              r.mean_vx, r.cost_of_transport, r.objective, r.beta, r.context.load, r.context.slope,
              r.random ? "  random" : "", r.aborted ? "  ABORTED" : "");
  std::fflush(stdout);
}

void print_summary(const RunReport& report) {
  const Summary s = report.summary();
  std::printf("last %d trials: vx %.3f  CoT %.3f  J %.3f\n", s.count, s.mean_vx, s.cost_of_transport,
              s.objective);
}

int cmd_optimize(const fs::path& config_path, const Overrides& o, const fs::path& out_dir,
                 bool quiet) {
  ScenarioConfig c = load_scenario(config_path);
  apply(o, c);
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioResult result = run_scenario(c, quiet ? TrialCallback{} : TrialCallback(print_row));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const ExportPaths p = export_results(out_dir, c, result);
  print_summary(result.report);
  std::printf("%d trials in %.1f s; wrote %s, %s, %s\n", c.budget, secs, p.trials_csv.c_str(),
              p.log_json.c_str(), p.plot_csv.c_str());
  return 0;
}

int cmd_replay(const fs::path& log_path, const std::optional<fs::path>& out_dir) {
  std::ifstream in(log_path);
  if (!in) throw std::runtime_error("cannot open " + log_path.string());
  const Json original = Json::parse(in);
  const LoggedRun logged = parse_run_log(original);

  int mismatched_j = 0;
  for (std::size_t i = 0; i < logged.trials.size(); ++i) {
    const TrialRecord& t = logged.trials[i];
    if (objective_value(t, t.v_star, logged.config.objective) != t.objective) ++mismatched_j;
  }

  const ScenarioResult result = run_scenario(logged.config);
  const Json replayed = run_log(logged.config, result);
  if (out_dir) export_results(*out_dir, logged.config, result);

  const bool identical = replayed.dump() == original.dump();
  std::printf("objectives recomputed from logged traces: %zu/%zu exact\n",
              logged.trials.size() - mismatched_j, logged.trials.size());
  std::printf("replay of %zu trials: %s\n", logged.report.rows.size(),
              identical ? "bitwise identical" : "DIFFERS");
  return identical && mismatched_j == 0 ? 0 : 1;
}

int cmd_ablate(const fs::path& config_path, const Overrides& o, const fs::path& out_dir, int seeds) {
  ScenarioConfig base = load_scenario(config_path);
  apply(o, base);
  const std::array variants = {ControllerVariant::kOpenLoop, ControllerVariant::kVmc,
                               ControllerVariant::kTegotae, ControllerVariant::kVmcTegotae};
  const int runs = static_cast<int>(variants.size()) * seeds;
  std::vector<RunReport> reports(runs);
  std::vector<ScenarioConfig> configs(runs);
  for (int k = 0; k < runs; ++k) {
    ScenarioConfig c = base;
    c.variant = variants[k / seeds];
    c.seed = base.seed + static_cast<std::uint64_t>(k % seeds);
    c.name = base.name + "-" + to_string(c.variant) + "-seed" + std::to_string(c.seed);
    configs[k] = c;
  }

  // Independent runs with disjoint outputs; each run stays on one thread.
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < runs; ++k) {
    const ScenarioConfig& c = configs[k];
    const ScenarioResult result = run_scenario(c);
    export_results(out_dir / to_string(c.variant) / ("seed_" + std::to_string(c.seed)), c, result);
    reports[k] = result.report;
#pragma omp critical
    {
      const Summary s = result.report.summary();
      std::printf("%-12s seed %llu: vx %.3f  CoT %.3f  J %.3f\n", to_string(c.variant).c_str(),
                  static_cast<unsigned long long>(c.seed), s.mean_vx, s.cost_of_transport,
                  s.objective);
      std::fflush(stdout);
    }
  }

  const auto table = ablation_table(reports);
  write_text(out_dir / "ablation.csv", ablation_csv(table));
  std::printf("\n%s", format_ablation(table).c_str());
  return 0;
}

int cmd_plot_data(const fs::path& log_path, const std::optional<fs::path>& out_dir) {
  const LoggedRun logged = read_run_log(log_path);
  const fs::path dir = out_dir ? *out_dir : log_path.parent_path();
  std::error_code ec;
  fs::create_directories(dir, ec);
  write_text(dir / "plot.csv", plot_csv(logged.report));
  write_text(dir / "trials.csv", trials_csv(logged.report));
  std::printf("wrote %s\n", (dir / "plot.csv").c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online CPG gait optimization with contextual Bayesian optimization"};
  app.require_subcommand(1);

  Overrides o;
  std::uint64_t seed = 0;
  int budget = 0;
  fs::path out_dir = "out";
  std::string out_dir_opt;
  fs::path input;
  bool quiet = false;
  int seeds = 5;

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "RNG seed (overrides the config)");
    cmd->add_option("--budget", budget, "number of trials (overrides the config)")->check(CLI::PositiveNumber);
    cmd->add_flag("--inference", o.inference, "pin beta to 1e-6");
  };

  auto* optimize = app.add_subcommand("optimize", "run the optimization loop on a scenario");
  optimize->add_option("config", input, "scenario file (.yaml or .json)")->required()->check(CLI::ExistingFile);
  optimize->add_option("--out-dir", out_dir, "output directory");
  optimize->add_flag("-q,--quiet", quiet, "no per-trial output");
  add_overrides(optimize);

  auto* replay = app.add_subcommand("replay", "re-run a logged session and compare bitwise");
  replay->add_option("log", input, "run_log.json")->required()->check(CLI::ExistingFile);
  replay->add_option("--out-dir", out_dir_opt, "write the replayed outputs here");

  auto* ablate = app.add_subcommand("ablate", "all four controller variants over several seeds");
  ablate->add_option("config", input, "scenario file")->required()->check(CLI::ExistingFile);
  ablate->add_option("--out-dir", out_dir, "output directory");
  ablate->add_option("--seeds", seeds, "seeds per variant")->check(CLI::PositiveNumber);
  add_overrides(ablate);

  auto* plot = app.add_subcommand("plot-data", "per-trial series for plotting from a run log");
  plot->add_option("log", input, "run_log.json")->required()->check(CLI::ExistingFile);
  plot->add_option("--out-dir", out_dir_opt, "output directory (default: next to the log)");

  CLI11_PARSE(app, argc, argv);

  for (auto* cmd : {optimize, ablate}) {
    if (cmd->parsed()) {
      if (cmd->count("--seed") > 0) o.seed = seed;
      if (cmd->count("--budget") > 0) o.budget = budget;
    }
  }
  const std::optional<fs::path> opt_dir =
      out_dir_opt.empty() ? std::nullopt : std::optional<fs::path>(out_dir_opt);

  try {
    if (optimize->parsed()) return cmd_optimize(input, o, out_dir, quiet);
    if (replay->parsed()) return cmd_replay(input, opt_dir);
    if (ablate->parsed()) return cmd_ablate(input, o, out_dir, seeds);
    if (plot->parsed()) return cmd_plot_data(input, opt_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
