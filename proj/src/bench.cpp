#include "codesign/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "CLI11.hpp"

namespace codesign {

namespace {

std::string join(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir + "/" + name;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

DesignPoint ExperimentConfig::effective_ctr_design() const {
  if (ctr_design) return *ctr_design;
  return horizon == HorizonPreset::week ? DesignPoint{55.81, 31.89} : DesignPoint{63.65, 64.9};
}

long ExperimentConfig::effective_iterations() const {
  if (iterations > 0) return iterations;
  return horizon == HorizonPreset::week ? 20000 : 100000;
}

TrainConfig ExperimentConfig::train_config(const SystemParameters& p) const {
  (void)p;
  TrainConfig tc;
  tc.iterations = effective_iterations();
  tc.seed = seed;
  tc.ema_alpha = ema_alpha;
  tc.progress_every = progress_every;
  if (horizon == HorizonPreset::week) {
    tc.hidden = {32};
    tc.batch = 32;
  } else {
    tc.hidden = {64, 64};
    tc.batch = 64;
  }
  tc.lr_policy = 3e-4;
  tc.lr_design = 1e-3;
  tc.log_std_init = 0.7;
  tc.grad_clip = 100.0;
  return tc;
}

void emit_curves(const TrainStats& stats, const std::string& path, double ema_alpha) {
  if (stats.mean_return.empty()) throw std::invalid_argument("emit_curves: empty stats");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "iteration,reward,income,pv_kwp,battery_kwh,reward_smoothed\n";
  char buf[256];
  double smoothed = stats.mean_return.front();
  for (size_t i = 0; i < stats.mean_return.size(); ++i) {
    if (i > 0) smoothed = (1.0 - ema_alpha) * smoothed + ema_alpha * stats.mean_return[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.9g\n", i, stats.mean_return[i],
                  stats.mean_income[i], stats.design_pv[i], stats.design_b[i], smoothed);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

void fill_from_dispatch(MethodResult& cell, const DispatchSolution& sol, int t_hours) {
  cell.ok = true;
  cell.t_hours = t_hours;
  cell.reward = sol.avg_weekly_reward;
  cell.income = sol.costs.income * (168.0 / t_hours);
  cell.battery_kwh = sol.design.b;
  cell.pv_kwp = sol.design.p_nom;
  cell.relaxation_exact = sol.relaxation_exact;
  cell.max_overlap = std::max(sol.max_charge_overlap, sol.max_grid_overlap);
}

struct CellTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double stop() const { return elapsed_seconds(start); }
};

}  // namespace

BenchmarkReport run_benchmark(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir.empty() ? "." : config.out_dir);
  SystemParameters p;
  if (!config.params_path.empty()) p = SystemParameters::from_config_file(config.params_path);
  p.validate();

  const Dataset ds = config.data_path.empty() ? synthesize_dataset(config.seed)
                                              : load_dataset(config.data_path);

  BenchmarkReport rep;
  rep.scenario = config.scenario;
  rep.horizon = config.horizon;
  rep.seed = config.seed;
  rep.has_cross = config.scenario == Scenario::ctr_des;

  const bool week = config.horizon == HorizonPreset::week;
  const int milp_horizon = week ? 168 : kProfileLength;
  const Window window = week ? slice_window(ds, config.week_start_day, 168)
                             : slice_window(ds, 0, kProfileLength);
  const Dataset rl_ds = week ? tile_week(ds, config.week_start_day) : ds;

  FormulationOptions milp_options;
  milp_options.scenario = config.scenario;
  milp_options.t_horizon = milp_horizon;
  milp_options.enforce_cyclic_soc = true;
  milp_options.enforce_exclusivity = false;
  if (config.scenario == Scenario::ctr) milp_options.fixed_design = config.effective_ctr_design();

  // Perfect-foresight column.
  {
    CellTimer timer;
    try {
      if (week || config.embedded_year) {
        const DispatchSolution sol = solve_and_extract(window, p, milp_options, config.lp_limits);
        fill_from_dispatch(rep.milp, sol, milp_horizon);
        write_dispatch(sol, join(config.out_dir, "milp_dispatch.csv"));
      } else {
        const BuildResult built = build(window, p, milp_options);
        write_lp_file(built.lp, built.binaries, join(config.out_dir, "milp_year.lp"));
        rep.milp.exported_only = true;
        rep.milp.ok = true;
        rep.milp.t_hours = milp_horizon;
      }
    } catch (const std::exception& e) {
      rep.milp.error = e.what();
    }
    rep.milp.wall_seconds = timer.stop();
  }

  // Policy-search column.
  EpisodeConfig episode_config;
  episode_config.t_horizon = 168;
  episode_config.init_soc_mode = InitSocMode::uniform_random;
  episode_config.init_day_mode = week ? InitDayMode::uniform_week : InitDayMode::uniform_year;
  episode_config.seed = config.seed;
  std::optional<DesignPoint> rl_design;
  {
    CellTimer timer;
    try {
      const DispatchEnv env(rl_ds, p, episode_config);
      const std::optional<DesignPoint> fixed =
          config.scenario == Scenario::ctr ? std::optional(config.effective_ctr_design())
                                           : std::nullopt;
      const TrainResult trained = train(env, p, config.scenario, fixed, config.train_config(p));
      emit_curves(trained.stats, join(config.out_dir, "curves.csv"), config.ema_alpha);
      save_checkpoint(trained.policy, trained.design,
                      join(config.out_dir, "policy_checkpoint.txt"));
      const EvalSummary ev =
          evaluate(trained.policy, trained.final_design, rl_ds, p, episode_config,
                   config.eval_episodes, Rng64::mix(config.seed, 0xeba1));
      rep.rl.ok = true;
      rep.rl.t_hours = episode_config.t_horizon;
      rep.rl.reward = ev.mean_reward;
      rep.rl.income = ev.mean_income;
      rep.rl.battery_kwh = trained.final_design.b;
      rep.rl.pv_kwp = trained.final_design.p_nom;
      rep.rl.correction_cost = ev.mean_correction_cost;
      rep.rl.adjusted_reward = ev.mean_reward - ev.mean_correction_cost;
      rl_design = trained.final_design;
    } catch (const std::exception& e) {
      rep.rl.error = e.what();
    }
    rep.rl.wall_seconds = timer.stop();
  }

  // Perfect-foresight dispatch re-run on the learned design.
  if (rep.has_cross) {
    CellTimer timer;
    try {
      if (!rl_design) throw std::runtime_error("no learned design available");
      if (week || config.embedded_year) {
        const DispatchSolution sol =
            cross_evaluate_design(window, p, *rl_design, milp_horizon, config.lp_limits);
        fill_from_dispatch(rep.milp_on_rl, sol, milp_horizon);
        write_dispatch(sol, join(config.out_dir, "cross_dispatch.csv"));
      } else {
        FormulationOptions cross_options = milp_options;
        cross_options.scenario = Scenario::ctr;
        cross_options.fixed_design = *rl_design;
        const BuildResult built = build(window, p, cross_options);
        write_lp_file(built.lp, built.binaries, join(config.out_dir, "milp_year_cross.lp"));
        rep.milp_on_rl.exported_only = true;
        rep.milp_on_rl.ok = true;
        rep.milp_on_rl.t_hours = milp_horizon;
        rep.milp_on_rl.battery_kwh = rl_design->b;
        rep.milp_on_rl.pv_kwp = rl_design->p_nom;
      }
    } catch (const std::exception& e) {
      rep.milp_on_rl.error = e.what();
    }
    rep.milp_on_rl.wall_seconds = timer.stop();
  }

  write_report(rep, config, join(config.out_dir, "report.csv"));

  std::ofstream timings(join(config.out_dir, "timings.txt"));
  char buf[96];
  std::snprintf(buf, sizeof(buf), "milp_seconds %.3f\n", rep.milp.wall_seconds);
  timings << buf;
  std::snprintf(buf, sizeof(buf), "rl_seconds %.3f\n", rep.rl.wall_seconds);
  timings << buf;
  if (rep.has_cross) {
    std::snprintf(buf, sizeof(buf), "cross_seconds %.3f\n", rep.milp_on_rl.wall_seconds);
    timings << buf;
  }
  return rep;
}

void write_report(const BenchmarkReport& rep, const ExperimentConfig& config,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const char* scenario = rep.scenario == Scenario::ctr ? "ctr" : "ctr_des";
  const char* horizon = rep.horizon == HorizonPreset::week ? "week" : "year";
  out << "# pv-battery co-design benchmark\n";
  out << "# scenario: " << scenario << "\n";
  out << "# horizon preset: " << horizon << "\n";
  out << "# seed: " << rep.seed << "\n";
  out << "# dataset: " << (config.data_path.empty() ? "synthetic" : config.data_path) << "\n";
  if (rep.horizon == HorizonPreset::week)
    out << "# week window: start day " << config.week_start_day << ", 168 hours\n";
  out << "# policy column: reward/income are means over " << config.eval_episodes
      << " deterministic-policy episodes (initial charge at half capacity); the reported design"
         " is the final design distribution mean\n";
  out << "# dispatch column: charge/discharge split formulation without exclusivity binaries,"
         " cyclic state of charge enforced\n";
  if (rep.milp.ok && !rep.milp.exported_only)
    out << "# dispatch relaxation exact: " << (rep.milp.relaxation_exact ? "yes" : "no")
        << " (max simultaneous overlap " << fmt(rep.milp.max_overlap) << " kW)\n";
  for (const auto& [name, cell] :
       {std::pair<const char*, const MethodResult*>{"rl", &rep.rl},
        {"milp", &rep.milp},
        {"milp_on_rl_design", &rep.milp_on_rl}}) {
    if (!cell->ok && !cell->error.empty())
      out << "# error " << name << ": " << cell->error << "\n";
  }

  out << "metric,unit,rl,milp,milp_on_rl_design\n";
  const MethodResult* cols[3] = {&rep.rl, &rep.milp, rep.has_cross ? &rep.milp_on_rl : nullptr};
  auto row = [&](const std::string& label, const std::string& unit,
                 double MethodResult::*field, bool t_row = false) {
    out << label << "," << unit;
    for (const MethodResult* cell : cols) {
      out << ",";
      if (!cell) continue;
      if (!cell->ok) { out << "error"; continue; }
      if (t_row) { out << static_cast<long>(cell->t_hours); continue; }
      if (cell->exported_only) { out << "exported"; continue; }
      out << fmt(cell->*field);
    }
    out << "\n";
  };
  row("T", "hours", &MethodResult::t_hours, true);
  row("Reward", "EUR", &MethodResult::reward);
  row("Income", "EUR", &MethodResult::income);
  row("Battery capacity", "kWh", &MethodResult::battery_kwh);
  row("PV power", "kWp", &MethodResult::pv_kwp);
  // Cyclic-correction adjustment applies to the policy column only.
  out << "Adjusted reward,EUR," << (rep.rl.ok ? fmt(rep.rl.adjusted_reward) : "error") << ",,\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

CliOptions parse_cli(const std::vector<std::string>& args) {
  CliOptions opts;
  CLI::App app{"PV-battery co-design toolkit: perfect-foresight dispatch vs joint policy search"};
  app.require_subcommand(1);

  std::string horizon = "week";
  std::string scenario = "ctr";
  double design_pv = -1.0;
  double design_batt = -1.0;
  long seed = -1;

  auto add_common = [&](CLI::App* sub, bool with_scenario) {
    sub->add_option("--data", opts.experiment.data_path, "dataset csv (hour,load_kw,pv_norm)");
    sub->add_option("--params", opts.experiment.params_path, "system parameter key=value file");
    sub->add_option("--seed", seed, "rng seed (falls back to CODESIGN_SEED, then 0)");
    sub->add_option("--horizon", horizon, "week | year")
        ->check(CLI::IsMember({"week", "year"}));
    if (with_scenario)
      sub->add_option("--scenario", scenario, "ctr | ctr_des")
          ->check(CLI::IsMember({"ctr", "ctr_des"}));
    sub->add_option("--design-pv", design_pv, "fixed PV size, kWp");
    sub->add_option("--design-batt", design_batt, "fixed battery size, kWh");
    sub->add_option("--out", opts.experiment.out_dir, "output directory");
    sub->add_option("--start-day", opts.experiment.week_start_day,
                    "first day of the benchmark week (0..364)");
    sub->add_option("--lp.max_iterations", opts.experiment.lp_limits.max_iterations,
                    "simplex iteration cap (0 = automatic)");
    sub->add_option("--mip.max_nodes", opts.experiment.lp_limits.max_nodes,
                    "branch-and-bound node cap");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "roll the zero-action policy and dump the trajectory");
  add_common(simulate, false);
  CLI::App* solve = app.add_subcommand("solve-milp", "perfect-foresight dispatch solve");
  add_common(solve, true);
  solve->add_flag("--embedded-year", opts.experiment.embedded_year,
                  "solve the one-year program in-process instead of exporting it");
  CLI::App* train_cmd = app.add_subcommand("train", "joint policy/design search");
  add_common(train_cmd, true);
  train_cmd->add_option("--iterations", opts.experiment.iterations, "training iterations");
  train_cmd->add_option("--progress-every", opts.experiment.progress_every,
                        "stderr progress cadence");
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "evaluate a saved policy checkpoint");
  add_common(eval_cmd, false);
  eval_cmd->add_option("--checkpoint", opts.checkpoint, "policy checkpoint path")->required();
  eval_cmd->add_option("--episodes", opts.experiment.eval_episodes, "evaluation episodes");
  CLI::App* bench_cmd = app.add_subcommand("benchmark", "full method comparison");
  add_common(bench_cmd, true);
  bench_cmd->add_option("--iterations", opts.experiment.iterations, "training iterations");
  bench_cmd->add_option("--episodes", opts.experiment.eval_episodes, "evaluation episodes");
  bench_cmd->add_flag("--embedded-year", opts.experiment.embedded_year,
                      "solve the one-year program in-process instead of exporting it");
  bench_cmd->add_option("--progress-every", opts.experiment.progress_every,
                        "stderr progress cadence");
  CLI::App* export_cmd = app.add_subcommand("export-lp", "write the formulation in LP text format");
  add_common(export_cmd, true);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    opts.help_requested = true;
    opts.help_text = app.help();
    (void)e;
    return opts;
  } catch (const CLI::ParseError& e) {
    throw CliUsageError(e.what());
  }

  opts.command = app.get_subcommands().front()->get_name();
  opts.experiment.horizon = horizon == "week" ? HorizonPreset::week : HorizonPreset::year;
  opts.experiment.scenario = scenario == "ctr" ? Scenario::ctr : Scenario::ctr_des;

  if (seed >= 0) {
    opts.experiment.seed = static_cast<uint64_t>(seed);
  } else if (const char* env = std::getenv("CODESIGN_SEED")) {
    try {
      opts.experiment.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw CliUsageError("CODESIGN_SEED is not a number: " + std::string(env));
    }
  }

  const bool any_design = design_pv >= 0.0 || design_batt >= 0.0;
  if (opts.experiment.scenario == Scenario::ctr_des && any_design &&
      (opts.command == "solve-milp" || opts.command == "train" || opts.command == "benchmark" ||
       opts.command == "export-lp"))
    throw CliUsageError("--design-pv/--design-batt are forbidden with --scenario ctr_des");
  if (any_design) {
    DesignPoint d = opts.experiment.effective_ctr_design();
    if (design_pv >= 0.0) d.p_nom = design_pv;
    if (design_batt >= 0.0) d.b = design_batt;
    opts.experiment.ctr_design = d;
  }
  if (opts.experiment.week_start_day < 0 || opts.experiment.week_start_day >= kDaysPerYear)
    throw CliUsageError("--start-day must lie in [0, 364]");
  return opts;
}

}  // namespace codesign
