#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "codesign/bench.hpp"

namespace {

using namespace codesign;

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir.empty() ? "." : cfg.out_dir);
  if (cfg.out_dir.empty() || cfg.out_dir == ".") return name;
  return cfg.out_dir + "/" + name;
}

SystemParameters make_params(const ExperimentConfig& cfg) {
  SystemParameters p;
  if (!cfg.params_path.empty()) p = SystemParameters::from_config_file(cfg.params_path);
  p.validate();
  return p;
}

Dataset make_dataset(const ExperimentConfig& cfg) {
  return cfg.data_path.empty() ? synthesize_dataset(cfg.seed) : load_dataset(cfg.data_path);
}

int run_simulate(const ExperimentConfig& cfg) {
  const SystemParameters p = make_params(cfg);
  const Dataset ds = make_dataset(cfg);
  const DesignPoint design = cfg.effective_ctr_design();
  EpisodeConfig episode;
  episode.t_horizon = cfg.horizon == HorizonPreset::week ? 168 : kProfileLength;
  episode.init_soc_mode = InitSocMode::half_capacity;
  episode.init_day_mode = InitDayMode::fixed;
  episode.fixed_day = cfg.week_start_day;
  Rng64 rng(cfg.seed);
  const PolicyFn zero_policy = [](const MdpState&) { return 0.0; };
  const Rollout r = rollout(zero_policy, design, episode, ds, p, rng);

  MdpState initial;
  initial.h = 0;
  initial.d = cfg.week_start_day;
  initial.soc = design.b / 2.0;
  const int idx = initial.d * kHoursPerDay;
  initial.p_prod_bar = ds.pv_norm.values[idx] * design.p_nom;
  initial.p_load_bar = ds.load.values[idx];
  const std::string path = out_path(cfg, "trajectory.csv");
  write_trajectory(initial, r.trajectory, path);
  std::printf("design: %.2f kWp PV, %.2f kWh battery (zero-action policy)\n", design.p_nom,
              design.b);
  std::printf("episode return: %.6f EUR over %d hours\n", r.episode_return, episode.t_horizon);
  std::printf("episode income: %.6f EUR\n", r.episode_income);
  std::printf("trajectory written to %s\n", path.c_str());
  return 0;
}

FormulationOptions milp_options_for(const ExperimentConfig& cfg, int t_horizon) {
  FormulationOptions o;
  o.scenario = cfg.scenario;
  o.t_horizon = t_horizon;
  o.enforce_cyclic_soc = true;
  o.enforce_exclusivity = false;
  if (cfg.scenario == Scenario::ctr) o.fixed_design = cfg.effective_ctr_design();
  return o;
}

int run_solve_milp(const ExperimentConfig& cfg) {
  const SystemParameters p = make_params(cfg);
  const Dataset ds = make_dataset(cfg);
  const bool week = cfg.horizon == HorizonPreset::week;
  const int t = week ? 168 : kProfileLength;
  const Window window = slice_window(ds, week ? cfg.week_start_day : 0, t);
  const FormulationOptions options = milp_options_for(cfg, t);

  if (!week && !cfg.embedded_year) {
    const BuildResult built = build(window, p, options);
    const std::string path = out_path(cfg, "milp_year.lp");
    write_lp_file(built.lp, built.binaries, path);
    std::printf("one-year program exported to %s (pass --embedded-year to solve in-process)\n",
                path.c_str());
    return 0;
  }
  const DispatchSolution sol = solve_and_extract(window, p, options, cfg.lp_limits);
  const std::string path = out_path(cfg, "milp_dispatch.csv");
  write_dispatch(sol, path);
  std::printf("design: %.4f kWp PV, %.4f kWh battery\n", sol.design.p_nom, sol.design.b);
  std::printf("totex: %.6f EUR  income: %.6f EUR  (T=%d)\n", sol.costs.totex, sol.costs.income, t);
  std::printf("weekly-averaged reward: %.6f EUR\n", sol.avg_weekly_reward);
  if (!sol.relaxation_exact)
    std::printf("note: relaxation not exact, max charge/discharge overlap %.6g kW\n",
                std::max(sol.max_charge_overlap, sol.max_grid_overlap));
  std::printf("schedule written to %s\n", path.c_str());
  return 0;
}

int run_train(const ExperimentConfig& cfg) {
  const SystemParameters p = make_params(cfg);
  const Dataset ds = make_dataset(cfg);
  const bool week = cfg.horizon == HorizonPreset::week;
  const Dataset rl_ds = week ? tile_week(ds, cfg.week_start_day) : ds;
  EpisodeConfig episode;
  episode.t_horizon = 168;
  episode.init_soc_mode = InitSocMode::uniform_random;
  episode.init_day_mode = week ? InitDayMode::uniform_week : InitDayMode::uniform_year;
  episode.seed = cfg.seed;
  const DispatchEnv env(rl_ds, p, episode);
  const std::optional<DesignPoint> fixed =
      cfg.scenario == Scenario::ctr ? std::optional(cfg.effective_ctr_design()) : std::nullopt;
  const TrainResult result = train(env, p, cfg.scenario, fixed, cfg.train_config(p));

  const std::string curves = out_path(cfg, "curves.csv");
  emit_curves(result.stats, curves, cfg.ema_alpha);
  const std::string checkpoint = out_path(cfg, "policy_checkpoint.txt");
  save_checkpoint(result.policy, result.design, checkpoint);
  std::printf("final design: %.4f kWp PV, %.4f kWh battery\n", result.final_design.p_nom,
              result.final_design.b);
  if (!result.stats.mean_return.empty())
    std::printf("last training mean return: %.6f EUR (smoothed %.6f)\n",
                result.stats.mean_return.back(), result.stats.smoothed_return.back());
  std::printf("checkpoint written to %s\ncurves written to %s\n", checkpoint.c_str(),
              curves.c_str());
  return 0;
}

int run_evaluate(const ExperimentConfig& cfg, const std::string& checkpoint) {
  const SystemParameters p = make_params(cfg);
  const Dataset ds = make_dataset(cfg);
  const bool week = cfg.horizon == HorizonPreset::week;
  const Dataset rl_ds = week ? tile_week(ds, cfg.week_start_day) : ds;
  PolicyParams policy;
  DesignDistribution dist;
  load_checkpoint(policy, dist, checkpoint);
  const DesignPoint design = cfg.ctr_design ? *cfg.ctr_design : dist.mean_design(p);

  EpisodeConfig episode;
  episode.t_horizon = 168;
  episode.init_day_mode = week ? InitDayMode::uniform_week : InitDayMode::uniform_year;
  episode.seed = cfg.seed;
  const EvalSummary ev =
      evaluate(policy, design, rl_ds, p, episode, cfg.eval_episodes, cfg.seed);
  std::printf("design: %.4f kWp PV, %.4f kWh battery\n", design.p_nom, design.b);
  std::printf("mean reward: %.6f EUR over %d episodes\n", ev.mean_reward, ev.episodes);
  std::printf("mean income: %.6f EUR\n", ev.mean_income);
  std::printf("mean final soc gap: %.6f kWh\n", ev.mean_final_soc_gap);
  std::printf("mean cyclic correction cost: %.6f EUR\n", ev.mean_correction_cost);
  std::printf("adjusted reward: %.6f EUR\n", ev.mean_reward - ev.mean_correction_cost);
  return 0;
}

int run_export_lp(const ExperimentConfig& cfg) {
  const SystemParameters p = make_params(cfg);
  const Dataset ds = make_dataset(cfg);
  const bool week = cfg.horizon == HorizonPreset::week;
  const int t = week ? 168 : kProfileLength;
  const Window window = slice_window(ds, week ? cfg.week_start_day : 0, t);
  const BuildResult built = build(window, p, milp_options_for(cfg, t));
  const std::string path = out_path(cfg, week ? "milp_week.lp" : "milp_year.lp");
  write_lp_file(built.lp, built.binaries, path);
  std::printf("%d-hour formulation written to %s (%d variables, %zu constraints)\n", t,
              path.c_str(), built.lp.n_vars(), built.lp.constraints.size());
  return 0;
}

int run_benchmark_cmd(const ExperimentConfig& cfg) {
  const BenchmarkReport rep = run_benchmark(cfg);
  std::printf("report written to %s/report.csv\n",
              cfg.out_dir.empty() ? "." : cfg.out_dir.c_str());
  bool any_failed = false;
  for (const auto& [name, cell] :
       {std::pair<const char*, const MethodResult*>{"rl", &rep.rl},
        {"milp", &rep.milp},
        {"milp_on_rl_design", rep.has_cross ? &rep.milp_on_rl : nullptr}}) {
    if (!cell) continue;
    if (cell->ok) {
      if (cell->exported_only)
        std::printf("%-18s exported for external solving\n", name);
      else
        std::printf("%-18s reward %.4f  income %.4f  design (%.2f kWp, %.2f kWh)\n", name,
                    cell->reward, cell->income, cell->pv_kwp, cell->battery_kwh);
    } else {
      std::printf("%-18s FAILED: %s\n", name, cell->error.c_str());
      any_failed = true;
    }
  }
  return any_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  codesign::CliOptions opts;
  try {
    opts = codesign::parse_cli(args);
  } catch (const codesign::CliUsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  }
  if (opts.help_requested) {
    std::printf("%s", opts.help_text.c_str());
    return 0;
  }
  try {
    if (opts.command == "simulate") return run_simulate(opts.experiment);
    if (opts.command == "solve-milp") return run_solve_milp(opts.experiment);
    if (opts.command == "train") return run_train(opts.experiment);
    if (opts.command == "evaluate") return run_evaluate(opts.experiment, opts.checkpoint);
    if (opts.command == "benchmark") return run_benchmark_cmd(opts.experiment);
    if (opts.command == "export-lp") return run_export_lp(opts.experiment);
    std::fprintf(stderr, "usage error: unknown command '%s'\n", opts.command.c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
