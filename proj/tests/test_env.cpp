#include <cmath>
#include <cstdio>
#include <fstream>

#include "codesign/env.hpp"
#include "doctest.h"

using namespace codesign;

TEST_SUITE_BEGIN("env");

TEST_CASE("project action") {
  const double eta = 0.9;
  CHECK(project_action(50, 100, 1, eta, 80) == doctest::Approx(50.0));
  CHECK(project_action(50, 100, 1, eta, 0) == 0.0);
  // Discharge is capped by the bus power a full drain can deliver.
  CHECK(project_action(20, 100, 1, eta, -30) == doctest::Approx(-18.0));
  CHECK(project_action(20, 100, 1, eta, -10) == doctest::Approx(-10.0));
  CHECK_THROWS_AS(project_action(-1, 100, 1, eta, 0), std::invalid_argument);
  CHECK_THROWS_AS(project_action(101, 100, 1, eta, 0), std::invalid_argument);

  SUBCASE("idempotence on random inputs") {
    Rng64 rng(2);
    bool ok = true;
    for (int k = 0; k < 1000; ++k) {
      const double b = rng.uniform(0.1, 200);
      const double soc = rng.uniform(0, b);
      const double dt = rng.uniform(0.25, 2.0);
      const double req = rng.uniform(-400, 400);
      const double once = project_action(soc, b, dt, eta, req);
      const double twice = project_action(soc, b, dt, eta, once);
      if (once != twice) ok = false;
    }
    CHECK(ok);
  }
}

TEST_CASE("soc update") {
  CHECK(soc_update(10, 10, 0.9, 1) == doctest::Approx(19.0));
  CHECK(soc_update(19, 0, 0.9, 1) == doctest::Approx(19.0));
  CHECK(soc_update(19, -9, 0.9, 1) == doctest::Approx(9.0));
}

TEST_CASE("round trip loss is eta squared") {
  const double eta = 0.9;
  const double x = 7.0;
  const double stored = soc_update(0, x, eta, 1);
  CHECK(stored == doctest::Approx(x * eta));
  const double discharge = project_action(stored, 100, 1, eta, -1e9);
  CHECK(-discharge == doctest::Approx(x * eta * eta));
  CHECK(soc_update(stored, discharge, eta, 1) == doctest::Approx(0.0));
}

TEST_CASE("settle grid") {
  const SystemParameters p;
  auto [i1, e1] = settle_grid(5, 3, 0, p);
  CHECK(i1 == 0.0);
  CHECK(e1 == doctest::Approx(2.0));
  auto [i2, e2] = settle_grid(4, 4, 0, p);
  CHECK(i2 == 0.0);
  CHECK(e2 == 0.0);
  auto [i3, e3] = settle_grid(0, 4, 1, p);
  CHECK(i3 == doctest::Approx(5.0));
  CHECK(e3 == 0.0);
  CHECK_THROWS_AS(settle_grid(0, 20000, 0, p), std::runtime_error);

  SUBCASE("at most one side nonzero") {
    Rng64 rng(3);
    bool ok = true;
    for (int k = 0; k < 1000; ++k) {
      auto [imp, exp] = settle_grid(rng.uniform(0, 50), rng.uniform(0, 50),
                                    rng.uniform(-30, 30), p);
      if (imp < 0 || exp < 0) ok = false;
      if (imp > 0 && exp > 0) ok = false;
    }
    CHECK(ok);
  }
}

TEST_CASE("step transitions") {
  const SystemParameters p;
  const Dataset ds = synthesize_dataset(4);
  const DesignPoint design{10, 20};

  SUBCASE("day rollover") {
    MdpState s;
    s.h = 23;
    s.d = 10;
    s.soc = 5;
    s.p_prod_bar = ds.pv_norm.values[10 * 24 + 23] * design.p_nom;
    s.p_load_bar = ds.load.values[10 * 24 + 23];
    const StepOutcome o = step(s, {0.0}, design, p, ds, 168);
    CHECK(o.next_state.h == 0);
    CHECK(o.next_state.d == 11);
    CHECK(o.next_state.p_load_bar == ds.load.values[11 * 24]);
  }

  SUBCASE("year wrap") {
    MdpState s;
    s.h = 23;
    s.d = 364;
    s.soc = 0;
    s.p_prod_bar = 0;
    s.p_load_bar = ds.load.values[364 * 24 + 23];
    const StepOutcome o = step(s, {0.0}, design, p, ds, 168);
    CHECK(o.next_state.h == 0);
    CHECK(o.next_state.d == 0);
  }

  SUBCASE("reward composition") {
    MdpState s;
    s.h = 0;
    s.d = 0;
    s.soc = 0;
    s.p_prod_bar = 0;
    s.p_load_bar = 10;  // forces an import of 10 kW
    const DesignPoint bare{0, 0};
    const StepOutcome o = step(s, {0.0}, bare, p, ds, 168);
    CHECK(o.p_imp == doctest::Approx(10.0));
    const double fixed = fixed_cost_per_horizon(bare, p, 168);
    CHECK(o.reward == doctest::Approx(-10.0 - fixed / 168.0).epsilon(1e-12));
  }
}

TEST_CASE("reset modes") {
  const SystemParameters p;
  const Dataset ds = synthesize_dataset(4);
  const DesignPoint design{10, 62};

  SUBCASE("half capacity") {
    EpisodeConfig cfg;
    cfg.init_soc_mode = InitSocMode::half_capacity;
    cfg.init_day_mode = InitDayMode::fixed;
    cfg.fixed_day = 3;
    Rng64 rng(1);
    const MdpState s = reset(cfg, design, ds, rng);
    CHECK(s.soc == doctest::Approx(31.0));
    CHECK(s.d == 3);
    CHECK(s.h == 0);
    CHECK(s.p_load_bar == ds.load.values[3 * 24]);
  }

  SUBCASE("uniform soc mean is near half capacity") {
    EpisodeConfig cfg;
    cfg.init_soc_mode = InitSocMode::uniform_random;
    cfg.init_day_mode = InitDayMode::uniform_year;
    Rng64 rng(12);
    const int n = 10000;
    double sum = 0.0;
    bool contained = true;
    bool day_range_ok = true;
    for (int k = 0; k < n; ++k) {
      const MdpState s = reset(cfg, design, ds, rng);
      sum += s.soc;
      if (s.soc < 0 || s.soc > design.b) contained = false;
      if (s.d < 0 || s.d > 364) day_range_ok = false;
    }
    CHECK(contained);
    CHECK(day_range_ok);
    // Uniform[0, B]: mean B/2, sd B/sqrt(12); three sigma of the mean.
    const double three_sigma = 3.0 * design.b / std::sqrt(12.0 * n);
    CHECK(std::abs(sum / n - design.b / 2.0) < three_sigma);
  }

  SUBCASE("uniform week stays in the first seven days") {
    EpisodeConfig cfg;
    cfg.init_day_mode = InitDayMode::uniform_week;
    Rng64 rng(5);
    for (int k = 0; k < 200; ++k) {
      const MdpState s = reset(cfg, design, ds, rng);
      REQUIRE(s.d >= 0);
      REQUIRE(s.d <= 6);
    }
  }
}

TEST_CASE("rollout") {
  const SystemParameters p;
  const Dataset ds = synthesize_dataset(4);
  const PolicyFn zero = [](const MdpState&) { return 0.0; };

  SUBCASE("zero-action, zero-design closed form") {
    EpisodeConfig cfg;
    cfg.t_horizon = 72;
    cfg.init_soc_mode = InitSocMode::half_capacity;
    cfg.init_day_mode = InitDayMode::fixed;
    cfg.fixed_day = 100;
    Rng64 rng(9);
    const Rollout r = rollout(zero, {0, 0}, cfg, ds, p, rng);
    double want = -fixed_cost_per_horizon({0, 0}, p, 72);
    for (int i = 0; i < 72; ++i) want -= ds.load.values[100 * 24 + i] * p.c_imp * p.dt;
    CHECK(r.episode_return == doctest::Approx(want).epsilon(1e-10));
    CHECK(r.trajectory.size() == 72);
  }

  SUBCASE("zero horizon") {
    EpisodeConfig cfg;
    cfg.t_horizon = 0;
    Rng64 rng(9);
    const Rollout r = rollout(zero, {5, 5}, cfg, ds, p, rng);
    CHECK(r.episode_return == 0.0);
    CHECK(r.trajectory.empty());
  }

  SUBCASE("return equals the negated cost breakdown of the trajectory") {
    EpisodeConfig cfg;
    cfg.t_horizon = 168;
    cfg.init_soc_mode = InitSocMode::uniform_random;
    cfg.init_day_mode = InitDayMode::uniform_year;
    Rng64 policy_rng(77);
    const PolicyFn noisy = [&](const MdpState&) { return policy_rng.uniform(-30, 30); };
    Rng64 rng(13);
    const DesignPoint design{40, 60};
    const Rollout r = rollout(noisy, design, cfg, ds, p, rng);
    std::vector<double> imp, exp;
    for (const auto& o : r.trajectory) {
      imp.push_back(o.p_imp);
      exp.push_back(o.p_exp);
    }
    const CostBreakdown cb = cost_breakdown(design, imp, exp, p, 168);
    CHECK(r.episode_return == doctest::Approx(-cb.totex).epsilon(1e-9));
    CHECK(r.episode_income == doctest::Approx(cb.income).epsilon(1e-9));
  }
}

TEST_CASE("rollout conservation, containment and determinism") {
  const SystemParameters p;
  const Dataset ds = synthesize_dataset(21);
  EpisodeConfig cfg;
  cfg.t_horizon = 48;
  cfg.init_soc_mode = InitSocMode::uniform_random;
  cfg.init_day_mode = InitDayMode::uniform_year;

  bool conserved = true;
  bool contained = true;
  for (int k = 0; k < 500; ++k) {
    Rng64 rng(Rng64::mix(3, k));
    Rng64 policy_rng(Rng64::mix(4, k));
    const DesignPoint design{rng.uniform(0, 200), rng.uniform(0, 200)};
    const PolicyFn random_policy = [&](const MdpState&) { return policy_rng.uniform(-250, 250); };
    MdpState s = reset(cfg, design, ds, rng);
    for (int t = 0; t < cfg.t_horizon; ++t) {
      const StepOutcome o = step(s, {random_policy(s)}, design, p, ds, cfg.t_horizon);
      const double residual = s.p_prod_bar + o.p_imp - s.p_load_bar - o.p_b_applied - o.p_exp;
      if (std::abs(residual) > 1e-9) conserved = false;
      if (o.next_state.soc < 0.0 || o.next_state.soc > design.b) contained = false;
      s = o.next_state;
    }
  }
  CHECK(conserved);
  CHECK(contained);

  SUBCASE("bit-identical trajectories for identical seeds") {
    const PolicyFn greedy = [](const MdpState& s) { return s.p_prod_bar - s.p_load_bar; };
    const DesignPoint design{50, 40};
    Rng64 r1(777), r2(777);
    const Rollout a = rollout(greedy, design, cfg, ds, p, r1);
    const Rollout b = rollout(greedy, design, cfg, ds, p, r2);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    bool identical = a.initial_soc == b.initial_soc;
    for (size_t i = 0; i < a.trajectory.size(); ++i) {
      if (a.trajectory[i].reward != b.trajectory[i].reward) identical = false;
      if (a.trajectory[i].next_state.soc != b.trajectory[i].next_state.soc) identical = false;
      if (a.trajectory[i].p_imp != b.trajectory[i].p_imp) identical = false;
    }
    CHECK(identical);
  }
}

TEST_CASE("reward minus income is the same constant at every step") {
  const SystemParameters p;
  const Dataset ds = synthesize_dataset(21);
  EpisodeConfig cfg;
  cfg.t_horizon = 168;
  cfg.init_soc_mode = InitSocMode::uniform_random;
  cfg.init_day_mode = InitDayMode::uniform_week;
  const DesignPoint design{63.65, 64.9};
  Rng64 rng(31);
  Rng64 policy_rng(32);
  const PolicyFn noisy = [&](const MdpState&) { return policy_rng.uniform(-40, 40); };
  const Rollout r = rollout(noisy, design, cfg, ds, p, rng);
  const double expected_gap = -fixed_cost_per_horizon(design, p, 168) / 168.0;
  bool constant = true;
  for (const auto& o : r.trajectory) {
    const double income_t = -grid_step_cost(o.p_imp, o.p_exp, p);
    if (std::abs((o.reward - income_t) - expected_gap) > 1e-9) constant = false;
  }
  CHECK(constant);
}

TEST_CASE("cyclic correction cost") {
  const SystemParameters p;
  CHECK(cyclic_correction_cost(22, 31, p) == doctest::Approx(10.0));
  CHECK(cyclic_correction_cost(31, 31, p) == 0.0);
  CHECK(cyclic_correction_cost(41, 31, p) == doctest::Approx(0.45));
  CHECK_THROWS_AS(cyclic_correction_cost(-1, 5, p), std::invalid_argument);
}

TEST_CASE("trajectory export schema") {
  const SystemParameters p;
  const Dataset ds = synthesize_dataset(4);
  EpisodeConfig cfg;
  cfg.t_horizon = 5;
  cfg.init_soc_mode = InitSocMode::half_capacity;
  cfg.init_day_mode = InitDayMode::fixed;
  Rng64 rng(1);
  const DesignPoint design{20, 30};
  MdpState initial = reset(cfg, design, ds, rng);
  const Rollout r = rollout([](const MdpState&) { return 5.0; }, design, cfg, ds, p, rng);
  const std::string path = "test_trajectory.csv";
  write_trajectory(initial, r.trajectory, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,h,d,soc,p_b,p_imp,p_exp,reward");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 5);
  in.close();
  std::remove(path.c_str());
}

TEST_SUITE_END();
