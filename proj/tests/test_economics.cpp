#include <cmath>
#include <cstdio>
#include <fstream>

#include "codesign/economics.hpp"
#include "codesign/rng.hpp"
#include "doctest.h"

using namespace codesign;

namespace {

// Independent oracle: evaluate the annuity expression in extended precision.
long double annuity_oracle(long double r, long double l, long double t) {
  const long double scale = t / 8760.0L;
  if (r == 0.0L) return scale / l;
  const long double growth = powl(1.0L + r, l);
  return r * growth / (growth - 1.0L) * scale;
}

}  // namespace

TEST_SUITE_BEGIN("economics");

TEST_CASE("default parameters match the reference set") {
  const SystemParameters p;
  CHECK(p.c_imp == 1.0);
  CHECK(p.c_exp == -0.05);
  CHECK(p.p_grid_max == 10000.0);
  CHECK(p.p_nom_min == 0.0);
  CHECK(p.p_nom_max == 200.0);
  CHECK(p.b_min == 0.0);
  CHECK(p.b_max == 200.0);
  CHECK(p.eta_b == 0.9);
  CHECK(p.l_pv == 20.0);
  CHECK(p.l_b == 30.0);
  CHECK(p.cx_pv_fix == 50.0);
  CHECK(p.cx_pv_var == 200.0);
  CHECK(p.ox_pv_fix == 3.0);
  CHECK(p.ox_pv_var == 10.0);
  CHECK(p.cx_b_fix == 30.0);
  CHECK(p.cx_b_var == 110.0);
  CHECK(p.ox_b_fix == 5.0);
  CHECK(p.ox_b_var == 6.0);
  CHECK(p.r == 0.05);
  CHECK(p.dt == 1.0);
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("annuity factor") {
  CHECK(std::abs(annuity_factor(0.05, 20, 8760) - 0.0802426) < 1e-6);
  CHECK(std::abs(annuity_factor(0.05, 30, 8760) - 0.0650514) < 1e-6);
  CHECK(annuity_factor(0.05, 20, 0) == 0.0);

  // Agreement with the extended-precision oracle on assorted inputs.
  const double cases[][3] = {{0.05, 20.0, 8760.0}, {0.05, 30.0, 8760.0},
                             {0.03, 10.0, 168.0}, {0.12, 25.0, 24.0}};
  for (const auto& c : cases) {
    const double r = c[0], l = c[1], t = c[2];
    const double got = annuity_factor(r, l, t);
    const double want = static_cast<double>(annuity_oracle(r, l, t));
    CHECK(std::abs(got - want) < 1e-12 * std::max(1.0, std::abs(want)));
  }

  // Straight-line limit at r = 0.
  CHECK(annuity_factor(0.0, 20, 8760) == doctest::Approx(1.0 / 20).epsilon(1e-12));

  CHECK_THROWS_AS(annuity_factor(-0.01, 20, 8760), std::invalid_argument);
  CHECK_THROWS_AS(annuity_factor(0.05, 0.5, 8760), std::invalid_argument);
  CHECK_THROWS_AS(annuity_factor(0.05, 20, -1), std::invalid_argument);
}

TEST_CASE("annuity factor monotonicity") {
  Rng64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const double r = rng.uniform(0.001, 0.2);
    const double l = rng.uniform(1.0, 40.0);
    const double t = rng.uniform(1.0, 8760.0);
    const double base = annuity_factor(r, l, t);
    CHECK(annuity_factor(r + 0.01, l, t) > base);
    CHECK(annuity_factor(r, l, t + 10.0) > base);
    CHECK(annuity_factor(r, l + 1.0, t) < base);
  }
}

TEST_CASE("pv costs") {
  const SystemParameters p;
  auto [cx0, ox0] = pv_costs(0.0, p);
  CHECK(cx0 == 50.0);
  CHECK(ox0 == 3.0);
  auto [cx1, ox1] = pv_costs(200.0, p);
  CHECK(cx1 == doctest::Approx(40050.0));
  CHECK(ox1 == doctest::Approx(2003.0));
  auto [cx2, ox2] = pv_costs(63.65, p);
  CHECK(cx2 == doctest::Approx(12780.0));
  CHECK(ox2 == doctest::Approx(639.5));
  CHECK_THROWS_AS(pv_costs(-1.0, p), std::invalid_argument);
}

TEST_CASE("battery costs") {
  const SystemParameters p;
  auto [cx0, ox0] = battery_costs(0.0, p);
  CHECK(cx0 == 30.0);
  CHECK(ox0 == 5.0);
  auto [cx1, ox1] = battery_costs(200.0, p);
  CHECK(cx1 == doctest::Approx(22030.0));
  CHECK(ox1 == doctest::Approx(1205.0));
  auto [cx2, ox2] = battery_costs(64.9, p);
  CHECK(cx2 == doctest::Approx(7169.0));
  CHECK(ox2 == doctest::Approx(394.4));
  CHECK_THROWS_AS(battery_costs(-0.1, p), std::invalid_argument);
}

TEST_CASE("grid step cost") {
  const SystemParameters p;
  CHECK(grid_step_cost(10, 0, p) == doctest::Approx(10.0));
  CHECK(grid_step_cost(0, 0, p) == 0.0);
  CHECK(grid_step_cost(0, 10, p) == doctest::Approx(0.5));
  CHECK_THROWS_AS(grid_step_cost(-1, 0, p), std::invalid_argument);
  CHECK_THROWS_AS(grid_step_cost(0, 10001, p), std::invalid_argument);
}

TEST_CASE("fixed cost per horizon") {
  const SystemParameters p;
  CHECK(std::abs(fixed_cost_per_horizon({0, 0}, p, 8760) - 13.96) < 0.01);
  CHECK(fixed_cost_per_horizon({0, 0}, p, 0) == 0.0);
  CHECK(std::abs(fixed_cost_per_horizon({63.65, 64.9}, p, 8760) - 2525.9) < 0.5);
}

TEST_CASE("income") {
  const SystemParameters p;
  CHECK(income({10}, {0}, p) == doctest::Approx(-10.0));
  CHECK(income({0, 0, 0}, {0, 0, 0}, p) == 0.0);
  CHECK(income({0}, {10}, p) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(income({1, 2}, {1}, p), std::invalid_argument);
}

TEST_CASE("income equals the negated grid cost on random series") {
  const SystemParameters p;
  Rng64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const int n = rng.uniform_int(1, 48);
    std::vector<double> imp(n), exp(n);
    for (int i = 0; i < n; ++i) {
      imp[i] = rng.uniform(0, 20);
      exp[i] = rng.uniform(0, 20);
    }
    double grid = 0.0;
    for (int i = 0; i < n; ++i) grid += grid_step_cost(imp[i], exp[i], p);
    CHECK(income(imp, exp, p) == doctest::Approx(-grid).epsilon(1e-12));
  }
}

TEST_CASE("totex decomposes into fixed cost plus grid cost") {
  const SystemParameters p;
  Rng64 rng(19);
  for (int k = 0; k < 50; ++k) {
    const DesignPoint d{rng.uniform(0, 200), rng.uniform(0, 200)};
    const int n = rng.uniform_int(1, 168);
    std::vector<double> imp(n), exp(n);
    for (int i = 0; i < n; ++i) {
      imp[i] = rng.uniform(0, 30);
      exp[i] = rng.uniform(0, 30);
    }
    const CostBreakdown cb = cost_breakdown(d, imp, exp, p, n);
    CHECK(cb.totex == doctest::Approx(cb.capex_amortized + cb.opex_scaled + cb.grid_cost));
    CHECK(cb.income == -cb.grid_cost);
    const double fixed = fixed_cost_per_horizon(d, p, n);
    CHECK(cb.totex == doctest::Approx(fixed + cb.grid_cost).epsilon(1e-12));
  }
}

TEST_CASE("cost functions are affine in the size") {
  const SystemParameters p;
  Rng64 rng(23);
  for (int k = 0; k < 100; ++k) {
    const double alpha = rng.uniform(0.1, 4.0);
    const double x = rng.uniform(0.0, 50.0);
    auto [pv_cx, pv_ox] = pv_costs(x, p);
    auto [pv_cx_s, pv_ox_s] = pv_costs(alpha * x, p);
    auto [pv_cx0, pv_ox0] = pv_costs(0.0, p);
    CHECK(pv_cx_s - pv_cx0 == doctest::Approx(alpha * (pv_cx - pv_cx0)));
    CHECK(pv_ox_s - pv_ox0 == doctest::Approx(alpha * (pv_ox - pv_ox0)));
    auto [b_cx, b_ox] = battery_costs(x, p);
    auto [b_cx_s, b_ox_s] = battery_costs(alpha * x, p);
    auto [b_cx0, b_ox0] = battery_costs(0.0, p);
    CHECK(b_cx_s - b_cx0 == doctest::Approx(alpha * (b_cx - b_cx0)));
    CHECK(b_ox_s - b_ox0 == doctest::Approx(alpha * (b_ox - b_ox0)));
  }
}

TEST_CASE("parameter config loading") {
  const std::string path = "test_params_config.txt";
  {
    std::ofstream f(path);
    f << "# overrides\n";
    f << "c_imp = 0.8\n";
    f << "eta_b=0.95\n";
    f << "b_max = 120\n";
  }
  const SystemParameters p = SystemParameters::from_config_file(path);
  CHECK(p.c_imp == 0.8);
  CHECK(p.eta_b == 0.95);
  CHECK(p.b_max == 120.0);
  CHECK(p.c_exp == -0.05);  // untouched defaults survive
  CHECK(p.l_pv == 20.0);

  {
    std::ofstream f(path);
    f << "no_such_key = 3\n";
  }
  CHECK_THROWS(SystemParameters::from_config_file(path));
  {
    std::ofstream f(path);
    f << "eta_b = 1.5\n";
  }
  CHECK_THROWS(SystemParameters::from_config_file(path));
  {
    std::ofstream f(path);
    f << "c_imp = not-a-number\n";
  }
  CHECK_THROWS(SystemParameters::from_config_file(path));
  std::remove(path.c_str());
}

TEST_SUITE_END();
