#include <doctest.h>

#include <cmath>
#include <memory>

#include "../estimator_support.hpp"
#include "../support.hpp"
#include "bdlab/estimators.hpp"
#include "bdlab/task.hpp"

using namespace bdlab;
using namespace bdlab::testing;

TEST_CASE("approx_alpha on the fixture with exact oracles") {
  auto task = t4_task();
  auto spec = t4_mixed_spec();
  auto g_b = exact_backdoor_oracle(task, spec);
  auto g_p = exact_primary_oracle(task);
  std::vector<std::vector<double>> samples = {task.coords[3]};
  CHECK(approx_alpha(samples, g_b, g_p, 1.0, 1.0, 1.0) ==
        doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("approx_alpha vanishes when the oracles agree") {
  auto task = t4_task();
  auto g_p = exact_primary_oracle(task);
  std::vector<std::vector<double>> samples = {task.coords[1], task.coords[3]};
  CHECK(approx_alpha(samples, g_p, g_p, 0.5, 2.0, 1.0) ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(approx_alpha({}, g_p, g_p, 1.0, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("exhaustive sampling under the trigger measure recovers alpha") {
  Rng rng(31);
  for (int i = 0; i < 25; ++i) {
    auto inst = uniform_bijective_instance(rng);
    auto rep = backdoor_distance(inst.task, inst.spec);
    auto g_b = exact_backdoor_oracle(inst.task, inst.spec);
    auto g_p = exact_primary_oracle(inst.task);
    std::vector<std::vector<double>> samples;
    for (std::size_t z : inst.spec.trigger.region)
      samples.push_back(inst.task.coords[inst.spec.trigger.map_of(z)]);
    double est = approx_alpha(samples, g_b, g_p, inst.spec.beta, rep.kappa,
                              rep.z_norm);
    CHECK(est == doctest::Approx(rep.alpha).epsilon(1e-6));
  }
}

TEST_CASE("iid sampled alpha stays within the 3/sqrt(m) band") {
  Rng rng(47);
  for (int seed_trial = 0; seed_trial < 50; ++seed_trial) {
    auto inst = uniform_bijective_instance(rng);
    auto rep = backdoor_distance(inst.task, inst.spec);
    auto g_b = exact_backdoor_oracle(inst.task, inst.spec);
    auto g_p = exact_primary_oracle(inst.task);
    const std::size_t m = 64;
    std::vector<std::vector<double>> samples;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t z = inst.spec.trigger.region[rng.index(inst.spec.trigger.region.size())];
      samples.push_back(inst.task.coords[inst.spec.trigger.map_of(z)]);
    }
    double est = approx_alpha(samples, g_b, g_p, inst.spec.beta, rep.kappa,
                              rep.z_norm);
    CHECK(std::abs(est - rep.alpha) <= 3.0 / std::sqrt(static_cast<double>(m)));
  }
}

TEST_CASE("extent of a disc probed from its center") {
  auto disc = disc_region(0.5, 0.5, 0.2);
  // First draw is the origin; pin it to the center so every ray has the same
  // analytic boundary distance.
  auto counted = disc;
  auto calls = std::make_shared<int>(0);
  counted.sample = [disc, calls](Rng& rng) {
    if ((*calls)++ == 0) return std::vector<double>{0.5, 0.5};
    return disc.sample(rng);
  };
  EstimatorConfig cfg;
  cfg.n_origins = 1;
  Rng rng(5);
  auto est = estimate_extent(counted, cfg, rng);
  CHECK_FALSE(est.clamped);
  CHECK(est.extent == doctest::Approx(0.2).epsilon(0.1));
  CHECK(std::abs(est.extent - 0.2) < 0.02);
}

TEST_CASE("axis-aligned rays in a square reach side/2 from the center") {
  auto square = square_region(0.5, 0.5, 0.4);
  EstimatorConfig cfg;
  cfg.n_origins = 1;
  cfg.n_dirs = 2;
  auto fixed = square;
  auto calls = std::make_shared<int>(0);
  fixed.sample = [calls](Rng&) -> std::vector<double> {
    switch ((*calls)++) {
      case 0: return {0.5, 0.5};   // origin at the center
      case 1: return {0.6, 0.5};   // +x direction
      default: return {0.5, 0.62};  // +y direction
    }
  };
  Rng rng(1);
  auto est = estimate_extent(fixed, cfg, rng);
  CHECK(est.extent == doctest::Approx(0.2).epsilon(1e-3));
}

TEST_CASE("kappa_v from disc and square pairs") {
  EstimatorConfig cfg;
  cfg.seed = 9;
  double same = estimate_kappa_v(disc_region(0.5, 0.5, 0.15),
                                 disc_region(0.5, 0.5, 0.15), cfg);
  CHECK(std::abs(same - 1.0) <= 0.1);

  double discs = estimate_kappa_v(disc_region(0.4, 0.4, 0.2),
                                  disc_region(0.7, 0.7, 0.1), cfg);
  CHECK(std::abs(discs - 2.0) <= 0.3);

  double squares = estimate_kappa_v(square_region(0.4, 0.4, 0.45),
                                    square_region(0.75, 0.75, 0.15), cfg);
  CHECK(std::abs(squares - 3.0) <= 0.45);
}

TEST_CASE("ln kappa_pr closed-form spot checks") {
  std::vector<std::vector<double>> a = {{0.3, 0.4}, {0.3, 0.4}, {0.3, 0.4}};
  CHECK(estimate_ln_kappa_pr(a, a).value == doctest::Approx(0.0));
  CHECK(estimate_ln_kappa_pr(a, a).degenerate_variance);

  std::vector<std::vector<double>> unit = {{1.0, 0.0}, {0.0, 1.0}};
  std::vector<std::vector<double>> zero = {{0.0, 0.0}, {0.0, 0.0}};
  auto r = estimate_ln_kappa_pr(unit, zero);
  CHECK(r.value == doctest::Approx(-0.5));
}

TEST_CASE("ln kappa_pr tracks the numeric expectation ratio") {
  GaussianPriorModel prior{{0.0, 0.0}, 1.0};
  auto region_b = disc_region(0.5, 0.0, 0.2);
  auto region_ab = disc_region(1.6, 0.0, 0.2);

  // Quadrature oracle for ln(E_B Pr(z) / E_AB Pr(z)) with z = G^{-1}(x) and
  // x uniform over each disc.
  auto mean_density = [&](double cx, double r) {
    const int n = 400;
    double sum = 0.0;
    long count = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double x = cx - r + 2.0 * r * (i + 0.5) / n;
        double y = -r + 2.0 * r * (j + 0.5) / n;
        if ((x - cx) * (x - cx) + y * y > r * r) continue;
        sum += std::exp(-0.5 * (x * x + y * y));
        ++count;
      }
    return sum / static_cast<double>(count);
  };
  double oracle = std::log(mean_density(0.5, 0.2) / mean_density(1.6, 0.2));

  Rng rng(77);
  std::vector<std::vector<double>> z_b, z_ab;
  for (int i = 0; i < 100; ++i) {
    z_b.push_back(prior.inverse(region_b.sample(rng)));
    z_ab.push_back(prior.inverse(region_ab.sample(rng)));
  }
  auto est = estimate_ln_kappa_pr(z_b, z_ab);
  CHECK(std::abs(est.value - oracle) <= 0.15);
}

TEST_CASE("combined kappa estimate") {
  GaussianPriorModel prior{{0.5, 0.5}, 1.0};
  EstimatorConfig cfg;
  cfg.seed = 13;

  auto same = estimate_kappa(disc_region(0.5, 0.5, 0.2),
                             disc_region(0.5, 0.5, 0.2), prior, cfg);
  CHECK(std::abs(same.kappa - 1.0) <= 0.15);
  CHECK(same.kappa == doctest::Approx(same.kappa_v * std::exp(same.ln_kappa_pr)));

  // Fixture-like symmetric pair: equal regions either side of the prior mean
  // mirror the exact kappa_of = 1 on the discrete fixture.
  auto task = t4_task();
  CHECK(kappa_of(task, t4_point_spec().trigger) == doctest::Approx(1.0));
  auto sym = estimate_kappa(disc_region(0.35, 0.5, 0.1),
                            disc_region(0.65, 0.5, 0.1), prior, cfg);
  CHECK(std::abs(sym.kappa - 1.0) <= 0.2);

  // Same-size discs at different distances from the mean, against a
  // quadrature oracle for the defining extent-ratio x density-ratio product.
  auto region_b = disc_region(0.55, 0.5, 0.12);
  auto region_ab = disc_region(1.1, 0.5, 0.12);
  auto mean_density = [&](double cx, double r) {
    const int n = 400;
    double sum = 0.0;
    long count = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double x = cx - r + 2.0 * r * (i + 0.5) / n;
        double y = 0.5 - r + 2.0 * r * (j + 0.5) / n;
        if ((x - cx) * (x - cx) + (y - 0.5) * (y - 0.5) > r * r) continue;
        double zx = x - 0.5, zy = y - 0.5;
        sum += std::exp(-0.5 * (zx * zx + zy * zy));
        ++count;
      }
    return sum / static_cast<double>(count);
  };
  double oracle = 1.0 * mean_density(0.55, 0.12) / mean_density(1.1, 0.12);
  auto est = estimate_kappa(region_b, region_ab, prior, cfg);
  CHECK(std::abs(est.kappa - oracle) / oracle <= 0.25);
}

TEST_CASE("prior model inversion is exact and estimators are seed-stable") {
  GaussianPriorModel prior{{0.2, -0.4}, 2.5};
  std::vector<double> z = {0.7, -1.3};
  auto back = prior.inverse(prior.generate(z));
  CHECK(back[0] == doctest::Approx(z[0]).epsilon(1e-12));
  CHECK(back[1] == doctest::Approx(z[1]).epsilon(1e-12));

  EstimatorConfig cfg;
  cfg.seed = 21;
  auto a = estimate_kappa(disc_region(0.4, 0.4, 0.15),
                          disc_region(0.6, 0.6, 0.1), prior, cfg);
  auto b = estimate_kappa(disc_region(0.4, 0.4, 0.15),
                          disc_region(0.6, 0.6, 0.1), prior, cfg);
  CHECK(a.kappa == b.kappa);
  CHECK(a.ext_b == b.ext_b);
}
