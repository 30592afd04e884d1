#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bdlab/harness.hpp"

using namespace bdlab;

namespace {

// 1-D Gaussian pdf integrated with composite Simpson; independent of the
// closed-form CDF used by the generator.
double simpson_gauss(double lo, double hi, double mean, double sigma) {
  const int n = 2000;  // even
  double h = (hi - lo) / n;
  auto pdf = [&](double x) {
    double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
  };
  double acc = pdf(lo) + pdf(hi);
  for (int i = 1; i < n; ++i) acc += pdf(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double quadrature_prior(const GeneratorSpec& gen, std::size_t ix,
                        std::size_t iy) {
  double n = static_cast<double>(gen.grid_n);
  double total = 0.0;
  for (const auto& cls : gen.classes) {
    double cell = 0.0, box = 0.0;
    for (const auto& blob : cls.blobs) {
      cell += blob.weight *
              simpson_gauss(ix / n, (ix + 1) / n, blob.mean[0], blob.sigma) *
              simpson_gauss(iy / n, (iy + 1) / n, blob.mean[1], blob.sigma);
      box += blob.weight * simpson_gauss(0.0, 1.0, blob.mean[0], blob.sigma) *
             simpson_gauss(0.0, 1.0, blob.mean[1], blob.sigma);
    }
    total += cell / (box * gen.classes.size());
  }
  return total;
}

}  // namespace

TEST_CASE("symmetric two-blob grid is mirror symmetric") {
  GeneratorSpec gen = two_blob_spec(0.5, 0.1);
  gen.grid_n = 16;
  auto gt = generate_task(gen, 7);
  std::size_t n = gen.grid_n;
  for (std::size_t iy = 0; iy < n; ++iy) {
    for (std::size_t ix = 0; ix < n; ++ix) {
      std::size_t cell = iy * n + ix;
      std::size_t mirror = iy * n + (n - 1 - ix);
      CHECK(std::abs(gt.grid.prior[cell] - gt.grid.prior[mirror]) <= 1e-9);
      CHECK(std::abs(gt.grid.conditional[cell][0] -
                     gt.grid.conditional[mirror][1]) <= 1e-9);
    }
  }
}

TEST_CASE("grid mass totals one and rows are proper conditionals") {
  GeneratorSpec gen = two_blob_spec();
  gen.grid_n = 32;
  auto gt = generate_task(gen, 11);
  double total = 0.0;
  for (double p : gt.grid.prior) total += p;
  CHECK(std::abs(total - 1.0) <= 1e-9);
  CHECK_NOTHROW(gt.grid.validate());
  CHECK(gt.grid.num_inputs() == 32 * 32);
  CHECK(gt.grid.coords[0][0] == doctest::Approx(0.5 / 32));
  // Row-major cell order, y-major: the cell above index 0 sits at index 32.
  CHECK(gt.grid.coords[32][1] == doctest::Approx(1.5 / 32));
}

TEST_CASE("cell masses match a quadrature oracle") {
  GeneratorSpec gen;
  gen.classes.resize(2);
  gen.classes[0].blobs.push_back({{0.3, 0.4}, 0.12, 1.0});
  gen.classes[0].blobs.push_back({{0.2, 0.8}, 0.05, 0.5});
  gen.classes[1].blobs.push_back({{0.7, 0.6}, 0.15, 2.0});
  gen.grid_n = 8;
  auto gt = generate_task(gen, 3);
  for (auto [ix, iy] : {std::pair<std::size_t, std::size_t>{2, 3},
                        {0, 0},
                        {5, 4},
                        {7, 7}}) {
    CHECK(std::abs(gt.grid.prior[iy * 8 + ix] -
                   quadrature_prior(gen, ix, iy)) <= 1e-6);
  }
}

TEST_CASE("generated dataset is balanced, in-box and clustered") {
  GeneratorSpec gen = two_blob_spec(0.5, 0.1);
  gen.points_per_class = 150;
  auto gt = generate_task(gen, 42);
  REQUIRE(gt.dataset.points.size() == 300);
  std::size_t count0 = 0;
  double mean0 = 0.0, mean1 = 0.0;
  for (const auto& p : gt.dataset.points) {
    CHECK(p.x(0) >= 0.0);
    CHECK(p.x(0) <= 1.0);
    CHECK(p.x(1) >= 0.0);
    CHECK(p.x(1) <= 1.0);
    if (p.y == 0) {
      ++count0;
      mean0 += p.x(0);
    } else {
      mean1 += p.x(0);
    }
  }
  CHECK(count0 == 150);
  CHECK(mean0 / 150 == doctest::Approx(0.25).epsilon(0.15));
  CHECK(mean1 / 150 == doctest::Approx(0.75).epsilon(0.15));
}

TEST_CASE("generation is deterministic in the seed") {
  GeneratorSpec gen = two_blob_spec();
  gen.points_per_class = 40;
  auto a = generate_task(gen, 9);
  auto b = generate_task(gen, 9);
  auto c = generate_task(gen, 10);
  REQUIRE(a.dataset.points.size() == b.dataset.points.size());
  bool same = true, same_c = true;
  for (std::size_t i = 0; i < a.dataset.points.size(); ++i) {
    same = same && a.dataset.points[i].x == b.dataset.points[i].x;
    same_c = same_c && a.dataset.points[i].x == c.dataset.points[i].x;
  }
  CHECK(same);
  CHECK_FALSE(same_c);
  CHECK(a.grid.prior == b.grid.prior);
}

TEST_CASE("generator rejects degenerate mixtures") {
  GeneratorSpec gen = two_blob_spec();
  gen.classes[1].blobs[0].weight = 0.0;
  CHECK_THROWS_AS(generate_task(gen, 1), std::invalid_argument);

  GeneratorSpec one_class;
  one_class.classes.resize(1);
  one_class.classes[0].blobs.push_back({{0.5, 0.5}, 0.1, 1.0});
  CHECK_THROWS_AS(generate_task(one_class, 1), std::invalid_argument);

  GeneratorSpec bad_sigma = two_blob_spec();
  bad_sigma.classes[0].blobs[0].sigma = 0.0;
  CHECK_THROWS_AS(generate_task(bad_sigma, 1), std::invalid_argument);
}

TEST_CASE("pearson matches hand values") {
  std::vector<double> xs = {1, 2, 3, 4, 5};
  std::vector<double> doubled = {2, 4, 6, 8, 10};
  std::vector<double> negated = {-1, -2, -3, -4, -5};
  CHECK(std::abs(pearson(xs, doubled) - 1.0) <= 1e-12);
  CHECK(std::abs(pearson(xs, negated) + 1.0) <= 1e-12);
  std::vector<double> ys = {2, 1, 4, 3, 7};
  CHECK(std::abs(pearson(xs, ys) - 12.0 / std::sqrt(212.0)) <= 1e-12);
}

TEST_CASE("pearson rejects degenerate input") {
  CHECK_THROWS_AS(pearson({1.0}, {2.0}), std::invalid_argument);
  CHECK_THROWS_AS(pearson({1.0, 2.0}, {2.0}), std::invalid_argument);
  CHECK_THROWS_AS(pearson({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}),
                  std::invalid_argument);
}

TEST_CASE("sweep config validation") {
  SweepConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  SweepConfig bad = cfg;
  bad.alpha_stars = {0.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.source = bad.target;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.benign_count = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

namespace {

SweepConfig tiny_sweep(const std::string& out_dir = "") {
  SweepConfig cfg;
  cfg.gen = two_blob_spec();
  cfg.gen.points_per_class = 60;
  cfg.gen.grid_n = 16;
  cfg.alpha_stars = {0.5};
  cfg.benign_count = 2;
  cfg.backdoored_count = 2;
  cfg.attack.benign_epochs = 150;
  cfg.attack.backdoor_epochs = 200;
  cfg.attack.trigger_epochs = 15;
  cfg.attack.disc_epochs = 10;
  cfg.attack.refine_epochs = 5;
  cfg.output_diff.restarts = 3;
  cfg.output_diff.steps = 40;
  cfg.diff_inputs = 20;
  cfg.seed = 5;
  cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_CASE("sweep output is byte stable and lands on disk") {
  auto dir = std::filesystem::temp_directory_path() / "bdlab_sweep_test";
  std::filesystem::remove_all(dir);
  auto a = run_sweep(tiny_sweep(dir.string()));
  auto b = run_sweep(tiny_sweep());
  CHECK(a.csv == b.csv);
  CHECK(a.runs_launched == 2);
  REQUIRE(a.rows.size() == 1);
  CHECK(a.rows[0].included + a.rows[0].excluded == 2);
  CHECK(a.runs_excluded == a.rows[0].excluded);

  std::ifstream csv(dir / "sweep.csv", std::ios::binary);
  REQUIRE(csv.good());
  std::stringstream buf;
  buf << csv.rdbuf();
  CHECK(buf.str() == a.csv);
  CHECK(std::filesystem::exists(dir / "sweep.svg"));
  std::ifstream svg(dir / "sweep.svg");
  std::stringstream svg_buf;
  svg_buf << svg.rdbuf();
  CHECK(svg_buf.str().find("<svg") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("two-point sweep orders gamma with alpha*") {
  SweepConfig cfg;
  cfg.gen = two_blob_spec();
  // Class-1 ambiguity blob over the class-0 cluster keeps benign models
  // disagreeing there, so the output-diff score grades instead of saturating.
  cfg.gen.classes[1].blobs.push_back({{0.25, 0.5}, 0.04, 0.04});
  cfg.gen.points_per_class = 100;
  cfg.alpha_stars = {0.2, 0.8};
  cfg.benign_count = 10;
  cfg.backdoored_count = 10;
  cfg.attack.trigger_epochs = 25;
  cfg.attack.disc_epochs = 20;
  cfg.attack.refine_epochs = 10;
  // The weight and representation detectors split the arms on data provenance
  // alone; only the output-difference search grades with attack strength.
  cfg.detectors = {"output_diff"};
  // A tight perturbation budget keeps the low alpha* row off the accuracy
  // ceiling at ten models per arm.
  cfg.output_diff.delta = 0.08;
  cfg.seed = 21;
  auto res = run_sweep(cfg);
  REQUIRE(res.rows.size() == 2);
  CHECK(res.runs_launched == 20);
  std::size_t accounted = res.runs_excluded;
  for (const auto& row : res.rows) accounted += row.included;
  CHECK(accounted == 20);
  CHECK(res.rows[1].gamma > res.rows[0].gamma);
  CHECK(res.rows[1].alpha_over_beta >= res.rows[0].alpha_over_beta);
  CHECK(res.csv.rfind("alpha_star,", 0) == 0);
}
