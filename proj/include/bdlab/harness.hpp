#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bdlab/attack.hpp"
#include "bdlab/detectors.hpp"
#include "bdlab/task.hpp"

namespace bdlab {

// ---------------------------------------------------------------------------
// Synthetic task generation: axis-aligned Gaussian mixtures on [0,1]^2 with an
// exact grid discretization (cell masses via the Gaussian CDF, no quadrature).

struct GaussianBlob {
  std::vector<double> mean;  // in [0,1]^2
  double sigma = 0.1;        // isotropic
  double weight = 1.0;
};

struct ClassMixture {
  std::vector<GaussianBlob> blobs;
};

struct GeneratorSpec {
  std::vector<ClassMixture> classes;  // >= 2 entries
  std::size_t grid_n = 32;
  std::size_t points_per_class = 200;

  void validate() const;
};

// Balanced two-blob layout used by the smoke fixtures.
GeneratorSpec two_blob_spec(double separation = 0.5, double sigma = 0.04);

struct GeneratedTask {
  LabeledDataset dataset;
  FiniteTask grid;  // row-major cells, iy * grid_n + ix, centers as coords
};

GeneratedTask generate_task(const GeneratorSpec& gen, std::uint64_t seed);

// Grid task with the dataset's cell histogram as prior and per-cell label
// fractions as conditionals (uniform rows for empty cells). The sweep
// measures alpha against this discretization.
FiniteTask empirical_grid_task(const LabeledDataset& dataset,
                               std::size_t grid_n, std::size_t num_labels);

// Sample Pearson correlation; throws on fewer than two points or zero
// variance in either argument.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// ---------------------------------------------------------------------------
// Population sweep over the attack's alpha* knob.

struct SweepConfig {
  GeneratorSpec gen = two_blob_spec();
  std::vector<double> alpha_stars = {0.1, 0.2, 0.3, 0.4, 0.5,
                                     0.6, 0.7, 0.8, 0.9};
  double beta = 0.1;
  std::size_t benign_count = 20;
  std::size_t backdoored_count = 20;
  std::size_t source = 1;
  std::size_t target = 0;
  AttackHyperparams attack;       // alpha_star/beta/seed filled per run
  std::vector<std::string> detectors = {"output_diff", "weight_distance",
                                        "hotelling"};
  OutputDiffConfig output_diff;   // per-model search budget
  std::size_t diff_inputs = 40;   // eval points for the output-diff search
  double asr_floor = 0.3;
  std::size_t threads = 0;        // 0 = hardware concurrency
  std::uint64_t seed = 0;
  std::string out_dir;            // when set: sweep.csv and sweep.svg

  void validate() const;
};

struct SweepRow {
  double alpha_star = 0.0;
  double alpha_over_beta = 0.0;          // mean exact discretized alpha / beta
  double sampled_alpha_over_beta = 0.0;  // sampled cross-check
  std::vector<std::pair<std::string, double>> detector_accuracy;
  double gamma = 0.0;
  std::size_t included = 0;
  std::size_t excluded = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double pearson_gamma_alpha = 0.0;  // between alpha/beta and gamma
  double mean_abs_diff = 0.0;        // |alpha/beta - gamma| statistics
  double std_abs_diff = 0.0;
  std::size_t runs_launched = 0;
  std::size_t runs_excluded = 0;
  std::string csv;  // byte-stable; also written to out_dir when set
};

SweepResult run_sweep(const SweepConfig& config);

std::string sweep_csv(const SweepResult& result);
std::string sweep_svg(const SweepResult& result);

// Largest two-group Hotelling statistic over the model's last hidden layer,
// grouped by predicted label and split with deterministic two-means.
double hotelling_score(const ModelParams& m,
                       const std::vector<Eigen::VectorXd>& eval_inputs,
                       std::size_t num_classes);

// Deterministic work queue: fn(i) for i in [0, n), results in index order.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace bdlab
