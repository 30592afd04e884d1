#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bdlab/mlp.hpp"
#include "bdlab/task.hpp"

namespace bdlab {

// ---------------------------------------------------------------------------
// Output-difference detection: search for a bounded perturbation on which a
// candidate model's target probability exceeds a benign reference's.

struct OutputDiffConfig {
  double delta = 0.5;
  std::size_t restarts = 10;
  std::size_t steps = 120;
  double lr = 0.05;
  std::uint64_t seed = 0;
};

struct OutputDiffScore {
  double score = 0.0;        // best achieved expected-probability gap
  std::size_t target = 0;    // label achieving the best gap
  Eigen::VectorXd offset;    // perturbation realizing the score
  bool diverged = false;     // a restart went non-finite; best-so-far kept
};

OutputDiffScore detect_output_diff(const ModelParams& candidate,
                                   const ModelParams& reference,
                                   const std::vector<Eigen::VectorXd>& inputs,
                                   const OutputDiffConfig& config);

// Expected target-probability gap on A(B) between the backdoor conditionals
// and the primary conditionals, evaluated exactly on a finite task with the
// poison rate pinned at 1/kappa. The gap never exceeds alpha * kappa.
struct Lemma3Report {
  double lhs = 0.0;
  double alpha = 0.0;  // at beta = 1/kappa
  double kappa = 0.0;
  double bound = 0.0;  // alpha * kappa
  bool holds = false;
};

Lemma3Report check_lemma3_bound(const FiniteTask& task, const BackdoorSpec& spec,
                                double tol = 1e-6);

// ---------------------------------------------------------------------------
// Weight-space detection: minimum L2 distance to a benign population after
// removing neuron permutation and sign symmetry.

// Per hidden layer: flip each neuron so its first significant incoming weight
// is positive (tanh is odd, so the outgoing column flips too), then sort
// neurons by descending incoming-weight norm.
ModelParams canonicalize_model(const ModelParams& m);

// L2 distance between flattened canonical forms.
double weight_distance(const ModelParams& a, const ModelParams& b);

struct WeightDistanceReport {
  double score = 0.0;      // min distance to the population
  double threshold = 0.0;  // 95th percentile of leave-one-out distances
  bool flagged = false;
};

WeightDistanceReport detect_weight_distance(
    const ModelParams& candidate, const std::vector<ModelParams>& population);

// Max-gain output gap between two affine models on a sample, scaled by the
// poison rate; feeds the weight-distance and task-drift bound checks.
double affine_gain_alpha(const ModelParams& f_b, const ModelParams& f_p,
                         const std::vector<Eigen::VectorXd>& X, double beta);

// kappa * sqrt(mL) / ||phi(X)||_2 * alpha <= ||w_b - w_P||_2 for affine
// models, where phi is the parameter Jacobian shared by both models.
struct Lemma4Report {
  double lhs = 0.0;
  double rhs = 0.0;
  double phi_norm = 0.0;  // spectral norm of phi(X)
  bool holds = false;
};

Lemma4Report check_lemma4_bound(const ModelParams& f_b, const ModelParams& f_p,
                                const std::vector<Eigen::VectorXd>& X,
                                double alpha, double kappa, double tol = 1e-6);

// sqrt(sum_x ||f_b(x) - f_P(x)||_2^2) over pre-softmax outputs.
double task_drift(const ModelParams& f_b, const ModelParams& f_p,
                  const std::vector<Eigen::VectorXd>& X);

// In the affine regime the drift is at least alpha * sqrt(mL) / beta.
struct TaskDriftReport {
  double drift = 0.0;
  double bound = 0.0;
  bool holds = false;
};

TaskDriftReport check_task_drift_bound(const ModelParams& f_b,
                                       const ModelParams& f_p,
                                       const std::vector<Eigen::VectorXd>& X,
                                       double alpha, double beta,
                                       double tol = 1e-6);

// ---------------------------------------------------------------------------
// Input-space detection: two-sample Hotelling T^2 over representation groups.

struct HotellingReport {
  double t2 = 0.0;
  std::size_t n_p = 0;
  std::size_t n_b = 0;
  Eigen::VectorXd m_p;
  Eigen::VectorXd m_b;
  Eigen::MatrixXd sigma;     // pooled covariance (ridged if singular)
  double lambda_max = 0.0;   // largest eigenvalue of sigma^{-1}
  double threshold = 0.0;
  bool decision = false;
  bool ridged = false;
};

// Two-sample statistic; requires n_p + n_b > dim + 2.
HotellingReport hotelling_t2(const std::vector<Eigen::VectorXd>& group_p,
                             const std::vector<Eigen::VectorXd>& group_b);

// Deterministic Lloyd split with farthest-pair initialization.
std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>>
two_means_split(const std::vector<Eigen::VectorXd>& points);

// Per predicted class: split the representations in two candidate groups and
// test their means; the model is flagged if any class exceeds the threshold.
std::vector<HotellingReport> detect_hotelling(
    const std::vector<std::vector<Eigen::VectorXd>>& reps_by_class,
    double threshold);

// Nearest-rank percentile over a calibration population of statistics.
double percentile_threshold(std::vector<double> values, double percentile);

// T^2 <= lambda_max * (n_p n_b / (n_p + n_b)) * alpha^2 when the group means
// are at most alpha apart under a shared covariance.
bool check_lemma5_bound(const HotellingReport& report, double alpha,
                        double tol = 1e-6);

// ---------------------------------------------------------------------------
// Detectability score.

struct DetectorScores {
  std::string name;
  std::vector<double> benign;
  std::vector<double> backdoored;
};

struct DetectabilityScore {
  std::vector<std::pair<std::string, double>> per_detector;  // balanced acc
  double max_accuracy = 0.5;
  double gamma = 0.0;
};

// Best-threshold balanced accuracy, maximized over both score directions.
double balanced_accuracy(const std::vector<double>& benign,
                         const std::vector<double>& backdoored);

double gamma_from_accuracy(double accuracy);

DetectabilityScore detectability(const std::vector<DetectorScores>& scores);

}  // namespace bdlab
