#pragma once

#include <string>

#include "bdlab/losses.hpp"
#include "bdlab/task.hpp"
#include "bdlab/trigger.hpp"

namespace bdlab {

struct AttackHyperparams {
  double alpha_star = 0.9;
  double beta = 0.1;
  std::size_t epoch_adj = 3;
  double delta = 0.1;
  double zeta = 0.1;
  double omega_penalty = 0.1;
  std::uint64_t seed = 0;

  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t benign_epochs = 400;
  std::size_t trigger_epochs = 40;
  std::size_t disc_epochs = 30;
  std::size_t refine_epochs = 15;
  std::size_t backdoor_epochs = 1000;
  std::size_t clean_pool_size = 32;
  std::vector<std::size_t> hidden = {32, 16};

  void validate() const;
};

struct RunLogEntry {
  std::string phase;
  std::size_t epoch = 0;
  double loss = 0.0;
  double asr = 0.0;
  double alpha_estimate = 0.0;
};

struct AttackResult {
  TriggerNet trigger;
  ModelParams backdoored;
  ModelParams benign;
  std::vector<RunLogEntry> log;
  bool trigger_ineffective = false;
  double disc_loss_before = 0.0;  // fresh discriminator, pre-refinement
  double disc_loss_after = 0.0;   // fresh discriminator, post-refinement
};

// Algorithm-1 attack. The backdoor region is given as dataset indices; the
// harness passes every source-class point.
AttackResult tsa_attack(const LabeledDataset& dataset,
                        const std::vector<std::size_t>& region_idx,
                        std::size_t target, const AttackHyperparams& hyper);

// Fraction of valid eval inputs driven to the target. When a benign reference
// is supplied, inputs with f_P(x) = t or f_P(A(x)) = t are filtered out first.
double asr(const ModelParams& f_b, const TriggerNet& trigger,
           const std::vector<Eigen::VectorXd>& eval_inputs, std::size_t target,
           const ModelParams* f_p = nullptr);

std::size_t grid_cell_index(const Eigen::VectorXd& p, std::size_t grid_n);

struct MeasuredAlpha {
  double alpha = 0.0;  // exact discretized value; equals S when Z < 1
  bool s_mode = false;
  double alpha_sampled = 0.0;
  double distance = 0.0;
  double kappa = 0.0;
  double z_norm = 0.0;
  std::size_t region_cells = 0;
};

// Discretizes the attack onto the given grid task (prior supplied by the
// generator, conditionals re-read from f_P), builds the spec from the learned
// trigger plus f_b's rows on A(B), and reports the exact alpha alongside the
// sampled cross-check.
MeasuredAlpha measured_alpha(const FiniteTask& grid, std::size_t grid_n,
                             const ModelParams& f_p, const ModelParams& f_b,
                             const TriggerNet& trigger, std::size_t source,
                             std::size_t target, double beta,
                             std::uint64_t seed = 0);

}  // namespace bdlab
