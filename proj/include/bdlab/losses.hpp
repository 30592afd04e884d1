#pragma once

#include "bdlab/mlp.hpp"

namespace bdlab {

// Logs inside every loss are clamped at this floor; the matching gradient is
// zero below it.
inline constexpr double kLogFloor = 1e-12;

double clamped_log(double p);

// Mean cross-entropy of the model over the batch.
double cross_entropy(const ModelParams& m, const std::vector<LabeledPoint>& batch,
                     Gradients* grads);

// L_{A,B,t}(f, alpha_star, beta): clean cross-entropy minus the beta-weighted
// target/source log-likelihood mixture on trigger-carrying inputs. The
// triggered list is aligned with region_batch; dtriggered (when non-null)
// receives dLoss/dA(x) per triggered input.
double loss_attack(const ModelParams& f,
                   const std::vector<LabeledPoint>& clean_batch,
                   const std::vector<LabeledPoint>& region_batch,
                   const std::vector<Eigen::VectorXd>& triggered,
                   double alpha_star, double beta, std::size_t target,
                   Gradients* model_grads,
                   std::vector<Eigen::VectorXd>* dtriggered);

// L_A(C) = -E_B[log C(A(x)) + log(1 - C(x))] for a two-label discriminator
// whose class 1 means "trigger-carrying".
double loss_discriminator(const ModelParams& c,
                          const std::vector<Eigen::VectorXd>& benign,
                          const std::vector<Eigen::VectorXd>& triggered,
                          Gradients* grads,
                          std::vector<Eigen::VectorXd>* dtriggered);

// L_C(A, zeta, omega): the base attack loss (callers pass -alpha_star for the
// boundary-seeking refinement) plus omega * max{L_A(C) - zeta, 0}. Gradients
// flow to the triggered inputs only; f_p and c are fixed.
double loss_trigger_refine(const ModelParams& f_p, const ModelParams& c,
                           const std::vector<LabeledPoint>& clean_batch,
                           const std::vector<LabeledPoint>& region_batch,
                           const std::vector<Eigen::VectorXd>& triggered,
                           double alpha_star, double beta, std::size_t target,
                           double zeta, double omega,
                           std::vector<Eigen::VectorXd>* dtriggered);

// Final training loss: L_{A,B,t}(f_b, alpha_star, beta) plus the worst output
// gap ||g_b(x_C) - g_P(x_C)||_2 over a clean pool excluding A(B). The
// maximizer is found by scanning the pool; ties break to the lowest index.
double loss_backdoor_train(const ModelParams& f_b, const ModelParams& f_p,
                           const std::vector<LabeledPoint>& clean_batch,
                           const std::vector<LabeledPoint>& region_batch,
                           const std::vector<Eigen::VectorXd>& triggered,
                           const std::vector<Eigen::VectorXd>& clean_pool,
                           double alpha_star, double beta, std::size_t target,
                           Gradients* fb_grads);

}  // namespace bdlab
