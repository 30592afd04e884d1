#pragma once

#include "bdlab/mlp.hpp"

namespace bdlab {

// Residual perturbation trigger: A(x) = clip(project_delta(x + p(x))) where
// p is a small MLP read at its linear head. The radial projection keeps
// ||A(x) - x||_2 <= delta and the cube clip keeps A(x) in [0,1]^n; clipping
// toward the cube never grows the distance to x, so both constraints hold
// simultaneously.
struct TriggerNet {
  ModelParams net;  // in_dim -> in_dim, linear output (softmax head unused)
  double delta = 0.1;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

TriggerNet make_trigger(std::size_t dim, double delta, std::uint64_t seed);

// Identity trigger with a zero perturbation net (the delta -> 0 limit).
TriggerNet identity_trigger(std::size_t dim);

// Fixed-offset patch trigger baseline: A(x) = clip(x + offset), offset scaled
// into the delta ball.
TriggerNet patch_trigger(const Eigen::VectorXd& offset, double delta);

// Evaluates A(x) keeping the forward cache, so gradients at the projected
// output can be pushed back into the net parameters (straight-through across
// the projection).
Eigen::VectorXd trigger_forward(const TriggerNet& trigger,
                                const Eigen::VectorXd& x, ForwardCache* cache);

// Accumulates dLoss/dparams of the perturbation net given dLoss/dA(x).
void trigger_backward(const TriggerNet& trigger, const ForwardCache& cache,
                      const Eigen::VectorXd& dout, Gradients* grads);

}  // namespace bdlab
