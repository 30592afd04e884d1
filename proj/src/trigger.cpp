#include "bdlab/trigger.hpp"

#include <cmath>

namespace bdlab {
namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& pert,
                        double delta) {
  Eigen::VectorXd d = pert;
  double r = d.norm();
  if (r > delta) d *= (r > 0.0 ? delta / r : 0.0);
  Eigen::VectorXd out = x + d;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out(i) = std::min(1.0, std::max(0.0, out(i)));
  return out;
}

}  // namespace

Eigen::VectorXd TriggerNet::apply(const Eigen::VectorXd& x) const {
  return trigger_forward(*this, x, nullptr);
}

TriggerNet make_trigger(std::size_t dim, double delta, std::uint64_t seed) {
  if (delta < 0.0) throw std::invalid_argument("negative trigger budget");
  TriggerNet t;
  t.delta = delta;
  t.net = make_mlp(dim, {16}, dim, seed);
  // Start near the identity map.
  t.net.w.back() *= 0.01;
  return t;
}

TriggerNet identity_trigger(std::size_t dim) {
  TriggerNet t;
  t.delta = 0.0;
  t.net = make_mlp(dim, {}, dim, 0);
  t.net.w[0].setZero();
  t.net.b[0].setZero();
  return t;
}

TriggerNet patch_trigger(const Eigen::VectorXd& offset, double delta) {
  TriggerNet t;
  t.delta = delta;
  t.net = make_mlp(offset.size(), {}, offset.size(), 0);
  t.net.w[0].setZero();
  t.net.b[0] = offset;
  return t;
}

Eigen::VectorXd trigger_forward(const TriggerNet& trigger,
                                const Eigen::VectorXd& x, ForwardCache* cache) {
  ForwardCache local;
  ForwardCache* c = cache ? cache : &local;
  forward_proba(trigger.net, x, c);
  return project(x, c->logits, trigger.delta);
}

void trigger_backward(const TriggerNet& trigger, const ForwardCache& cache,
                      const Eigen::VectorXd& dout, Gradients* grads) {
  // Straight-through across the projection and clip.
  backward_from_dlogits(trigger.net, cache, dout, grads);
}

}  // namespace bdlab
