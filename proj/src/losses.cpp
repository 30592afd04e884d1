#include "bdlab/losses.hpp"

#include <cmath>

namespace bdlab {
namespace {

// d/dp log(max(p, floor)): zero once the clamp engages.
double dlog(double p) { return p > kLogFloor ? 1.0 / p : 0.0; }

}  // namespace

double clamped_log(double p) { return std::log(std::max(p, kLogFloor)); }

double cross_entropy(const ModelParams& m, const std::vector<LabeledPoint>& batch,
                     Gradients* grads) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  double total = 0.0;
  double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& p : batch) {
    ForwardCache cache;
    Eigen::VectorXd probs = forward_proba(m, p.x, &cache);
    auto y = static_cast<Eigen::Index>(p.y);
    total -= clamped_log(probs(y));
    if (grads) {
      Eigen::VectorXd dprob = Eigen::VectorXd::Zero(probs.size());
      dprob(y) = -inv * dlog(probs(y));
      backward_from_dlogits(m, cache, dprob_to_dlogits(probs, dprob), grads);
    }
  }
  return total * inv;
}

double loss_attack(const ModelParams& f,
                   const std::vector<LabeledPoint>& clean_batch,
                   const std::vector<LabeledPoint>& region_batch,
                   const std::vector<Eigen::VectorXd>& triggered,
                   double alpha_star, double beta, std::size_t target,
                   Gradients* model_grads,
                   std::vector<Eigen::VectorXd>* dtriggered) {
  if (alpha_star < -1.0 || alpha_star > 1.0)
    throw std::invalid_argument("alpha_star outside [-1, 1]");
  if (region_batch.size() != triggered.size())
    throw std::invalid_argument("triggered inputs misaligned with region batch");
  if (target >= f.num_labels()) throw std::invalid_argument("target out of range");

  double value = cross_entropy(f, clean_batch, model_grads);
  if (dtriggered) dtriggered->assign(triggered.size(), Eigen::VectorXd());
  if (region_batch.empty() || beta == 0.0) {
    if (dtriggered)
      for (std::size_t i = 0; i < triggered.size(); ++i)
        (*dtriggered)[i] = Eigen::VectorXd::Zero(triggered[i].size());
    return value;
  }

  double wt = (1.0 + alpha_star) / 2.0;
  double wy = (1.0 - alpha_star) / 2.0;
  double inv = 1.0 / static_cast<double>(region_batch.size());
  double mix = 0.0;
  for (std::size_t i = 0; i < region_batch.size(); ++i) {
    ForwardCache cache;
    Eigen::VectorXd probs = forward_proba(f, triggered[i], &cache);
    auto t = static_cast<Eigen::Index>(target);
    auto y = static_cast<Eigen::Index>(region_batch[i].y);
    mix += wt * clamped_log(probs(t)) + wy * clamped_log(probs(y));
    if (model_grads || dtriggered) {
      Eigen::VectorXd dprob = Eigen::VectorXd::Zero(probs.size());
      dprob(t) -= beta * inv * wt * dlog(probs(t));
      dprob(y) -= beta * inv * wy * dlog(probs(y));
      Eigen::VectorXd dx = backward_from_dlogits(
          f, cache, dprob_to_dlogits(probs, dprob), model_grads);
      if (dtriggered) (*dtriggered)[i] = dx;
    }
  }
  return value - beta * inv * mix;
}

double loss_discriminator(const ModelParams& c,
                          const std::vector<Eigen::VectorXd>& benign,
                          const std::vector<Eigen::VectorXd>& triggered,
                          Gradients* grads,
                          std::vector<Eigen::VectorXd>* dtriggered) {
  if (benign.empty() || benign.size() != triggered.size())
    throw std::invalid_argument("discriminator batch misaligned");
  if (c.num_labels() != 2)
    throw std::invalid_argument("discriminator needs a binary head");
  double inv = 1.0 / static_cast<double>(benign.size());
  if (dtriggered) dtriggered->assign(triggered.size(), Eigen::VectorXd());
  double total = 0.0;
  for (std::size_t i = 0; i < benign.size(); ++i) {
    ForwardCache cache;
    Eigen::VectorXd pa = forward_proba(c, triggered[i], &cache);
    total -= clamped_log(pa(1));
    if (grads || dtriggered) {
      Eigen::VectorXd dprob = Eigen::VectorXd::Zero(2);
      dprob(1) = -inv * dlog(pa(1));
      Eigen::VectorXd dx =
          backward_from_dlogits(c, cache, dprob_to_dlogits(pa, dprob), grads);
      if (dtriggered) (*dtriggered)[i] = dx;
    }
    ForwardCache cache_b;
    Eigen::VectorXd pb = forward_proba(c, benign[i], &cache_b);
    total -= clamped_log(pb(0));  // 1 - C(x) is the class-0 probability
    if (grads) {
      Eigen::VectorXd dprob = Eigen::VectorXd::Zero(2);
      dprob(0) = -inv * dlog(pb(0));
      backward_from_dlogits(c, cache_b, dprob_to_dlogits(pb, dprob), grads);
    }
  }
  return total * inv;
}

double loss_trigger_refine(const ModelParams& f_p, const ModelParams& c,
                           const std::vector<LabeledPoint>& clean_batch,
                           const std::vector<LabeledPoint>& region_batch,
                           const std::vector<Eigen::VectorXd>& triggered,
                           double alpha_star, double beta, std::size_t target,
                           double zeta, double omega,
                           std::vector<Eigen::VectorXd>* dtriggered) {
  std::vector<Eigen::VectorXd> d_base, d_disc;
  double base = loss_attack(f_p, clean_batch, region_batch, triggered,
                            alpha_star, beta, target, nullptr,
                            dtriggered ? &d_base : nullptr);
  std::vector<Eigen::VectorXd> originals;
  originals.reserve(region_batch.size());
  for (const auto& p : region_batch) originals.push_back(p.x);
  double disc = loss_discriminator(c, originals, triggered, nullptr,
                                   dtriggered ? &d_disc : nullptr);
  bool active = disc > zeta;
  if (dtriggered) {
    dtriggered->assign(triggered.size(), Eigen::VectorXd());
    for (std::size_t i = 0; i < triggered.size(); ++i) {
      (*dtriggered)[i] = d_base[i];
      if (active && omega != 0.0) (*dtriggered)[i] += omega * d_disc[i];
    }
  }
  return base + omega * std::max(disc - zeta, 0.0);
}

double loss_backdoor_train(const ModelParams& f_b, const ModelParams& f_p,
                           const std::vector<LabeledPoint>& clean_batch,
                           const std::vector<LabeledPoint>& region_batch,
                           const std::vector<Eigen::VectorXd>& triggered,
                           const std::vector<Eigen::VectorXd>& clean_pool,
                           double alpha_star, double beta, std::size_t target,
                           Gradients* fb_grads) {
  if (clean_pool.empty()) throw std::invalid_argument("empty clean pool");
  double value = loss_attack(f_b, clean_batch, region_batch, triggered,
                             alpha_star, beta, target, fb_grads, nullptr);
  std::size_t best = 0;
  double best_gap = -1.0;
  for (std::size_t i = 0; i < clean_pool.size(); ++i) {
    Eigen::VectorXd gap =
        forward_proba(f_b, clean_pool[i]) - forward_proba(f_p, clean_pool[i]);
    double n = gap.norm();
    if (n > best_gap) {
      best_gap = n;
      best = i;
    }
  }
  ForwardCache cache;
  Eigen::VectorXd pb = forward_proba(f_b, clean_pool[best], &cache);
  Eigen::VectorXd gap = pb - forward_proba(f_p, clean_pool[best]);
  double norm = gap.norm();
  if (fb_grads && norm > 0.0) {
    Eigen::VectorXd dprob = gap / norm;
    backward_from_dlogits(f_b, cache, dprob_to_dlogits(pb, dprob), fb_grads);
  }
  return value + norm;
}

}  // namespace bdlab
