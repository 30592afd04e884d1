#include <doctest.h>

#include <cmath>

#include "../support.hpp"
#include "bdlab/losses.hpp"

using namespace bdlab;
using namespace bdlab::testing;

namespace {

// One-layer model with zero weights and chosen biases: softmax(bias) gives an
// input-independent output row, which keeps hand arithmetic trivial.
ModelParams bias_model(const std::vector<double>& probs, std::size_t in_dim = 1) {
  ModelParams m = make_mlp(in_dim, {}, probs.size(), 0);
  m.w[0].setZero();
  for (std::size_t i = 0; i < probs.size(); ++i)
    m.b[0](static_cast<Eigen::Index>(i)) = std::log(probs[i]);
  return m;
}

LabeledPoint pt(double x, std::size_t y) {
  Eigen::VectorXd v(1);
  v << x;
  return {v, y, false};
}

}  // namespace

TEST_CASE("attack loss with beta 0 is plain cross-entropy") {
  auto m = make_mlp(1, {4}, 2, 3);
  std::vector<LabeledPoint> clean = {pt(0.1, 0), pt(0.8, 1)};
  std::vector<LabeledPoint> region = {pt(0.4, 1)};
  std::vector<Eigen::VectorXd> trig = {region[0].x};
  double a = loss_attack(m, clean, region, trig, 0.9, 0.0, 0, nullptr, nullptr);
  double b = cross_entropy(m, clean, nullptr);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("attack loss hand values on a constant-output model") {
  auto m = bias_model({0.8, 0.2});
  std::vector<LabeledPoint> clean = {pt(0.2, 1)};
  std::vector<LabeledPoint> region = {pt(0.5, 1)};
  std::vector<Eigen::VectorXd> trig = {region[0].x};

  // Clean CE = -log 0.2; mixture = 0.75 log 0.8 + 0.25 log 0.2 at alpha*=0.5.
  double expect = -std::log(0.2) -
                  0.5 * (0.75 * std::log(0.8) + 0.25 * std::log(0.2));
  double got = loss_attack(m, clean, region, trig, 0.5, 0.5, 0, nullptr, nullptr);
  CHECK(got == doctest::Approx(expect).epsilon(1e-9));

  // alpha* = 1 collapses the mixture to the target log-likelihood.
  double collapsed =
      loss_attack(m, clean, region, trig, 1.0, 0.5, 0, nullptr, nullptr);
  CHECK(collapsed ==
        doctest::Approx(-std::log(0.2) - 0.5 * std::log(0.8)).epsilon(1e-9));
}

TEST_CASE("discriminator loss spot values") {
  auto half = bias_model({0.5, 0.5});
  std::vector<Eigen::VectorXd> benign = {pt(0.0, 0).x, pt(0.2, 0).x};
  std::vector<Eigen::VectorXd> trig = {pt(1.0, 0).x, pt(0.9, 0).x};
  CHECK(loss_discriminator(half, benign, trig, nullptr, nullptr) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));

  // Steep input-dependent head separating x=0 from x=1 almost perfectly.
  ModelParams sharp = make_mlp(1, {}, 2, 0);
  sharp.w[0] << -40.0, 40.0;
  sharp.b[0] << 20.0, -20.0;
  std::vector<Eigen::VectorXd> b0 = {pt(0.0, 0).x};
  std::vector<Eigen::VectorXd> t1 = {pt(1.0, 0).x};
  CHECK(loss_discriminator(sharp, b0, t1, nullptr, nullptr) <= 1e-6);

  CHECK_THROWS_AS(loss_discriminator(half, {}, {}, nullptr, nullptr),
                  std::invalid_argument);
}

TEST_CASE("trigger refinement penalty activates above zeta") {
  auto f_p = bias_model({0.7, 0.3});
  auto c_weak = bias_model({0.5, 0.5});
  std::vector<LabeledPoint> clean = {pt(0.3, 0)};
  std::vector<LabeledPoint> region = {pt(0.6, 1)};
  std::vector<Eigen::VectorXd> trig = {region[0].x};

  double base = loss_attack(f_p, clean, region, trig, -0.5, 0.5, 0, nullptr,
                            nullptr);
  // Weak discriminator: L_A(C) = 2 log 2 > zeta, penalty active.
  double refined = loss_trigger_refine(f_p, c_weak, clean, region, trig, -0.5,
                                       0.5, 0, 0.1, 0.1, nullptr);
  CHECK(refined ==
        doctest::Approx(base + 0.1 * (2.0 * std::log(2.0) - 0.1)).epsilon(1e-9));

  // omega = 0 and a satisfied zeta both reduce to the base loss.
  CHECK(loss_trigger_refine(f_p, c_weak, clean, region, trig, -0.5, 0.5, 0, 0.1,
                            0.0, nullptr) == doctest::Approx(base));
  CHECK(loss_trigger_refine(f_p, c_weak, clean, region, trig, -0.5, 0.5, 0,
                            10.0, 0.1, nullptr) == doctest::Approx(base));
}

TEST_CASE("backdoor training loss regularizer") {
  auto f_p = bias_model({0.7, 0.3});
  std::vector<LabeledPoint> clean = {pt(0.3, 0)};
  std::vector<LabeledPoint> region = {pt(0.6, 1)};
  std::vector<Eigen::VectorXd> trig = {region[0].x};
  std::vector<Eigen::VectorXd> pool = {pt(0.1, 0).x, pt(0.2, 0).x, pt(0.9, 0).x};

  // Identical models: regularizer is zero.
  double same = loss_backdoor_train(f_p, f_p, clean, region, trig, pool, 0.5,
                                    0.5, 0, nullptr);
  double base = loss_attack(f_p, clean, region, trig, 0.5, 0.5, 0, nullptr,
                            nullptr);
  CHECK(same == doctest::Approx(base).epsilon(1e-12));

  // Constant-output pair: every pool point has the same gap, so the scan's
  // choice equals the hand-computed norm.
  auto f_b = bias_model({0.6, 0.4});
  double gap = std::hypot(0.7 - 0.6, 0.3 - 0.4);
  double base_b = loss_attack(f_b, clean, region, trig, 0.5, 0.5, 0, nullptr,
                              nullptr);
  double got = loss_backdoor_train(f_b, f_p, clean, region, trig, pool, 0.5,
                                   0.5, 0, nullptr);
  CHECK(got == doctest::Approx(base_b + gap).epsilon(1e-9));

  std::vector<Eigen::VectorXd> one = {pt(0.1, 0).x};
  double single = loss_backdoor_train(f_b, f_p, clean, region, trig, one, 0.5,
                                      0.5, 0, nullptr);
  CHECK(single == doctest::Approx(base_b + gap).epsilon(1e-9));

  CHECK_THROWS_AS(loss_backdoor_train(f_b, f_p, clean, region, trig, {}, 0.5,
                                      0.5, 0, nullptr),
                  std::invalid_argument);
}

TEST_CASE("all loss gradients pass finite-difference checks") {
  Rng rng(17);
  std::vector<LabeledPoint> clean, region;
  std::vector<Eigen::VectorXd> trig, pool;
  for (int i = 0; i < 5; ++i) {
    clean.push_back(pt(rng.uniform(), rng.index(2)));
    region.push_back(pt(rng.uniform(), 1));
    Eigen::VectorXd t(1);
    t << rng.uniform();
    trig.push_back(t);
    pool.push_back(pt(rng.uniform(), 0).x);
  }
  auto f_p = make_mlp(1, {6}, 2, 23);
  auto f_b = make_mlp(1, {6}, 2, 24);
  auto c = make_mlp(1, {4}, 2, 25);

  auto attack_loss = [&](const ModelParams& m, Gradients* g) {
    return loss_attack(m, clean, region, trig, 0.7, 0.4, 0, g, nullptr);
  };
  CHECK(grad_check(f_b, attack_loss) <= 1e-4);

  std::vector<Eigen::VectorXd> originals;
  for (const auto& p : region) originals.push_back(p.x);
  auto disc_loss = [&](const ModelParams& m, Gradients* g) {
    return loss_discriminator(m, originals, trig, g, nullptr);
  };
  CHECK(grad_check(c, disc_loss) <= 1e-4);

  auto train_loss = [&](const ModelParams& m, Gradients* g) {
    return loss_backdoor_train(m, f_p, clean, region, trig, pool, 0.7, 0.4, 0,
                               g);
  };
  CHECK(grad_check(f_b, train_loss) <= 1e-4);
}

TEST_CASE("input gradients of the trigger-side losses check out") {
  std::vector<LabeledPoint> clean = {pt(0.2, 0), pt(0.7, 1)};
  std::vector<LabeledPoint> region = {pt(0.55, 1), pt(0.65, 1)};
  std::vector<Eigen::VectorXd> trig = {pt(0.5, 0).x, pt(0.6, 0).x};
  auto f_p = make_mlp(1, {6}, 2, 33);
  auto c = make_mlp(1, {4}, 2, 34);

  std::vector<Eigen::VectorXd> grads;
  loss_trigger_refine(f_p, c, clean, region, trig, -0.6, 0.4, 0, 0.01, 0.1,
                      &grads);
  double eps = 1e-6;
  for (std::size_t i = 0; i < trig.size(); ++i) {
    auto shifted = trig;
    shifted[i](0) += eps;
    double up = loss_trigger_refine(f_p, c, clean, region, shifted, -0.6, 0.4,
                                    0, 0.01, 0.1, nullptr);
    shifted[i](0) -= 2.0 * eps;
    double down = loss_trigger_refine(f_p, c, clean, region, shifted, -0.6, 0.4,
                                      0, 0.01, 0.1, nullptr);
    double numeric = (up - down) / (2.0 * eps);
    CHECK(std::abs(grads[i](0) - numeric) <=
          1e-4 * std::max(1.0, std::abs(numeric)));
  }
}
