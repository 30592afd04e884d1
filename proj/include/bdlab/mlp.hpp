#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdlab/rng.hpp"

namespace bdlab {

struct LabeledPoint {
  Eigen::VectorXd x;
  std::size_t y = 0;
  bool poison = false;
};

struct LabeledDataset {
  std::vector<LabeledPoint> points;
  void validate(std::size_t num_labels) const;
};

// Tanh-hidden MLP with a softmax head. w[l] has shape (out x in).
struct ModelParams {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return static_cast<std::size_t>(w.front().cols()); }
  std::size_t num_labels() const { return static_cast<std::size_t>(w.back().rows()); }
  std::size_t num_layers() const { return w.size(); }
  std::size_t num_params() const;
  bool finite() const;
};

ModelParams make_mlp(std::size_t in_dim, const std::vector<std::size_t>& hidden,
                     std::size_t out_dim, std::uint64_t seed);

struct ForwardCache {
  std::vector<Eigen::VectorXd> acts;  // acts[l] is the input to layer l
  Eigen::VectorXd logits;
  Eigen::VectorXd probs;
};

Eigen::VectorXd forward_proba(const ModelParams& m, const Eigen::VectorXd& x,
                              ForwardCache* cache = nullptr);
std::size_t predict_label(const ModelParams& m, const Eigen::VectorXd& x);

struct Gradients {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;

  void init_like(const ModelParams& m);
  void scale(double s);
  void add(const Gradients& other, double s = 1.0);
};

// Converts a gradient in probability space to logit space at the given probs.
Eigen::VectorXd dprob_to_dlogits(const Eigen::VectorXd& probs,
                                 const Eigen::VectorXd& dprob);

// Backpropagates dLoss/dlogits; accumulates parameter gradients into grads
// (when non-null) and returns dLoss/dx.
Eigen::VectorXd backward_from_dlogits(const ModelParams& m,
                                      const ForwardCache& cache,
                                      const Eigen::VectorXd& dlogits,
                                      Gradients* grads);

enum class Optimizer { kSgd, kAdam };

struct TrainConfig {
  double lr = 1e-3;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::kAdam;
};

// Mean batch loss with gradient accumulation over the given dataset indices.
using BatchLoss = std::function<double(const ModelParams&,
                                       const std::vector<std::size_t>&,
                                       Gradients*)>;

struct TrainLogEntry {
  std::size_t epoch = 0;
  double loss = 0.0;
};

struct TrainResult {
  ModelParams model;
  std::vector<TrainLogEntry> log;
};

class TrainDivergedError : public std::runtime_error {
 public:
  TrainDivergedError(std::string what, ModelParams last_finite)
      : std::runtime_error(std::move(what)),
        last_finite_model(std::move(last_finite)) {}
  ModelParams last_finite_model;
};

TrainResult train(const ModelParams& init, std::size_t dataset_size,
                  const BatchLoss& loss, const TrainConfig& cfg);

// Max relative error between the analytic gradient and central finite
// differences of `loss` over all parameters.
double grad_check(const ModelParams& m,
                  const std::function<double(const ModelParams&, Gradients*)>& loss,
                  double eps = 1e-5);

// Rows indexed by (input i, logit j) as i*L + j; columns are flattened
// parameters in layer order, weights row-major then bias.
Eigen::MatrixXd ntk_feature_map(const ModelParams& m,
                                const std::vector<Eigen::VectorXd>& X);

Eigen::VectorXd flatten_params(const ModelParams& m);

// Bit-exact text serialization with a shape header.
std::string model_to_text(const ModelParams& m);
ModelParams model_from_text(const std::string& text);

}  // namespace bdlab
