#include "bdlab/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace bdlab {

void LabeledDataset::validate(std::size_t num_labels) const {
  if (points.empty()) throw std::invalid_argument("dataset is empty");
  for (const auto& p : points) {
    if (p.y >= num_labels) throw std::invalid_argument("label out of range");
    if (!p.x.allFinite()) throw std::invalid_argument("non-finite input");
  }
}

std::size_t ModelParams::num_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < w.size(); ++l)
    n += static_cast<std::size_t>(w[l].size() + b[l].size());
  return n;
}

bool ModelParams::finite() const {
  for (std::size_t l = 0; l < w.size(); ++l)
    if (!w[l].allFinite() || !b[l].allFinite()) return false;
  return true;
}

ModelParams make_mlp(std::size_t in_dim, const std::vector<std::size_t>& hidden,
                     std::size_t out_dim, std::uint64_t seed) {
  if (hidden.size() > 3) throw std::invalid_argument("at most 3 hidden layers");
  if (in_dim == 0 || out_dim == 0) throw std::invalid_argument("zero dimension");
  ModelParams m;
  m.seed = seed;
  Rng rng(seed);
  std::size_t prev = in_dim;
  auto push_layer = [&](std::size_t out) {
    Eigen::MatrixXd w(out, prev);
    double s = std::sqrt(1.0 / static_cast<double>(prev));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = s * rng.normal();
    m.w.push_back(std::move(w));
    m.b.push_back(Eigen::VectorXd::Zero(out));
    prev = out;
  };
  for (std::size_t h : hidden) push_layer(h);
  push_layer(out_dim);
  return m;
}

Eigen::VectorXd forward_proba(const ModelParams& m, const Eigen::VectorXd& x,
                              ForwardCache* cache) {
  if (static_cast<std::size_t>(x.size()) != m.input_dim())
    throw std::invalid_argument("input dimension mismatch");
  Eigen::VectorXd a = x;
  if (cache) {
    cache->acts.clear();
    cache->acts.push_back(a);
  }
  for (std::size_t l = 0; l + 1 < m.num_layers(); ++l) {
    a = (m.w[l] * a + m.b[l]).array().tanh().matrix();
    if (cache) cache->acts.push_back(a);
  }
  Eigen::VectorXd logits = m.w.back() * a + m.b.back();
  Eigen::VectorXd shifted = logits.array() - logits.maxCoeff();
  Eigen::VectorXd probs = shifted.array().exp();
  probs /= probs.sum();
  if (cache) {
    cache->logits = logits;
    cache->probs = probs;
  }
  return probs;
}

std::size_t predict_label(const ModelParams& m, const Eigen::VectorXd& x) {
  Eigen::VectorXd p = forward_proba(m, x);
  std::size_t best = 0;
  for (Eigen::Index j = 1; j < p.size(); ++j)
    if (p(j) > p(best)) best = static_cast<std::size_t>(j);
  return best;
}

void Gradients::init_like(const ModelParams& m) {
  dw.clear();
  db.clear();
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    dw.push_back(Eigen::MatrixXd::Zero(m.w[l].rows(), m.w[l].cols()));
    db.push_back(Eigen::VectorXd::Zero(m.b[l].size()));
  }
}

void Gradients::scale(double s) {
  for (auto& g : dw) g *= s;
  for (auto& g : db) g *= s;
}

void Gradients::add(const Gradients& other, double s) {
  for (std::size_t l = 0; l < dw.size(); ++l) {
    dw[l] += s * other.dw[l];
    db[l] += s * other.db[l];
  }
}

Eigen::VectorXd dprob_to_dlogits(const Eigen::VectorXd& probs,
                                 const Eigen::VectorXd& dprob) {
  double dot = probs.dot(dprob);
  return (probs.array() * (dprob.array() - dot)).matrix();
}

Eigen::VectorXd backward_from_dlogits(const ModelParams& m,
                                      const ForwardCache& cache,
                                      const Eigen::VectorXd& dlogits,
                                      Gradients* grads) {
  Eigen::VectorXd delta = dlogits;
  for (std::size_t l = m.num_layers(); l-- > 0;) {
    if (grads) {
      grads->dw[l] += delta * cache.acts[l].transpose();
      grads->db[l] += delta;
    }
    Eigen::VectorXd dprev = m.w[l].transpose() * delta;
    if (l > 0) {
      const Eigen::VectorXd& a = cache.acts[l];  // tanh output of layer l-1
      delta = (dprev.array() * (1.0 - a.array().square())).matrix();
    } else {
      return dprev;
    }
  }
  throw std::logic_error("unreachable");
}

TrainResult train(const ModelParams& init, std::size_t dataset_size,
                  const BatchLoss& loss, const TrainConfig& cfg) {
  if (cfg.lr <= 0.0) throw std::invalid_argument("learning rate must be > 0");
  if (dataset_size == 0) throw std::invalid_argument("empty dataset");
  TrainResult out;
  out.model = init;
  ModelParams last_finite = init;
  Rng rng(cfg.seed);

  // Adam state.
  Gradients m1, m2;
  m1.init_like(init);
  m2.init_like(init);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::size_t step = 0;

  std::vector<std::size_t> order(dataset_size);
  for (std::size_t i = 0; i < dataset_size; ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < dataset_size;
         start += cfg.batch_size) {
      std::size_t end = std::min(dataset_size, start + cfg.batch_size);
      std::vector<std::size_t> batch(order.begin() + start,
                                     order.begin() + end);
      Gradients g;
      g.init_like(out.model);
      double value = loss(out.model, batch, &g);
      if (!std::isfinite(value))
        throw TrainDivergedError("training loss diverged", last_finite);
      epoch_loss += value;
      ++batches;

      ++step;
      for (std::size_t l = 0; l < out.model.num_layers(); ++l) {
        if (cfg.optimizer == Optimizer::kSgd) {
          out.model.w[l] -= cfg.lr * g.dw[l];
          out.model.b[l] -= cfg.lr * g.db[l];
        } else {
          m1.dw[l] = b1 * m1.dw[l] + (1.0 - b1) * g.dw[l];
          m1.db[l] = b1 * m1.db[l] + (1.0 - b1) * g.db[l];
          m2.dw[l] = b2 * m2.dw[l].array().matrix() +
                     (1.0 - b2) * g.dw[l].array().square().matrix();
          m2.db[l] = b2 * m2.db[l].array().matrix() +
                     (1.0 - b2) * g.db[l].array().square().matrix();
          double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
          double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
          out.model.w[l].array() -=
              cfg.lr * (m1.dw[l].array() / c1) /
              ((m2.dw[l].array() / c2).sqrt() + eps);
          out.model.b[l].array() -=
              cfg.lr * (m1.db[l].array() / c1) /
              ((m2.db[l].array() / c2).sqrt() + eps);
        }
      }
      if (!out.model.finite())
        throw TrainDivergedError("model weights diverged", last_finite);
      last_finite = out.model;
    }
    out.log.push_back({epoch, epoch_loss / static_cast<double>(batches)});
  }
  return out;
}

double grad_check(const ModelParams& m,
                  const std::function<double(const ModelParams&, Gradients*)>& loss,
                  double eps) {
  Gradients g;
  g.init_like(m);
  loss(m, &g);
  ModelParams probe = m;
  double worst = 0.0;
  auto check_entry = [&](double& param, double analytic) {
    double saved = param;
    param = saved + eps;
    double up = loss(probe, nullptr);
    param = saved - eps;
    double down = loss(probe, nullptr);
    param = saved;
    double numeric = (up - down) / (2.0 * eps);
    double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    for (Eigen::Index i = 0; i < m.w[l].rows(); ++i)
      for (Eigen::Index j = 0; j < m.w[l].cols(); ++j)
        check_entry(probe.w[l](i, j), g.dw[l](i, j));
    for (Eigen::Index i = 0; i < m.b[l].size(); ++i)
      check_entry(probe.b[l](i), g.db[l](i));
  }
  return worst;
}

Eigen::VectorXd flatten_params(const ModelParams& m) {
  Eigen::VectorXd out(m.num_params());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    for (Eigen::Index i = 0; i < m.w[l].rows(); ++i)
      for (Eigen::Index j = 0; j < m.w[l].cols(); ++j) out(k++) = m.w[l](i, j);
    for (Eigen::Index i = 0; i < m.b[l].size(); ++i) out(k++) = m.b[l](i);
  }
  return out;
}

Eigen::MatrixXd ntk_feature_map(const ModelParams& m,
                                const std::vector<Eigen::VectorXd>& X) {
  std::size_t L = m.num_labels();
  std::size_t P = m.num_params();
  Eigen::MatrixXd phi(X.size() * L, P);
  for (std::size_t i = 0; i < X.size(); ++i) {
    ForwardCache cache;
    forward_proba(m, X[i], &cache);
    for (std::size_t j = 0; j < L; ++j) {
      Gradients g;
      g.init_like(m);
      Eigen::VectorXd dlogits = Eigen::VectorXd::Zero(L);
      dlogits(static_cast<Eigen::Index>(j)) = 1.0;
      backward_from_dlogits(m, cache, dlogits, &g);
      Eigen::Index k = 0;
      Eigen::Index row = static_cast<Eigen::Index>(i * L + j);
      for (std::size_t l = 0; l < m.num_layers(); ++l) {
        for (Eigen::Index r = 0; r < g.dw[l].rows(); ++r)
          for (Eigen::Index c = 0; c < g.dw[l].cols(); ++c)
            phi(row, k++) = g.dw[l](r, c);
        for (Eigen::Index r = 0; r < g.db[l].size(); ++r)
          phi(row, k++) = g.db[l](r);
      }
    }
  }
  return phi;
}

std::string model_to_text(const ModelParams& m) {
  std::ostringstream os;
  os << "bdlab-model v1\n";
  os << "seed " << m.seed << "\n";
  os << "layers " << m.num_layers() << "\n";
  char buf[64];
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    os << "shape " << m.w[l].rows() << " " << m.w[l].cols() << "\n";
    for (Eigen::Index i = 0; i < m.w[l].rows(); ++i)
      for (Eigen::Index j = 0; j < m.w[l].cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%a\n", m.w[l](i, j));
        os << buf;
      }
    for (Eigen::Index i = 0; i < m.b[l].size(); ++i) {
      std::snprintf(buf, sizeof buf, "%a\n", m.b[l](i));
      os << buf;
    }
  }
  return os.str();
}

ModelParams model_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string tag, version;
  is >> tag >> version;
  if (tag != "bdlab-model" || version != "v1")
    throw std::invalid_argument("unrecognized model dump header");
  ModelParams m;
  std::string key;
  std::size_t layers = 0;
  is >> key >> m.seed;
  if (key != "seed") throw std::invalid_argument("bad model dump");
  is >> key >> layers;
  if (key != "layers" || layers == 0)
    throw std::invalid_argument("bad model dump");
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::Index rows = 0, cols = 0;
    is >> key >> rows >> cols;
    if (key != "shape" || rows <= 0 || cols <= 0)
      throw std::invalid_argument("bad model dump");
    Eigen::MatrixXd w(rows, cols);
    std::string tok;
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) {
        is >> tok;
        w(i, j) = std::strtod(tok.c_str(), nullptr);
      }
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      is >> tok;
      b(i) = std::strtod(tok.c_str(), nullptr);
    }
    if (!is) throw std::invalid_argument("truncated model dump");
    m.w.push_back(std::move(w));
    m.b.push_back(std::move(b));
  }
  return m;
}

}  // namespace bdlab
