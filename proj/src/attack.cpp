#include "bdlab/attack.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "bdlab/estimators.hpp"

namespace bdlab {
namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

std::vector<double> proba_row(const ModelParams& m, const Eigen::VectorXd& x) {
  std::vector<double> row = to_std(forward_proba(m, x));
  // Pin the row sum exactly so FiniteTask validation at 1e-12 passes.
  double sum = 0.0;
  std::size_t top = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    sum += row[i];
    if (row[i] > row[top]) top = i;
  }
  row[top] += 1.0 - sum;
  return row;
}

std::size_t majority_prediction(const ModelParams& m,
                                const std::vector<const LabeledPoint*>& pts) {
  std::vector<std::size_t> counts(m.num_labels(), 0);
  for (const auto* p : pts) ++counts[predict_label(m, p->x)];
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[best]) best = i;
  return best;
}

struct DiscRun {
  ModelParams model;
  double final_loss = 0.0;
};

DiscRun train_discriminator(const std::vector<Eigen::VectorXd>& originals,
                            const std::vector<Eigen::VectorXd>& triggered,
                            const AttackHyperparams& hyper,
                            std::uint64_t seed) {
  ModelParams init = make_mlp(originals.front().size(), {8, 8}, 2, seed);
  BatchLoss loss = [&](const ModelParams& m, const std::vector<std::size_t>& idx,
                       Gradients* g) {
    std::vector<Eigen::VectorXd> o, t;
    for (std::size_t i : idx) {
      o.push_back(originals[i]);
      t.push_back(triggered[i]);
    }
    return loss_discriminator(m, o, t, g, nullptr);
  };
  TrainConfig cfg;
  cfg.lr = hyper.lr;
  cfg.epochs = hyper.disc_epochs;
  cfg.batch_size = hyper.batch_size;
  cfg.seed = seed ^ 0x5851f42d4c957f2dULL;
  DiscRun out;
  out.model = train(init, originals.size(), loss, cfg).model;
  out.final_loss =
      loss_discriminator(out.model, originals, triggered, nullptr, nullptr);
  return out;
}

}  // namespace

void AttackHyperparams::validate() const {
  if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
  if (alpha_star < -1.0 || alpha_star > 1.0)
    throw std::invalid_argument("alpha_star outside [-1, 1]");
  if (beta < 0.0) throw std::invalid_argument("negative beta");
}

AttackResult tsa_attack(const LabeledDataset& dataset,
                        const std::vector<std::size_t>& region_idx,
                        std::size_t target, const AttackHyperparams& hyper) {
  hyper.validate();
  if (region_idx.empty()) throw std::invalid_argument("empty backdoor region");
  std::size_t num_labels = 0;
  for (const auto& p : dataset.points)
    num_labels = std::max(num_labels, p.y + 1);
  num_labels = std::max<std::size_t>(num_labels, 2);
  dataset.validate(num_labels);
  if (target >= num_labels) throw std::invalid_argument("target out of range");
  std::size_t dim = dataset.points.front().x.size();

  Rng seeder(hyper.seed);
  auto next_seed = [&seeder] { return seeder.next_u64(); };

  AttackResult out;

  // Line 1: benign model.
  {
    BatchLoss ce = [&](const ModelParams& m, const std::vector<std::size_t>& idx,
                       Gradients* g) {
      std::vector<LabeledPoint> batch;
      for (std::size_t i : idx) batch.push_back(dataset.points[i]);
      return cross_entropy(m, batch, g);
    };
    TrainConfig cfg;
    cfg.lr = hyper.lr;
    cfg.epochs = hyper.benign_epochs;
    cfg.batch_size = hyper.batch_size;
    cfg.seed = next_seed();
    auto res = train(make_mlp(dim, hyper.hidden, num_labels, next_seed()),
                     dataset.points.size(), ce, cfg);
    out.benign = res.model;
    for (const auto& e : res.log)
      out.log.push_back({"benign", e.epoch, e.loss, 0.0, 0.0});
  }

  std::vector<LabeledPoint> clean_batch = dataset.points;
  std::vector<LabeledPoint> region_batch;
  std::vector<const LabeledPoint*> region_ptrs;
  for (std::size_t i : region_idx) {
    region_batch.push_back(dataset.points.at(i));
    region_ptrs.push_back(&dataset.points[i]);
  }
  if (majority_prediction(out.benign, region_ptrs) == target)
    throw std::invalid_argument(
        "target must differ from the benign majority label of B");

  // Shared machinery for training the trigger net against a loss on A(x).
  auto train_trigger_net =
      [&](TriggerNet& trig, std::size_t epochs, std::uint64_t seed,
          const std::function<double(const std::vector<LabeledPoint>&,
                                     const std::vector<Eigen::VectorXd>&,
                                     std::vector<Eigen::VectorXd>*)>& loss_fn,
          const char* phase) {
        BatchLoss loss = [&](const ModelParams& m,
                             const std::vector<std::size_t>& idx, Gradients* g) {
          TriggerNet cur{m, trig.delta};
          std::vector<LabeledPoint> sub;
          std::vector<Eigen::VectorXd> triggered;
          std::vector<ForwardCache> caches(idx.size());
          for (std::size_t k = 0; k < idx.size(); ++k) {
            sub.push_back(region_batch[idx[k]]);
            triggered.push_back(
                trigger_forward(cur, sub.back().x, &caches[k]));
          }
          std::vector<Eigen::VectorXd> dtrig;
          double value = loss_fn(sub, triggered, g ? &dtrig : nullptr);
          if (g)
            for (std::size_t k = 0; k < idx.size(); ++k)
              trigger_backward(cur, caches[k], dtrig[k], g);
          return value;
        };
        TrainConfig cfg;
        cfg.lr = hyper.lr;
        cfg.epochs = epochs;
        cfg.batch_size = hyper.batch_size;
        cfg.seed = seed;
        auto res = train(trig.net, region_batch.size(), loss, cfg);
        trig.net = res.model;
        for (const auto& e : res.log)
          out.log.push_back({phase, e.epoch, e.loss, 0.0, 0.0});
      };

  // Line 2: initial trigger against L_{A,B,t}(f_P, -alpha*, beta).
  out.trigger = make_trigger(dim, hyper.delta, next_seed());
  train_trigger_net(
      out.trigger, hyper.trigger_epochs, next_seed(),
      [&](const std::vector<LabeledPoint>& sub,
          const std::vector<Eigen::VectorXd>& triggered,
          std::vector<Eigen::VectorXd>* dtrig) {
        return loss_attack(out.benign, clean_batch, sub, triggered,
                           -hyper.alpha_star, hyper.beta, target, nullptr,
                           dtrig);
      },
      "trigger");

  std::vector<Eigen::VectorXd> originals;
  for (const auto& p : region_batch) originals.push_back(p.x);
  auto apply_all = [&] {
    std::vector<Eigen::VectorXd> t;
    for (const auto& x : originals) t.push_back(out.trigger.apply(x));
    return t;
  };

  out.disc_loss_before =
      train_discriminator(originals, apply_all(), hyper, next_seed())
          .final_loss;

  // Lines 3-6: adversarial refinement.
  for (std::size_t round = 0; round < hyper.epoch_adj; ++round) {
    DiscRun disc =
        train_discriminator(originals, apply_all(), hyper, next_seed());
    out.log.push_back(
        {"discriminator", round, disc.final_loss, 0.0, 0.0});
    train_trigger_net(
        out.trigger, hyper.refine_epochs, next_seed(),
        [&](const std::vector<LabeledPoint>& sub,
            const std::vector<Eigen::VectorXd>& triggered,
            std::vector<Eigen::VectorXd>* dtrig) {
          return loss_trigger_refine(out.benign, disc.model, clean_batch, sub,
                                     triggered, -hyper.alpha_star, hyper.beta,
                                     target, hyper.zeta, hyper.omega_penalty,
                                     dtrig);
        },
        "refine");
  }

  out.disc_loss_after =
      train_discriminator(originals, apply_all(), hyper, next_seed())
          .final_loss;

  // Flag triggers too small to move any benign prediction.
  {
    bool changes = false;
    for (const auto& x : originals)
      if (predict_label(out.benign, out.trigger.apply(x)) !=
          predict_label(out.benign, x)) {
        changes = true;
        break;
      }
    out.trigger_ineffective = !changes;
  }

  // Line 7: poison beta/(1+beta) of the region and train f_b on Eq-9.
  std::size_t poison_count = static_cast<std::size_t>(std::llround(
      hyper.beta / (1.0 + hyper.beta) * static_cast<double>(region_batch.size())));
  poison_count = std::min(poison_count, region_batch.size());
  std::vector<std::size_t> order(region_batch.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng poison_rng(next_seed());
  poison_rng.shuffle(order);
  std::vector<LabeledPoint> poison_batch;
  std::vector<Eigen::VectorXd> poison_triggered;
  for (std::size_t k = 0; k < poison_count; ++k) {
    poison_batch.push_back(region_batch[order[k]]);
    poison_batch.back().poison = true;
    poison_triggered.push_back(out.trigger.apply(poison_batch.back().x));
  }

  std::vector<Eigen::VectorXd> clean_pool;
  {
    std::vector<std::size_t> pool_order(dataset.points.size());
    for (std::size_t i = 0; i < pool_order.size(); ++i) pool_order[i] = i;
    Rng pool_rng(next_seed());
    pool_rng.shuffle(pool_order);
    for (std::size_t i : pool_order) {
      if (clean_pool.size() >= hyper.clean_pool_size) break;
      const Eigen::VectorXd& x = dataset.points[i].x;
      bool in_image = false;
      for (const auto& t : poison_triggered)
        if ((t - x).norm() <= 1e-9) in_image = true;
      if (!in_image) clean_pool.push_back(x);
    }
    if (clean_pool.empty()) clean_pool.push_back(dataset.points.front().x);
  }

  {
    BatchLoss loss = [&](const ModelParams& m,
                         const std::vector<std::size_t>& idx, Gradients* g) {
      std::vector<LabeledPoint> batch;
      for (std::size_t i : idx) batch.push_back(dataset.points[i]);
      return loss_backdoor_train(m, out.benign, batch, poison_batch,
                                 poison_triggered, clean_pool,
                                 hyper.alpha_star, hyper.beta, target, g);
    };
    TrainConfig cfg;
    cfg.lr = hyper.lr;
    cfg.epochs = hyper.backdoor_epochs;
    cfg.batch_size = hyper.batch_size;
    cfg.seed = next_seed();
    auto res = train(make_mlp(dim, hyper.hidden, num_labels, next_seed()),
                     dataset.points.size(), loss, cfg);
    out.backdoored = res.model;
    double final_asr = asr(out.backdoored, out.trigger, originals, target,
                           &out.benign);
    for (const auto& e : res.log)
      out.log.push_back({"backdoor", e.epoch, e.loss, 0.0, 0.0});
    out.log.push_back({"final", hyper.backdoor_epochs, res.log.back().loss,
                       final_asr, 0.0});
  }

  return out;
}

double asr(const ModelParams& f_b, const TriggerNet& trigger,
           const std::vector<Eigen::VectorXd>& eval_inputs, std::size_t target,
           const ModelParams* f_p) {
  std::size_t valid = 0, hits = 0;
  for (const auto& x : eval_inputs) {
    Eigen::VectorXd ax = trigger.apply(x);
    if (f_p && (predict_label(*f_p, x) == target ||
                predict_label(*f_p, ax) == target))
      continue;
    ++valid;
    if (predict_label(f_b, ax) == target) ++hits;
  }
  return valid == 0 ? 0.0
                    : static_cast<double>(hits) / static_cast<double>(valid);
}

std::size_t grid_cell_index(const Eigen::VectorXd& p, std::size_t grid_n) {
  auto clamp_cell = [grid_n](double v) {
    auto c = static_cast<long long>(std::floor(v * static_cast<double>(grid_n)));
    if (c < 0) c = 0;
    if (c >= static_cast<long long>(grid_n)) c = static_cast<long long>(grid_n) - 1;
    return static_cast<std::size_t>(c);
  };
  return clamp_cell(p(1)) * grid_n + clamp_cell(p(0));
}

MeasuredAlpha measured_alpha(const FiniteTask& grid, std::size_t grid_n,
                             const ModelParams& f_p, const ModelParams& f_b,
                             const TriggerNet& trigger, std::size_t source,
                             std::size_t target, double beta,
                             std::uint64_t seed) {
  if (source == target) throw std::invalid_argument("source equals target");
  FiniteTask task = grid;
  task.num_labels = f_p.num_labels();
  task.conditional.clear();
  std::vector<Eigen::VectorXd> centers;
  for (const auto& c : grid.coords) {
    centers.push_back(to_eigen(c));
    task.conditional.push_back(proba_row(f_p, centers.back()));
  }

  MeasuredAlpha out;
  BackdoorSpec spec;
  spec.target = target;
  spec.beta = beta;
  for (std::size_t i = 0; i < task.num_inputs(); ++i) {
    // B lives on the task's support; cells the prior never reaches are not
    // inputs the backdoor can be asked about.
    if (task.prior[i] <= 0.0) continue;
    if (task.argmax_label(i) != source) continue;
    std::size_t img = grid_cell_index(trigger.apply(centers[i]), grid_n);
    if (task.argmax_label(img) == target) continue;  // Eq-2 validity
    spec.trigger.region.push_back(i);
    spec.trigger.image.push_back(img);
  }
  out.region_cells = spec.trigger.region.size();
  if (spec.trigger.region.empty()) return out;
  for (std::size_t img : spec.trigger.image_set())
    spec.target_conditional[img] = proba_row(f_b, centers[img]);
  spec.validate(task);

  out.kappa = kappa_of(task, spec.trigger);
  out.z_norm = z_norm_of(task, spec);
  try {
    auto rep = backdoor_distance(task, spec);
    out.alpha = rep.alpha;
    out.distance = rep.distance;
  } catch (const TheoremScopeError&) {
    out.s_mode = true;
    out.alpha = s_value(task, spec);
  }

  // Eq-5 cross-check: benign x ~ Pr(.|B), pushed through A at cell level.
  double pr_b = pr_region(task, spec.trigger.region);
  if (pr_b > 0.0) {
    Rng rng(seed);
    std::vector<std::vector<double>> samples;
    for (std::size_t k = 0; k < 200; ++k) {
      double u = rng.uniform() * pr_b;
      double acc = 0.0;
      std::size_t pick = spec.trigger.region.back();
      for (std::size_t i = 0; i < spec.trigger.region.size(); ++i) {
        acc += task.prior[spec.trigger.region[i]];
        if (u <= acc) {
          pick = spec.trigger.region[i];
          break;
        }
      }
      samples.push_back(grid.coords[spec.trigger.map_of(pick)]);
    }
    ConditionalOracle g_b{[&](const std::vector<double>& x) {
      return proba_row(f_b, to_eigen(x));
    }};
    ConditionalOracle g_p{[&](const std::vector<double>& x) {
      return proba_row(f_p, to_eigen(x));
    }};
    out.alpha_sampled =
        approx_alpha(samples, g_b, g_p, beta, out.kappa, out.z_norm);
  }
  return out;
}

}  // namespace bdlab
