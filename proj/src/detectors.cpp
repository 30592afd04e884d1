#include "bdlab/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bdlab/rng.hpp"

namespace bdlab {
namespace {

Eigen::VectorXd clip_box(Eigen::VectorXd v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = std::min(1.0, std::max(0.0, v(i)));
  return v;
}

Eigen::VectorXd project_ball(Eigen::VectorXd v, double radius) {
  double n = v.norm();
  if (n > radius && n > 0.0) v *= radius / n;
  return v;
}

// Mean probability gap for one label under a shared constant offset.
double offset_gap(const ModelParams& cand, const ModelParams& ref,
                  const std::vector<Eigen::VectorXd>& inputs,
                  const Eigen::VectorXd& offset, std::size_t target,
                  Eigen::VectorXd* dgap) {
  double gap = 0.0;
  if (dgap) dgap->setZero(offset.size());
  auto t = static_cast<Eigen::Index>(target);
  double inv = 1.0 / static_cast<double>(inputs.size());
  for (const auto& x : inputs) {
    Eigen::VectorXd ax = clip_box(x + offset);
    ForwardCache cc, cr;
    Eigen::VectorXd pc = forward_proba(cand, ax, &cc);
    Eigen::VectorXd pr = forward_proba(ref, ax, &cr);
    gap += inv * (pc(t) - pr(t));
    if (dgap) {
      Eigen::VectorXd dprob = Eigen::VectorXd::Zero(pc.size());
      dprob(t) = inv;
      // Straight-through across the box clip.
      *dgap += backward_from_dlogits(cand, cc, dprob_to_dlogits(pc, dprob),
                                     nullptr);
      *dgap -= backward_from_dlogits(ref, cr, dprob_to_dlogits(pr, dprob),
                                     nullptr);
    }
  }
  return gap;
}

Eigen::MatrixXd sample_covariance(const std::vector<Eigen::VectorXd>& xs,
                                  const Eigen::VectorXd& mean) {
  auto dim = mean.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& x : xs) {
    Eigen::VectorXd d = x - mean;
    cov += d * d.transpose();
  }
  return cov / static_cast<double>(xs.size() - 1);
}

Eigen::VectorXd group_mean(const std::vector<Eigen::VectorXd>& xs) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(xs.front().size());
  for (const auto& x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

}  // namespace

OutputDiffScore detect_output_diff(const ModelParams& candidate,
                                   const ModelParams& reference,
                                   const std::vector<Eigen::VectorXd>& inputs,
                                   const OutputDiffConfig& config) {
  if (inputs.empty()) throw std::invalid_argument("empty search input set");
  if (candidate.num_labels() != reference.num_labels())
    throw std::invalid_argument("label-count mismatch");
  if (config.delta <= 0.0) throw std::invalid_argument("delta must be positive");
  std::size_t dim = inputs.front().size();

  OutputDiffScore best;
  best.offset = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  Rng rng(config.seed);
  for (std::size_t t = 0; t < candidate.num_labels(); ++t) {
    for (std::size_t r = 0; r < config.restarts; ++r) {
      Eigen::VectorXd p(static_cast<Eigen::Index>(dim));
      for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.normal();
      p = project_ball(p * (config.delta / std::sqrt(double(dim))),
                       config.delta);
      for (std::size_t step = 0; step < config.steps; ++step) {
        Eigen::VectorXd g;
        double value = offset_gap(candidate, reference, inputs, p, t, &g);
        if (!std::isfinite(value) || !g.allFinite()) {
          best.diverged = true;
          break;
        }
        if (value > best.score) {
          best.score = value;
          best.target = t;
          best.offset = p;
        }
        p = project_ball(p + config.lr * g, config.delta);
      }
      double final_value = offset_gap(candidate, reference, inputs, p, t,
                                      nullptr);
      if (std::isfinite(final_value) && final_value > best.score) {
        best.score = final_value;
        best.target = t;
        best.offset = p;
      }
    }
  }
  return best;
}

Lemma3Report check_lemma3_bound(const FiniteTask& task,
                                const BackdoorSpec& spec, double tol) {
  spec.validate(task);
  Lemma3Report out;
  out.kappa = kappa_of(task, spec.trigger);

  double pr_b = pr_region(task, spec.trigger.region);
  double pr_ab = pr_region(task, spec.trigger.image_set());
  auto pre = spec.trigger.preimages();
  for (std::size_t img : spec.trigger.image_set()) {
    double pre_mass = 0.0;
    for (std::size_t z : pre.at(img)) pre_mass += task.prior[z];
    double g_b = spec.target_conditional.at(img)[spec.target];
    double g_p = task.conditional[img][spec.target];
    out.lhs += (pre_mass / pr_b) * g_b - (task.prior[img] / pr_ab) * g_p;
  }

  BackdoorSpec pinned = spec;
  pinned.beta = 1.0 / out.kappa;
  out.alpha = backdoor_distance(task, pinned).alpha;
  out.bound = out.alpha * out.kappa;
  out.holds = out.lhs <= out.bound + tol;
  return out;
}

ModelParams canonicalize_model(const ModelParams& m) {
  ModelParams c = m;
  for (std::size_t l = 0; l + 1 < c.num_layers(); ++l) {
    Eigen::Index rows = c.w[l].rows();
    // Sign: first significant incoming weight positive; tanh is odd, so the
    // flip is absorbed by the outgoing column.
    for (Eigen::Index i = 0; i < rows; ++i) {
      double lead = 0.0;
      for (Eigen::Index j = 0; j < c.w[l].cols(); ++j)
        if (std::abs(c.w[l](i, j)) > 1e-9) {
          lead = c.w[l](i, j);
          break;
        }
      if (lead == 0.0 && std::abs(c.b[l](i)) > 1e-9) lead = c.b[l](i);
      if (lead < 0.0) {
        c.w[l].row(i) *= -1.0;
        c.b[l](i) *= -1.0;
        c.w[l + 1].col(i) *= -1.0;
      }
    }
    // Permutation: descending incoming norm (bias included), stable on ties.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
    for (Eigen::Index i = 0; i < rows; ++i)
      order[static_cast<std::size_t>(i)] = i;
    auto key = [&](Eigen::Index i) {
      return std::sqrt(c.w[l].row(i).squaredNorm() + c.b[l](i) * c.b[l](i));
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                       return key(a) > key(b);
                     });
    Eigen::MatrixXd w_in(rows, c.w[l].cols());
    Eigen::VectorXd b_in(rows);
    Eigen::MatrixXd w_out(c.w[l + 1].rows(), rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      w_in.row(i) = c.w[l].row(order[static_cast<std::size_t>(i)]);
      b_in(i) = c.b[l](order[static_cast<std::size_t>(i)]);
      w_out.col(i) = c.w[l + 1].col(order[static_cast<std::size_t>(i)]);
    }
    c.w[l] = std::move(w_in);
    c.b[l] = std::move(b_in);
    c.w[l + 1] = std::move(w_out);
  }
  return c;
}

double weight_distance(const ModelParams& a, const ModelParams& b) {
  if (a.num_layers() != b.num_layers())
    throw std::invalid_argument("architecture mismatch");
  for (std::size_t l = 0; l < a.num_layers(); ++l)
    if (a.w[l].rows() != b.w[l].rows() || a.w[l].cols() != b.w[l].cols())
      throw std::invalid_argument("architecture mismatch");
  return (flatten_params(canonicalize_model(a)) -
          flatten_params(canonicalize_model(b)))
      .norm();
}

WeightDistanceReport detect_weight_distance(
    const ModelParams& candidate, const std::vector<ModelParams>& population) {
  if (population.size() < 3)
    throw std::invalid_argument("population too small to calibrate");
  WeightDistanceReport out;

  std::vector<double> loo;
  for (std::size_t i = 0; i < population.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < population.size(); ++j)
      if (j != i)
        best = std::min(best, weight_distance(population[i], population[j]));
    loo.push_back(best);
  }
  out.threshold = percentile_threshold(loo, 0.95);

  out.score = std::numeric_limits<double>::infinity();
  for (const auto& p : population)
    out.score = std::min(out.score, weight_distance(candidate, p));
  out.flagged = out.score > out.threshold;
  return out;
}

double affine_gain_alpha(const ModelParams& f_b, const ModelParams& f_p,
                         const std::vector<Eigen::VectorXd>& X, double beta) {
  if (f_b.num_layers() != 1 || f_p.num_layers() != 1)
    throw std::invalid_argument("affine regime requires single-layer models");
  if (X.empty()) throw std::invalid_argument("empty sample");
  double total = 0.0;
  for (const auto& x : X) {
    Eigen::VectorXd out_b = f_b.w[0] * x + f_b.b[0];
    Eigen::VectorXd out_p = f_p.w[0] * x + f_p.b[0];
    for (Eigen::Index y = 0; y < out_b.size(); ++y)
      total += std::max(out_p(y) - out_b(y), 0.0);
  }
  double m = static_cast<double>(X.size());
  double L = static_cast<double>(f_b.num_labels());
  return beta / (m * L) * total;
}

Lemma4Report check_lemma4_bound(const ModelParams& f_b, const ModelParams& f_p,
                                const std::vector<Eigen::VectorXd>& X,
                                double alpha, double kappa, double tol) {
  if (f_b.num_layers() != 1 || f_p.num_layers() != 1)
    throw std::invalid_argument("affine regime requires single-layer models");
  Lemma4Report out;
  Eigen::MatrixXd phi = ntk_feature_map(f_p, X);
  out.phi_norm = phi.jacobiSvd().singularValues()(0);
  double mL = static_cast<double>(X.size() * f_p.num_labels());
  out.lhs = kappa * std::sqrt(mL) / out.phi_norm * alpha;
  out.rhs = (flatten_params(f_b) - flatten_params(f_p)).norm();
  out.holds = out.lhs <= out.rhs + tol;
  return out;
}

double task_drift(const ModelParams& f_b, const ModelParams& f_p,
                  const std::vector<Eigen::VectorXd>& X) {
  double total = 0.0;
  for (const auto& x : X) {
    ForwardCache cb, cp;
    forward_proba(f_b, x, &cb);
    forward_proba(f_p, x, &cp);
    total += (cb.logits - cp.logits).squaredNorm();
  }
  return std::sqrt(total);
}

TaskDriftReport check_task_drift_bound(const ModelParams& f_b,
                                       const ModelParams& f_p,
                                       const std::vector<Eigen::VectorXd>& X,
                                       double alpha, double beta, double tol) {
  TaskDriftReport out;
  out.drift = task_drift(f_b, f_p, X);
  double mL = static_cast<double>(X.size() * f_p.num_labels());
  out.bound = alpha * std::sqrt(mL) / beta;
  out.holds = out.drift >= out.bound - tol;
  return out;
}

HotellingReport hotelling_t2(const std::vector<Eigen::VectorXd>& group_p,
                             const std::vector<Eigen::VectorXd>& group_b) {
  if (group_p.size() < 2 || group_b.size() < 2)
    throw std::invalid_argument("each group needs at least two samples");
  std::size_t dim = group_p.front().size();
  if (group_p.size() + group_b.size() <= dim + 2)
    throw std::invalid_argument("too few samples for the test dimension");

  HotellingReport r;
  r.n_p = group_p.size();
  r.n_b = group_b.size();
  r.m_p = group_mean(group_p);
  r.m_b = group_mean(group_b);
  double np = static_cast<double>(r.n_p), nb = static_cast<double>(r.n_b);
  r.sigma = ((np - 1.0) * sample_covariance(group_p, r.m_p) +
             (nb - 1.0) * sample_covariance(group_b, r.m_b)) /
            (np + nb - 2.0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r.sigma);
  double trace = r.sigma.trace();
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, trace)) {
    r.sigma += (1e-6 * trace / static_cast<double>(dim)) *
               Eigen::MatrixXd::Identity(dim, dim);
    r.ridged = true;
    eig.compute(r.sigma);
  }
  r.lambda_max = 1.0 / eig.eigenvalues().minCoeff();
  Eigen::VectorXd d = r.m_p - r.m_b;
  r.t2 = (np * nb / (np + nb)) * d.dot(r.sigma.ldlt().solve(d));
  return r;
}

std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>>
two_means_split(const std::vector<Eigen::VectorXd>& points) {
  if (points.size() < 2)
    throw std::invalid_argument("need at least two points to split");
  // Farthest pair as the initial centers keeps the split deterministic.
  std::size_t ia = 0, ib = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      double d = (points[i] - points[j]).squaredNorm();
      if (d > best) {
        best = d;
        ia = i;
        ib = j;
      }
    }
  Eigen::VectorXd ca = points[ia], cb = points[ib];
  std::vector<int> assign(points.size(), 0);
  for (std::size_t iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      int a = (points[i] - ca).squaredNorm() <= (points[i] - cb).squaredNorm()
                  ? 0
                  : 1;
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
    }
    Eigen::VectorXd sa = Eigen::VectorXd::Zero(ca.size());
    Eigen::VectorXd sb = Eigen::VectorXd::Zero(cb.size());
    std::size_t na = 0, nb = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (assign[i] == 0) {
        sa += points[i];
        ++na;
      } else {
        sb += points[i];
        ++nb;
      }
    }
    if (na == 0 || nb == 0) break;  // degenerate; keep previous centers
    ca = sa / static_cast<double>(na);
    cb = sb / static_cast<double>(nb);
    if (!changed) break;
  }
  std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    (assign[i] == 0 ? out.first : out.second).push_back(points[i]);
  return out;
}

std::vector<HotellingReport> detect_hotelling(
    const std::vector<std::vector<Eigen::VectorXd>>& reps_by_class,
    double threshold) {
  std::vector<HotellingReport> out;
  for (const auto& reps : reps_by_class) {
    auto [a, b] = two_means_split(reps);
    if (a.size() < 2 || b.size() < 2) {
      // One-sided split: no evidence of two populations.
      HotellingReport r;
      r.n_p = a.size();
      r.n_b = b.size();
      r.threshold = threshold;
      out.push_back(std::move(r));
      continue;
    }
    HotellingReport r = hotelling_t2(a, b);
    r.threshold = threshold;
    r.decision = r.t2 > threshold;
    out.push_back(std::move(r));
  }
  return out;
}

double percentile_threshold(std::vector<double> values, double percentile) {
  if (values.empty()) throw std::invalid_argument("empty calibration set");
  if (percentile <= 0.0 || percentile > 1.0)
    throw std::invalid_argument("percentile outside (0, 1]");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(
      std::ceil(percentile * static_cast<double>(values.size())));
  return values[std::min(values.size(), std::max<std::size_t>(rank, 1)) - 1];
}

bool check_lemma5_bound(const HotellingReport& report, double alpha,
                        double tol) {
  double np = static_cast<double>(report.n_p);
  double nb = static_cast<double>(report.n_b);
  double bound = report.lambda_max * (np * nb / (np + nb)) * alpha * alpha;
  return report.t2 <= bound + tol;
}

double balanced_accuracy(const std::vector<double>& benign,
                         const std::vector<double>& backdoored) {
  if (benign.empty() || backdoored.empty())
    throw std::invalid_argument("empty score list");
  std::vector<double> pooled = benign;
  pooled.insert(pooled.end(), backdoored.begin(), backdoored.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  std::vector<double> cuts;
  cuts.push_back(pooled.front() - 1.0);
  for (std::size_t i = 0; i + 1 < pooled.size(); ++i)
    cuts.push_back(0.5 * (pooled[i] + pooled[i + 1]));
  cuts.push_back(pooled.back() + 1.0);

  double best = 0.5;
  for (double cut : cuts) {
    double tpr = 0.0, tnr = 0.0;
    for (double s : backdoored) tpr += s > cut ? 1.0 : 0.0;
    for (double s : benign) tnr += s <= cut ? 1.0 : 0.0;
    tpr /= static_cast<double>(backdoored.size());
    tnr /= static_cast<double>(benign.size());
    double acc = 0.5 * (tpr + tnr);
    best = std::max({best, acc, 1.0 - acc});
  }
  return best;
}

double gamma_from_accuracy(double accuracy) {
  return std::abs(accuracy - 0.5) * 2.0;
}

DetectabilityScore detectability(const std::vector<DetectorScores>& scores) {
  if (scores.empty()) throw std::invalid_argument("no detector scores");
  DetectabilityScore out;
  for (const auto& s : scores) {
    double acc = balanced_accuracy(s.benign, s.backdoored);
    out.per_detector.emplace_back(s.name, acc);
    out.max_accuracy = std::max(out.max_accuracy, acc);
  }
  out.gamma = gamma_from_accuracy(out.max_accuracy);
  return out;
}

}  // namespace bdlab
