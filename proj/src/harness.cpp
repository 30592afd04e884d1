#include "bdlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bdlab/losses.hpp"
#include "bdlab/serialize.hpp"

namespace bdlab {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Mass of an isotropic Gaussian inside an axis-aligned cell.
double cell_mass(const GaussianBlob& blob, double x0, double x1, double y0,
                 double y1) {
  double mx = (normal_cdf((x1 - blob.mean[0]) / blob.sigma) -
               normal_cdf((x0 - blob.mean[0]) / blob.sigma));
  double my = (normal_cdf((y1 - blob.mean[1]) / blob.sigma) -
               normal_cdf((y0 - blob.mean[1]) / blob.sigma));
  return blob.weight * mx * my;
}

bool inside_unit_box(const Eigen::VectorXd& x) {
  return x(0) >= 0.0 && x(0) <= 1.0 && x(1) >= 0.0 && x(1) <= 1.0;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (classes.size() < 2)
    throw std::invalid_argument("generator needs at least two classes");
  if (grid_n < 2) throw std::invalid_argument("grid_n must be at least 2");
  if (points_per_class == 0)
    throw std::invalid_argument("points_per_class must be positive");
  for (const auto& cls : classes) {
    if (cls.blobs.empty())
      throw std::invalid_argument("every class needs at least one blob");
    for (const auto& blob : cls.blobs) {
      if (blob.mean.size() != 2)
        throw std::invalid_argument("blob means must be two dimensional");
      if (!(blob.sigma > 0.0))
        throw std::invalid_argument("blob sigma must be positive");
      if (!(blob.weight >= 0.0))
        throw std::invalid_argument("blob weights must be non-negative");
    }
  }
}

GeneratorSpec two_blob_spec(double separation, double sigma) {
  GeneratorSpec gen;
  gen.classes.resize(2);
  gen.classes[0].blobs.push_back({{0.5 - separation / 2.0, 0.5}, sigma, 1.0});
  gen.classes[1].blobs.push_back({{0.5 + separation / 2.0, 0.5}, sigma, 1.0});
  return gen;
}

GeneratedTask generate_task(const GeneratorSpec& gen, std::uint64_t seed) {
  gen.validate();
  const std::size_t n = gen.grid_n;
  const std::size_t cells = n * n;
  const std::size_t num_classes = gen.classes.size();

  // Exact per-class cell masses via the Gaussian CDF, then each class is
  // renormalized over the box so classes carry equal prior weight.
  std::vector<std::vector<double>> class_mass(num_classes,
                                              std::vector<double>(cells, 0.0));
  for (std::size_t c = 0; c < num_classes; ++c) {
    double total = 0.0;
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) {
        double x0 = static_cast<double>(ix) / n;
        double x1 = static_cast<double>(ix + 1) / n;
        double y0 = static_cast<double>(iy) / n;
        double y1 = static_cast<double>(iy + 1) / n;
        double m = 0.0;
        for (const auto& blob : gen.classes[c].blobs)
          m += cell_mass(blob, x0, x1, y0, y1);
        class_mass[c][iy * n + ix] = m;
        total += m;
      }
    }
    if (!(total > 0.0))
      throw std::invalid_argument("class " + std::to_string(c) +
                                  " has zero mass on the grid");
    for (double& m : class_mass[c]) m /= total * static_cast<double>(num_classes);
  }

  GeneratedTask out;
  out.grid.num_labels = num_classes;
  out.grid.coords.resize(cells);
  out.grid.prior.assign(cells, 0.0);
  out.grid.conditional.assign(cells, std::vector<double>(num_classes, 0.0));
  for (std::size_t iy = 0; iy < n; ++iy) {
    for (std::size_t ix = 0; ix < n; ++ix) {
      std::size_t cell = iy * n + ix;
      out.grid.coords[cell] = {(ix + 0.5) / n, (iy + 0.5) / n};
      double p = 0.0;
      for (std::size_t c = 0; c < num_classes; ++c) p += class_mass[c][cell];
      out.grid.prior[cell] = p;
      if (p > 0.0) {
        double row_sum = 0.0;
        for (std::size_t c = 0; c < num_classes; ++c) {
          out.grid.conditional[cell][c] = class_mass[c][cell] / p;
          row_sum += out.grid.conditional[cell][c];
        }
        std::size_t top = static_cast<std::size_t>(
            std::max_element(out.grid.conditional[cell].begin(),
                             out.grid.conditional[cell].end()) -
            out.grid.conditional[cell].begin());
        out.grid.conditional[cell][top] += 1.0 - row_sum;
      } else {
        for (std::size_t c = 0; c < num_classes; ++c)
          out.grid.conditional[cell][c] = 1.0 / static_cast<double>(num_classes);
      }
    }
  }
  // Pin the exact prior total by adjusting the heaviest cell.
  double total = std::accumulate(out.grid.prior.begin(), out.grid.prior.end(), 0.0);
  std::size_t heaviest = static_cast<std::size_t>(
      std::max_element(out.grid.prior.begin(), out.grid.prior.end()) -
      out.grid.prior.begin());
  out.grid.prior[heaviest] += 1.0 - total;
  out.grid.validate();

  // Balanced dataset from the truncated mixture: restart the whole draw on a
  // rejection so blob frequencies track weight times in-box mass.
  Rng rng(seed);
  for (std::size_t c = 0; c < num_classes; ++c) {
    double weight_sum = 0.0;
    for (const auto& blob : gen.classes[c].blobs) weight_sum += blob.weight;
    if (!(weight_sum > 0.0))
      throw std::invalid_argument("class " + std::to_string(c) +
                                  " has zero sampling weight");
    for (std::size_t i = 0; i < gen.points_per_class; ++i) {
      Eigen::VectorXd x(2);
      for (std::size_t attempt = 0;; ++attempt) {
        double pick = rng.uniform() * weight_sum;
        const GaussianBlob* blob = &gen.classes[c].blobs.back();
        for (const auto& b : gen.classes[c].blobs) {
          if (pick < b.weight) {
            blob = &b;
            break;
          }
          pick -= b.weight;
        }
        x << rng.normal(blob->mean[0], blob->sigma),
            rng.normal(blob->mean[1], blob->sigma);
        if (inside_unit_box(x)) break;
        if (attempt >= 100000)
          throw std::runtime_error("blob sampling kept leaving the unit box");
      }
      out.dataset.points.push_back({x, c, false});
    }
  }
  return out;
}

FiniteTask empirical_grid_task(const LabeledDataset& dataset,
                               std::size_t grid_n, std::size_t num_labels) {
  if (grid_n < 2) throw std::invalid_argument("grid_n must be at least 2");
  if (dataset.points.empty()) throw std::invalid_argument("empty dataset");
  const std::size_t cells = grid_n * grid_n;
  FiniteTask task;
  task.num_labels = num_labels;
  task.coords.resize(cells);
  task.prior.assign(cells, 0.0);
  task.conditional.assign(cells, std::vector<double>(num_labels, 0.0));
  std::vector<std::vector<double>> counts(cells,
                                          std::vector<double>(num_labels, 0.0));
  for (const auto& p : dataset.points) {
    if (p.y >= num_labels) throw std::invalid_argument("label out of range");
    counts[grid_cell_index(p.x, grid_n)][p.y] += 1.0;
  }
  for (std::size_t iy = 0; iy < grid_n; ++iy)
    for (std::size_t ix = 0; ix < grid_n; ++ix)
      task.coords[iy * grid_n + ix] = {(ix + 0.5) / grid_n, (iy + 0.5) / grid_n};
  const double n = static_cast<double>(dataset.points.size());
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double total = std::accumulate(counts[cell].begin(), counts[cell].end(), 0.0);
    task.prior[cell] = total / n;
    if (total > 0.0) {
      for (std::size_t y = 0; y < num_labels; ++y)
        task.conditional[cell][y] = counts[cell][y] / total;
    } else {
      for (std::size_t y = 0; y < num_labels; ++y)
        task.conditional[cell][y] = 1.0 / static_cast<double>(num_labels);
    }
  }
  double total = std::accumulate(task.prior.begin(), task.prior.end(), 0.0);
  std::size_t heaviest = static_cast<std::size_t>(
      std::max_element(task.prior.begin(), task.prior.end()) -
      task.prior.begin());
  task.prior[heaviest] += 1.0 - total;
  task.validate();
  return task;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("pearson needs equal-length series");
  const std::size_t n = xs.size();
  if (n < 2) throw std::invalid_argument("pearson needs at least two points");
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw std::invalid_argument("pearson is undefined for a constant series");
  return sxy / std::sqrt(sxx * syy);
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void SweepConfig::validate() const {
  gen.validate();
  if (alpha_stars.empty())
    throw std::invalid_argument("sweep needs at least one alpha* point");
  for (double a : alpha_stars)
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("alpha* points must lie in (0, 1)");
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("beta must lie in (0, 1]");
  if (benign_count < 2)
    throw std::invalid_argument("need at least two benign models");
  if (backdoored_count == 0)
    throw std::invalid_argument("need at least one backdoored model per point");
  if (source == target || source >= gen.classes.size() ||
      target >= gen.classes.size())
    throw std::invalid_argument("source and target must be distinct classes");
  if (!(asr_floor >= 0.0 && asr_floor <= 1.0))
    throw std::invalid_argument("asr_floor must lie in [0, 1]");
  if (diff_inputs == 0)
    throw std::invalid_argument("diff_inputs must be positive");
  if (detectors.empty())
    throw std::invalid_argument("sweep needs at least one detector");
  for (const auto& name : detectors) {
    if (name != "output_diff" && name != "weight_distance" &&
        name != "hotelling")
      throw std::invalid_argument("unknown detector: " + name);
    if (std::count(detectors.begin(), detectors.end(), name) != 1)
      throw std::invalid_argument("duplicate detector: " + name);
  }
}

namespace {

struct AttackRun {
  bool failed = false;
  bool included = false;
  double asr_value = 0.0;
  MeasuredAlpha alpha;
  double score_diff = 0.0;
  double score_weight = 0.0;
  double score_hotelling = 0.0;
};

// Last hidden activation (the input itself for affine models).
Eigen::VectorXd representation(const ModelParams& m, const Eigen::VectorXd& x) {
  ForwardCache cache;
  forward_proba(m, x, &cache);
  return cache.acts.back();
}

// Max over predicted classes of the split-group statistic; classes without
// enough points for the test contribute nothing.
}  // namespace

double hotelling_score(const ModelParams& m,
                       const std::vector<Eigen::VectorXd>& eval_inputs,
                       std::size_t num_classes) {
  std::vector<std::vector<Eigen::VectorXd>> by_class(num_classes);
  for (const auto& x : eval_inputs) {
    ForwardCache cache;
    Eigen::VectorXd probs = forward_proba(m, x, &cache);
    std::size_t label = 0;
    probs.maxCoeff(&label);
    by_class[label].push_back(cache.acts.back());
  }
  double best = 0.0;
  for (const auto& group : by_class) {
    if (group.size() < 4) continue;
    std::size_t dim = static_cast<std::size_t>(group.front().size());
    if (group.size() <= dim + 3) continue;
    auto split = two_means_split(group);
    if (split.first.size() < 2 || split.second.size() < 2) continue;
    auto report = hotelling_t2(split.first, split.second);
    best = std::max(best, report.t2);
  }
  return best;
}

namespace {

std::string csv_num(double v) { return format_probability(v); }

}  // namespace

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  const std::size_t points = config.alpha_stars.size();
  const std::size_t num_classes = config.gen.classes.size();

  // Every stream is seeded up front so worker scheduling cannot change them.
  Rng seeder(config.seed);
  std::uint64_t task_seed = seeder.next_u64();
  std::vector<std::uint64_t> benign_seeds(config.benign_count + 1);
  for (auto& s : benign_seeds) s = seeder.next_u64();
  std::vector<std::vector<std::uint64_t>> attack_seeds(
      points, std::vector<std::uint64_t>(config.backdoored_count));
  for (auto& row : attack_seeds)
    for (auto& s : row) s = seeder.next_u64();
  std::uint64_t diff_seed_base = seeder.next_u64();

  GeneratedTask gt = generate_task(config.gen, task_seed);
  const auto& dataset = gt.dataset;
  FiniteTask measure_grid =
      empirical_grid_task(dataset, config.gen.grid_n, num_classes);
  std::vector<std::size_t> region;
  std::vector<Eigen::VectorXd> region_x;
  for (std::size_t i = 0; i < dataset.points.size(); ++i) {
    if (dataset.points[i].y == config.source) {
      region.push_back(i);
      region_x.push_back(dataset.points[i].x);
    }
  }

  // Strided subsample so the search probes both classes evenly.
  std::vector<Eigen::VectorXd> diff_inputs;
  std::size_t stride =
      std::max<std::size_t>(1, dataset.points.size() / config.diff_inputs);
  for (std::size_t i = 0;
       i < dataset.points.size() && diff_inputs.size() < config.diff_inputs;
       i += stride)
    diff_inputs.push_back(dataset.points[i].x);
  std::vector<Eigen::VectorXd> eval_inputs;
  for (const auto& p : dataset.points) eval_inputs.push_back(p.x);

  // Benign population; index 0 is reserved as the output-diff reference.
  // Each reference trains on its own draw from the generator: the population
  // models the task, not the audited training set. Budget matches the
  // backdoored arm's fresh-model training so the detectors cannot separate
  // the arms on training time alone.
  auto train_benign = [&](std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset fresh = generate_task(config.gen, rng.next_u64()).dataset;
    ModelParams init =
        make_mlp(2, config.attack.hidden, num_classes, rng.next_u64());
    TrainConfig tc;
    tc.lr = config.attack.lr;
    tc.epochs = config.attack.backdoor_epochs;
    tc.batch_size = config.attack.batch_size;
    tc.seed = rng.next_u64();
    BatchLoss loss = [&](const ModelParams& m,
                         const std::vector<std::size_t>& idx, Gradients* g) {
      std::vector<LabeledPoint> batch;
      batch.reserve(idx.size());
      for (std::size_t i : idx) batch.push_back(fresh.points[i]);
      return cross_entropy(m, batch, g);
    };
    try {
      return train(init, fresh.points.size(), loss, tc).model;
    } catch (const TrainDivergedError& e) {
      return e.last_finite_model;
    }
  };

  std::vector<ModelParams> benign_models(config.benign_count + 1);
  parallel_for(config.benign_count + 1, config.threads,
               [&](std::size_t i) { benign_models[i] = train_benign(benign_seeds[i]); });
  const ModelParams& reference = benign_models[0];

  // Attack grid: one run per (alpha* point, model index).
  std::vector<std::vector<AttackRun>> runs(
      points, std::vector<AttackRun>(config.backdoored_count));
  std::vector<std::vector<AttackResult>> results(points);
  for (auto& r : results) r.resize(config.backdoored_count);
  parallel_for(points * config.backdoored_count, config.threads,
               [&](std::size_t flat) {
                 std::size_t pi = flat / config.backdoored_count;
                 std::size_t mi = flat % config.backdoored_count;
                 AttackHyperparams hyper = config.attack;
                 hyper.alpha_star = config.alpha_stars[pi];
                 hyper.beta = config.beta;
                 hyper.seed = attack_seeds[pi][mi];
                 AttackRun& run = runs[pi][mi];
                 try {
                   results[pi][mi] =
                       tsa_attack(dataset, region, config.target, hyper);
                   const AttackResult& res = results[pi][mi];
                   run.asr_value = asr(res.backdoored, res.trigger, region_x,
                                       config.target, &res.benign);
                   run.alpha = measured_alpha(
                       measure_grid, config.gen.grid_n, res.benign, res.backdoored,
                       res.trigger, config.source, config.target, config.beta,
                       attack_seeds[pi][mi]);
                   run.included = run.asr_value >= config.asr_floor;
                 } catch (const std::exception&) {
                   run.failed = true;
                 }
               });

  // Detector scores. Canonical benign flattenings are shared by every
  // weight-distance query.
  std::vector<Eigen::VectorXd> benign_flat;
  for (std::size_t i = 1; i < benign_models.size(); ++i)
    benign_flat.push_back(flatten_params(canonicalize_model(benign_models[i])));
  auto min_distance = [&](const Eigen::VectorXd& flat, std::size_t skip) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < benign_flat.size(); ++j) {
      if (j == skip) continue;
      best = std::min(best, (flat - benign_flat[j]).norm());
    }
    return best;
  };

  std::vector<double> benign_diff(config.benign_count);
  std::vector<double> benign_weight(config.benign_count);
  std::vector<double> benign_hot(config.benign_count);
  parallel_for(config.benign_count, config.threads, [&](std::size_t i) {
    OutputDiffConfig dc = config.output_diff;
    dc.seed = diff_seed_base + i;
    benign_diff[i] =
        detect_output_diff(benign_models[i + 1], reference, diff_inputs, dc)
            .score;
    benign_weight[i] = min_distance(benign_flat[i], i);
    benign_hot[i] = hotelling_score(benign_models[i + 1], eval_inputs,
                                    num_classes);
  });

  parallel_for(points * config.backdoored_count, config.threads,
               [&](std::size_t flat) {
                 std::size_t pi = flat / config.backdoored_count;
                 std::size_t mi = flat % config.backdoored_count;
                 AttackRun& run = runs[pi][mi];
                 if (run.failed) return;
                 const AttackResult& res = results[pi][mi];
                 OutputDiffConfig dc = config.output_diff;
                 dc.seed = diff_seed_base + config.benign_count + flat;
                 run.score_diff =
                     detect_output_diff(res.backdoored, reference, diff_inputs,
                                        dc)
                         .score;
                 run.score_weight = min_distance(
                     flatten_params(canonicalize_model(res.backdoored)),
                     benign_flat.size());
                 run.score_hotelling =
                     hotelling_score(res.backdoored, eval_inputs, num_classes);
               });

  SweepResult out;
  out.runs_launched = points * config.backdoored_count;
  auto uses = [&](const char* name) {
    return std::find(config.detectors.begin(), config.detectors.end(), name) !=
           config.detectors.end();
  };
  std::vector<double> xs, ys, abs_diffs;
  for (std::size_t pi = 0; pi < points; ++pi) {
    SweepRow row;
    row.alpha_star = config.alpha_stars[pi];
    std::vector<double> bd_diff, bd_weight, bd_hot;
    for (const AttackRun& run : runs[pi]) {
      if (!run.included) {
        ++row.excluded;
        continue;
      }
      ++row.included;
      row.alpha_over_beta += run.alpha.alpha / config.beta;
      row.sampled_alpha_over_beta += run.alpha.alpha_sampled / config.beta;
      bd_diff.push_back(run.score_diff);
      bd_weight.push_back(run.score_weight);
      bd_hot.push_back(run.score_hotelling);
    }
    if (row.included > 0) {
      row.alpha_over_beta /= row.included;
      row.sampled_alpha_over_beta /= row.included;
      std::vector<DetectorScores> lists;
      if (uses("output_diff"))
        lists.push_back({"output_diff", benign_diff, bd_diff});
      if (uses("weight_distance"))
        lists.push_back({"weight_distance", benign_weight, bd_weight});
      if (uses("hotelling")) lists.push_back({"hotelling", benign_hot, bd_hot});
      DetectabilityScore score = detectability(lists);
      row.detector_accuracy = score.per_detector;
      row.gamma = score.gamma;
      xs.push_back(row.alpha_over_beta);
      ys.push_back(row.gamma);
      abs_diffs.push_back(std::abs(row.alpha_over_beta - row.gamma));
    }
    out.runs_excluded += row.excluded;
    out.rows.push_back(row);
  }

  try {
    out.pearson_gamma_alpha = pearson(xs, ys);
  } catch (const std::invalid_argument&) {
    out.pearson_gamma_alpha = 0.0;
  }
  if (!abs_diffs.empty()) {
    out.mean_abs_diff =
        std::accumulate(abs_diffs.begin(), abs_diffs.end(), 0.0) /
        abs_diffs.size();
    double var = 0.0;
    for (double d : abs_diffs)
      var += (d - out.mean_abs_diff) * (d - out.mean_abs_diff);
    out.std_abs_diff = std::sqrt(var / abs_diffs.size());
  }

  out.csv = sweep_csv(out);
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    std::ofstream csv(std::filesystem::path(config.out_dir) / "sweep.csv",
                      std::ios::binary);
    csv << out.csv;
    std::ofstream svg(std::filesystem::path(config.out_dir) / "sweep.svg",
                      std::ios::binary);
    svg << sweep_svg(out);
  }
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "alpha_star,alpha_over_beta,sampled_alpha_over_beta,acc_output_diff,"
        "acc_weight_distance,acc_hotelling,gamma,included,excluded\n";
  for (const SweepRow& row : result.rows) {
    auto acc_of = [&](const char* name) {
      for (const auto& [n, a] : row.detector_accuracy)
        if (n == name) return a;
      return 0.5;
    };
    double acc[3] = {acc_of("output_diff"), acc_of("weight_distance"),
                     acc_of("hotelling")};
    os << csv_num(row.alpha_star) << ',' << csv_num(row.alpha_over_beta) << ','
       << csv_num(row.sampled_alpha_over_beta) << ',' << csv_num(acc[0]) << ','
       << csv_num(acc[1]) << ',' << csv_num(acc[2]) << ','
       << csv_num(row.gamma) << ',' << row.included << ',' << row.excluded
       << '\n';
  }
  os << "# pearson_gamma_alpha," << csv_num(result.pearson_gamma_alpha) << '\n';
  os << "# mean_abs_diff," << csv_num(result.mean_abs_diff) << '\n';
  os << "# std_abs_diff," << csv_num(result.std_abs_diff) << '\n';
  os << "# runs_launched," << result.runs_launched << '\n';
  os << "# runs_excluded," << result.runs_excluded << '\n';
  return os.str();
}

namespace {

std::string svg_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string polyline(const std::vector<std::pair<double, double>>& pts,
                     const char* color) {
  std::ostringstream os;
  os << "  <polyline fill=\"none\" stroke=\"" << color
     << "\" stroke-width=\"2\" points=\"";
  for (const auto& [x, y] : pts) os << svg_coord(x) << ',' << svg_coord(y) << ' ';
  os << "\"/>\n";
  for (const auto& [x, y] : pts)
    os << "  <circle cx=\"" << svg_coord(x) << "\" cy=\"" << svg_coord(y)
       << "\" r=\"3\" fill=\"" << color << "\"/>\n";
  return os.str();
}

}  // namespace

std::string sweep_svg(const SweepResult& result) {
  const double w = 640, h = 400, ml = 60, mr = 20, mt = 30, mb = 50;
  double x_lo = 0.0, x_hi = 1.0, y_hi = 1.0;
  for (const SweepRow& row : result.rows)
    y_hi = std::max({y_hi, row.alpha_over_beta, row.gamma});
  auto px = [&](double v) { return ml + (v - x_lo) / (x_hi - x_lo) * (w - ml - mr); };
  auto py = [&](double v) { return h - mb - v / y_hi * (h - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
        "height=\"400\" viewBox=\"0 0 640 400\">\n";
  os << "  <rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  os << "  <line x1=\"" << svg_coord(ml) << "\" y1=\"" << svg_coord(h - mb)
     << "\" x2=\"" << svg_coord(w - mr) << "\" y2=\"" << svg_coord(h - mb)
     << "\" stroke=\"black\"/>\n";
  os << "  <line x1=\"" << svg_coord(ml) << "\" y1=\"" << svg_coord(mt)
     << "\" x2=\"" << svg_coord(ml) << "\" y2=\"" << svg_coord(h - mb)
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double fx = x_lo + (x_hi - x_lo) * i / 5.0;
    double fy = y_hi * i / 5.0;
    os << "  <text x=\"" << svg_coord(px(fx)) << "\" y=\"" << svg_coord(h - mb + 18)
       << "\" font-size=\"11\" text-anchor=\"middle\">" << svg_coord(fx)
       << "</text>\n";
    os << "  <text x=\"" << svg_coord(ml - 8) << "\" y=\"" << svg_coord(py(fy) + 4)
       << "\" font-size=\"11\" text-anchor=\"end\">" << svg_coord(fy)
       << "</text>\n";
  }
  os << "  <text x=\"" << svg_coord((ml + w - mr) / 2) << "\" y=\""
     << svg_coord(h - 12)
     << "\" font-size=\"13\" text-anchor=\"middle\">alpha*</text>\n";
  std::vector<std::pair<double, double>> gamma_pts, alpha_pts;
  for (const SweepRow& row : result.rows) {
    gamma_pts.emplace_back(px(row.alpha_star), py(row.gamma));
    alpha_pts.emplace_back(px(row.alpha_star), py(row.alpha_over_beta));
  }
  os << polyline(alpha_pts, "#1f77b4");
  os << polyline(gamma_pts, "#d62728");
  os << "  <text x=\"" << svg_coord(ml + 10) << "\" y=\"" << svg_coord(mt - 8)
     << "\" font-size=\"12\" fill=\"#1f77b4\">alpha/beta</text>\n";
  os << "  <text x=\"" << svg_coord(ml + 110) << "\" y=\"" << svg_coord(mt - 8)
     << "\" font-size=\"12\" fill=\"#d62728\">gamma</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace bdlab
