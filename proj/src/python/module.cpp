// Python bindings for the core operations: exact distance reports, the
// sampled estimators, task generation, the attack pipeline, detector
// scoring and the population sweep.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "bdlab/attack.hpp"
#include "bdlab/detectors.hpp"
#include "bdlab/estimators.hpp"
#include "bdlab/harness.hpp"
#include "bdlab/serialize.hpp"
#include "bdlab/task.hpp"

namespace py = pybind11;
using namespace bdlab;

namespace {

py::dict report_to_dict(const DistanceReport& report, bool theorem_scope) {
  py::dict out;
  out["distance"] = report.distance;
  out["alpha"] = report.alpha;
  out["kappa"] = report.kappa;
  out["s_value"] = report.s_value;
  out["z_norm"] = report.z_norm;
  out["pr_B"] = report.pr_B;
  out["pr_AB"] = report.pr_AB;
  out["h_divergence"] = report.h_divergence();
  out["lower_bound"] = report.lower_bound;
  out["upper_bound"] = report.upper_bound;
  out["bounds_sound"] = report.bounds_sound;
  out["mode"] = theorem_scope ? "probability-gain" : "transport";
  return out;
}

py::dict distance_report(const std::string& json_text) {
  auto [task, spec] = task_spec_from_json(json_text);
  task.validate();
  spec.validate(task);
  try {
    return report_to_dict(backdoor_distance(task, spec), true);
  } catch (const TheoremScopeError&) {
    DistanceReport report;
    JointDistribution joint = build_backdoor_distribution(task, spec);
    report.distance = d_hw1_exact(task.primary_joint(), joint).distance;
    report.pr_B = pr_region(task, spec.trigger.region);
    report.pr_AB = pr_region(task, spec.trigger.image_set());
    report.alpha = report.pr_B > 0.0 ? report.distance / report.pr_B : 0.0;
    report.kappa = kappa_of(task, spec.trigger);
    report.s_value = s_value(task, spec);
    report.z_norm = z_norm_of(task, spec);
    return report_to_dict(report, false);
  }
}

double hw1(const std::vector<std::vector<double>>& d1,
           const std::vector<std::vector<double>>& d2) {
  if (d1.empty() || d1.size() != d2.size())
    throw std::invalid_argument("joint tables must have equal nonzero size");
  JointDistribution a, b;
  a.num_inputs = b.num_inputs = d1.size();
  a.num_labels = b.num_labels = d1.front().size();
  for (std::size_t x = 0; x < d1.size(); ++x) {
    if (d1[x].size() != a.num_labels || d2[x].size() != a.num_labels)
      throw std::invalid_argument("ragged joint table");
    for (double v : d1[x]) a.mass.push_back(v);
    for (double v : d2[x]) b.mass.push_back(v);
  }
  a.validate();
  b.validate();
  return d_hw1_exact(a, b).distance;
}

GeneratorSpec build_gen(double separation, double sigma, std::size_t grid_n,
                        std::size_t points_per_class,
                        const std::vector<std::vector<double>>& extra_blobs) {
  GeneratorSpec gen = two_blob_spec(separation, sigma);
  gen.grid_n = grid_n;
  gen.points_per_class = points_per_class;
  // Each extra blob is (class, mean_x, mean_y, sigma, weight).
  for (const auto& blob : extra_blobs) {
    if (blob.size() != 5)
      throw std::invalid_argument(
          "extra blobs are (class, mean_x, mean_y, sigma, weight)");
    auto cls = static_cast<std::size_t>(blob[0]);
    if (cls >= gen.classes.size())
      throw std::invalid_argument("extra blob class out of range");
    gen.classes[cls].blobs.push_back({{blob[1], blob[2]}, blob[3], blob[4]});
  }
  return gen;
}

py::dict generate(double separation, double sigma, std::size_t grid_n,
                  std::size_t points_per_class, std::uint64_t seed,
                  const std::vector<std::vector<double>>& extra_blobs) {
  GeneratedTask task =
      generate_task(build_gen(separation, sigma, grid_n, points_per_class,
                              extra_blobs),
                    seed);
  py::dict out;
  std::vector<std::vector<double>> points;
  std::vector<std::size_t> labels;
  for (const auto& p : task.dataset.points) {
    points.push_back({p.x(0), p.x(1)});
    labels.push_back(p.y);
  }
  out["points"] = points;
  out["labels"] = labels;
  out["prior"] = task.grid.prior;
  out["conditional"] = task.grid.conditional;
  out["task_json"] = task_to_json(task.grid);
  return out;
}

RegionOracle disc_region(const std::vector<double>& center, double radius) {
  if (center.size() != 2)
    throw std::invalid_argument("disc centers are two dimensional");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  RegionOracle region;
  region.contains = [center, radius](const std::vector<double>& x) {
    double dx = x[0] - center[0], dy = x[1] - center[1];
    return dx * dx + dy * dy <= radius * radius;
  };
  region.sample = [center, radius](Rng& rng) {
    for (;;) {
      double dx = (2.0 * rng.uniform() - 1.0) * radius;
      double dy = (2.0 * rng.uniform() - 1.0) * radius;
      if (dx * dx + dy * dy > radius * radius) continue;
      return std::vector<double>{center[0] + dx, center[1] + dy};
    }
  };
  return region;
}

py::dict kappa_discs(const std::vector<double>& b_center, double b_radius,
                     const std::vector<double>& ab_center, double ab_radius,
                     const std::vector<double>& prior_mean, double prior_var,
                     std::uint64_t seed) {
  EstimatorConfig config;
  config.seed = seed;
  KappaEstimate est =
      estimate_kappa(disc_region(b_center, b_radius),
                     disc_region(ab_center, ab_radius),
                     GaussianPriorModel{prior_mean, prior_var}, config);
  py::dict out;
  out["kappa"] = est.kappa;
  out["kappa_v"] = est.kappa_v;
  out["ln_kappa_pr"] = est.ln_kappa_pr;
  out["ext_b"] = est.ext_b;
  out["ext_ab"] = est.ext_ab;
  out["clamped"] = est.clamped;
  return out;
}

py::dict attack(double separation, double sigma, std::size_t grid_n,
                std::size_t points_per_class, std::size_t source,
                std::size_t target, double alpha_star, double beta,
                std::size_t benign_epochs, std::size_t backdoor_epochs,
                std::size_t trigger_epochs, std::size_t disc_epochs,
                std::size_t refine_epochs, std::uint64_t seed) {
  GeneratorSpec gen = build_gen(separation, sigma, grid_n, points_per_class, {});
  GeneratedTask task = generate_task(gen, seed);
  std::vector<std::size_t> region;
  std::vector<Eigen::VectorXd> region_inputs;
  for (std::size_t i = 0; i < task.dataset.points.size(); ++i) {
    if (task.dataset.points[i].y != source) continue;
    region.push_back(i);
    region_inputs.push_back(task.dataset.points[i].x);
  }
  AttackHyperparams hyper;
  hyper.alpha_star = alpha_star;
  hyper.beta = beta;
  hyper.benign_epochs = benign_epochs;
  hyper.backdoor_epochs = backdoor_epochs;
  hyper.trigger_epochs = trigger_epochs;
  hyper.disc_epochs = disc_epochs;
  hyper.refine_epochs = refine_epochs;
  hyper.seed = seed;
  AttackResult result = tsa_attack(task.dataset, region, target, hyper);
  double success = asr(result.backdoored, result.trigger, region_inputs, target,
                       &result.benign);
  FiniteTask measure =
      empirical_grid_task(task.dataset, gen.grid_n, gen.classes.size());
  MeasuredAlpha alpha =
      measured_alpha(measure, gen.grid_n, result.benign, result.backdoored,
                     result.trigger, source, target, beta, seed);
  py::dict out;
  out["asr"] = success;
  out["alpha"] = alpha.alpha;
  out["alpha_sampled"] = alpha.alpha_sampled;
  out["s_mode"] = alpha.s_mode;
  out["kappa"] = alpha.kappa;
  out["trigger_ineffective"] = result.trigger_ineffective;
  out["benign_model"] = model_to_text(result.benign);
  out["backdoored_model"] = model_to_text(result.backdoored);
  out["trigger_model"] = model_to_text(result.trigger.net);
  return out;
}

double weight_distance_text(const std::string& a, const std::string& b) {
  return weight_distance(canonicalize_model(model_from_text(a)),
                         canonicalize_model(model_from_text(b)));
}

py::dict sweep(const std::vector<double>& alpha_stars, double beta,
               std::size_t benign_count, std::size_t backdoored_count,
               double separation, double sigma, std::size_t grid_n,
               std::size_t points_per_class,
               const std::vector<std::vector<double>>& extra_blobs,
               const std::vector<std::string>& detectors, double diff_delta,
               std::uint64_t seed, const std::string& out_dir) {
  SweepConfig config;
  config.gen =
      build_gen(separation, sigma, grid_n, points_per_class, extra_blobs);
  config.alpha_stars = alpha_stars;
  config.beta = beta;
  config.benign_count = benign_count;
  config.backdoored_count = backdoored_count;
  if (!detectors.empty()) config.detectors = detectors;
  config.output_diff.delta = diff_delta;
  config.seed = seed;
  config.out_dir = out_dir;
  SweepResult result = run_sweep(config);
  py::dict out;
  py::list rows;
  for (const auto& row : result.rows) {
    py::dict r;
    r["alpha_star"] = row.alpha_star;
    r["alpha_over_beta"] = row.alpha_over_beta;
    r["sampled_alpha_over_beta"] = row.sampled_alpha_over_beta;
    r["detector_accuracy"] = row.detector_accuracy;
    r["gamma"] = row.gamma;
    r["included"] = row.included;
    r["excluded"] = row.excluded;
    rows.append(r);
  }
  out["rows"] = rows;
  out["pearson"] = result.pearson_gamma_alpha;
  out["mean_abs_diff"] = result.mean_abs_diff;
  out["std_abs_diff"] = result.std_abs_diff;
  out["runs_launched"] = result.runs_launched;
  out["runs_excluded"] = result.runs_excluded;
  out["csv"] = result.csv;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Backdoor-distance laboratory core bindings";

  m.def("distance_report", &distance_report, py::arg("task_spec_json"),
        "Exact distance report from a task+spec JSON document.");
  m.def("hw1", &hw1, py::arg("d1"), py::arg("d2"),
        "Exact hypothesis-Wasserstein distance between two joint tables.");
  m.def("pearson", &pearson, py::arg("xs"), py::arg("ys"),
        "Sample Pearson correlation coefficient.");
  m.def("generate_task", &generate, py::arg("separation") = 0.5,
        py::arg("sigma") = 0.04, py::arg("grid_n") = 32,
        py::arg("points_per_class") = 200, py::arg("seed") = 0,
        py::arg("extra_blobs") = std::vector<std::vector<double>>{},
        "Sample a Gaussian-mixture dataset plus its grid discretization.");
  m.def("estimate_kappa_discs", &kappa_discs, py::arg("b_center"),
        py::arg("b_radius"), py::arg("ab_center"), py::arg("ab_radius"),
        py::arg("prior_mean"), py::arg("prior_var"), py::arg("seed") = 0,
        "Sampled kappa estimate for a pair of disc regions.");
  m.def("attack", &attack, py::arg("separation") = 0.5, py::arg("sigma") = 0.04,
        py::arg("grid_n") = 32, py::arg("points_per_class") = 200,
        py::arg("source") = 1, py::arg("target") = 0,
        py::arg("alpha_star") = 0.9, py::arg("beta") = 0.1,
        py::arg("benign_epochs") = 400, py::arg("backdoor_epochs") = 1000,
        py::arg("trigger_epochs") = 40, py::arg("disc_epochs") = 30,
        py::arg("refine_epochs") = 15, py::arg("seed") = 0,
        "Run the attack on a generated task and report ASR and alpha.");
  m.def("weight_distance", &weight_distance_text, py::arg("model_a"),
        py::arg("model_b"),
        "Symmetry-canonical L2 distance between two model dumps.");
  m.def("sweep", &sweep, py::arg("alpha_stars"), py::arg("beta") = 0.1,
        py::arg("benign_count") = 20, py::arg("backdoored_count") = 20,
        py::arg("separation") = 0.5, py::arg("sigma") = 0.04,
        py::arg("grid_n") = 32, py::arg("points_per_class") = 200,
        py::arg("extra_blobs") = std::vector<std::vector<double>>{},
        py::arg("detectors") = std::vector<std::string>{},
        py::arg("diff_delta") = 0.5, py::arg("seed") = 0,
        py::arg("out_dir") = std::string{},
        "Population sweep over alpha*; returns rows and the CSV text.");
}
