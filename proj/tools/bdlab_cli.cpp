// Command-line front end: exact distance reports, kappa estimation, the
// attack pipeline, detector scoring, threshold calibration and the full
// population sweep. Every run is deterministic in --seed and all artifacts
// are written under --out-dir.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bdlab/attack.hpp"
#include "bdlab/detectors.hpp"
#include "bdlab/estimators.hpp"
#include "bdlab/harness.hpp"
#include "bdlab/serialize.hpp"
#include "bdlab/task.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bdlab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string num(double v) { return format_probability(v); }

// Writes to out_dir/<name> when an output directory is set, otherwise prints
// the document to stdout.
void emit(const std::string& out_dir, const std::string& name,
          const std::string& text) {
  if (out_dir.empty()) {
    std::cout << text;
  } else {
    spit(fs::path(out_dir) / name, text);
    std::cout << "wrote " << (fs::path(out_dir) / name).string() << "\n";
  }
}

std::string model_id(const std::string& path) {
  return fs::path(path).stem().string();
}

// Config-file fallback: a flag given on the command line wins, otherwise a
// matching key in the JSON document fills the value.
template <typename T>
void from_config(const json& doc, const CLI::App& app, const std::string& flag,
                 const std::string& key, T& out) {
  if (!doc.contains(key)) return;
  if (app.count("--" + flag) > 0) return;
  doc.at(key).get_to(out);
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  json doc = json::parse(slurp(path));
  if (!doc.is_object()) throw std::runtime_error("config must be an object");
  return doc;
}

// ---------------------------------------------------------------------------
// distance

int cmd_distance(const std::string& input, const std::string& out_dir) {
  auto [task, spec] = task_spec_from_json(slurp(input));
  task.validate();
  spec.validate(task);
  for (const auto& warning : spec.range_warnings(task))
    std::cout << "warning: " << warning << "\n";

  DistanceReport report;
  bool theorem_scope = true;
  try {
    report = backdoor_distance(task, spec);
  } catch (const TheoremScopeError&) {
    theorem_scope = false;
    JointDistribution joint = build_backdoor_distribution(task, spec);
    HW1Result exact = d_hw1_exact(task.primary_joint(), joint);
    report.distance = exact.distance;
    report.witness = exact.witness;
    report.pr_B = pr_region(task, spec.trigger.region);
    report.pr_AB = pr_region(task, spec.trigger.image_set());
    report.alpha = report.pr_B > 0.0 ? report.distance / report.pr_B : 0.0;
    report.kappa = kappa_of(task, spec.trigger);
    report.s_value = s_value(task, spec);
    report.z_norm = z_norm_of(task, spec);
  }

  std::ostringstream text;
  text << "distance      " << num(report.distance) << "\n"
       << "alpha         " << num(report.alpha) << "\n"
       << "kappa         " << num(report.kappa) << "\n"
       << "s_value       " << num(report.s_value) << "\n"
       << "z_norm        " << num(report.z_norm) << "\n"
       << "pr_B          " << num(report.pr_B) << "\n"
       << "pr_AB         " << num(report.pr_AB) << "\n"
       << "h_divergence  " << num(report.h_divergence()) << "\n"
       << "mode          " << (theorem_scope ? "probability-gain" : "transport")
       << "\n";
  if (report.bounds_sound)
    text << "bounds        [" << num(report.lower_bound) << ", "
         << num(report.upper_bound) << "]\n";
  std::cout << text.str();

  std::ostringstream csv;
  csv << "quantity,value\n"
      << "distance," << num(report.distance) << "\n"
      << "alpha," << num(report.alpha) << "\n"
      << "kappa," << num(report.kappa) << "\n"
      << "s_value," << num(report.s_value) << "\n"
      << "z_norm," << num(report.z_norm) << "\n"
      << "pr_B," << num(report.pr_B) << "\n"
      << "pr_AB," << num(report.pr_AB) << "\n"
      << "lower_bound," << num(report.lower_bound) << "\n"
      << "upper_bound," << num(report.upper_bound) << "\n"
      << "bounds_sound," << (report.bounds_sound ? 1 : 0) << "\n";
  if (!out_dir.empty()) emit(out_dir, "distance.csv", csv.str());
  return 0;
}

// ---------------------------------------------------------------------------
// estimate-kappa

struct RegionArgs {
  std::string shape = "disc";
  std::vector<double> center = {0.5, 0.5};
  double size = 0.1;
};

RegionOracle make_region(const RegionArgs& args) {
  if (args.shape != "disc" && args.shape != "square")
    throw std::runtime_error("region shape must be disc or square");
  if (args.center.size() != 2)
    throw std::runtime_error("region centers are two dimensional");
  if (!(args.size > 0.0)) throw std::runtime_error("region size must be positive");
  RegionOracle region;
  bool disc = args.shape == "disc";
  std::vector<double> c = args.center;
  double s = args.size;
  region.contains = [disc, c, s](const std::vector<double>& x) {
    double dx = x[0] - c[0], dy = x[1] - c[1];
    if (disc) return dx * dx + dy * dy <= s * s;
    return std::abs(dx) <= s && std::abs(dy) <= s;
  };
  region.sample = [disc, c, s](Rng& rng) {
    for (;;) {
      double dx = (2.0 * rng.uniform() - 1.0) * s;
      double dy = (2.0 * rng.uniform() - 1.0) * s;
      if (disc && dx * dx + dy * dy > s * s) continue;
      return std::vector<double>{c[0] + dx, c[1] + dy};
    }
  };
  return region;
}

int cmd_estimate_kappa(const RegionArgs& b, const RegionArgs& ab,
                       const std::vector<double>& prior_mean, double prior_var,
                       EstimatorConfig config, std::size_t repeats,
                       const std::string& out_dir) {
  if (repeats < 2) throw std::runtime_error("repeats must be at least 2");
  GaussianPriorModel prior{prior_mean, prior_var};
  RegionOracle region_b = make_region(b);
  RegionOracle region_ab = make_region(ab);

  std::vector<std::vector<double>> samples(5);
  std::uint64_t base_seed = config.seed;
  for (std::size_t r = 0; r < repeats; ++r) {
    config.seed = base_seed + r;
    KappaEstimate est = estimate_kappa(region_b, region_ab, prior, config);
    samples[0].push_back(est.kappa);
    samples[1].push_back(est.kappa_v);
    samples[2].push_back(est.ln_kappa_pr);
    samples[3].push_back(est.ext_b);
    samples[4].push_back(est.ext_ab);
  }

  const char* names[5] = {"kappa", "kappa_v", "ln_kappa_pr", "ext_b", "ext_ab"};
  std::ostringstream csv;
  csv << "quantity,value,stderr,seed\n";
  for (std::size_t q = 0; q < 5; ++q) {
    double mean = 0.0;
    for (double v : samples[q]) mean += v;
    mean /= static_cast<double>(repeats);
    double var = 0.0;
    for (double v : samples[q]) var += (v - mean) * (v - mean);
    double se = std::sqrt(var / static_cast<double>(repeats - 1) /
                          static_cast<double>(repeats));
    csv << names[q] << ',' << num(mean) << ',' << num(se) << ',' << base_seed
        << "\n";
    std::cout << names[q] << " = " << num(mean) << " +- " << num(se) << "\n";
  }
  emit(out_dir, "estimator.csv", csv.str());
  return 0;
}

// ---------------------------------------------------------------------------
// attack

std::string run_log_csv(const std::vector<RunLogEntry>& log) {
  std::ostringstream csv;
  csv << "phase,epoch,loss,asr,alpha_estimate\n";
  for (const auto& entry : log)
    csv << entry.phase << ',' << entry.epoch << ',' << num(entry.loss) << ','
        << num(entry.asr) << ',' << num(entry.alpha_estimate) << "\n";
  return csv.str();
}

int cmd_attack(const GeneratorSpec& gen, std::size_t source, std::size_t target,
               AttackHyperparams hyper, std::uint64_t seed,
               const std::string& out_dir) {
  hyper.seed = seed;
  GeneratedTask task = generate_task(gen, seed);
  std::vector<std::size_t> region;
  for (std::size_t i = 0; i < task.dataset.points.size(); ++i)
    if (task.dataset.points[i].y == source) region.push_back(i);

  AttackResult result = tsa_attack(task.dataset, region, target, hyper);

  std::vector<Eigen::VectorXd> region_inputs;
  for (std::size_t i : region) region_inputs.push_back(task.dataset.points[i].x);
  double success = asr(result.backdoored, result.trigger, region_inputs, target,
                       &result.benign);
  FiniteTask measure =
      empirical_grid_task(task.dataset, gen.grid_n, gen.classes.size());
  MeasuredAlpha alpha =
      measured_alpha(measure, gen.grid_n, result.benign, result.backdoored,
                     result.trigger, source, target, hyper.beta, seed);

  std::cout << "asr            " << num(success) << "\n"
            << "alpha          " << num(alpha.alpha)
            << (alpha.s_mode ? " (s-mode)" : "") << "\n"
            << "alpha_sampled  " << num(alpha.alpha_sampled) << "\n"
            << "kappa          " << num(alpha.kappa) << "\n"
            << "disc_loss      " << num(result.disc_loss_before) << " -> "
            << num(result.disc_loss_after) << "\n";

  emit(out_dir, "run_log.csv", run_log_csv(result.log));
  if (!out_dir.empty()) {
    emit(out_dir, "benign.model", model_to_text(result.benign));
    emit(out_dir, "backdoored.model", model_to_text(result.backdoored));
    emit(out_dir, "trigger.model", model_to_text(result.trigger.net));
  }
  if (result.trigger_ineffective) {
    std::cerr << "error: trigger failed its effectiveness check\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// detect / calibrate

struct DetectInputs {
  std::vector<ModelParams> population;  // benign
  std::vector<Eigen::VectorXd> eval_points;
  std::vector<ModelParams> canonical;
  OutputDiffConfig diff;
};

DetectInputs load_detect_inputs(const std::vector<std::string>& benign_paths,
                                std::size_t n_inputs, std::uint64_t seed) {
  if (benign_paths.size() < 2)
    throw std::runtime_error("need at least two benign models");
  DetectInputs in;
  for (const auto& path : benign_paths)
    in.population.push_back(model_from_text(slurp(path)));
  std::size_t dim = in.population.front().input_dim();
  Rng rng(seed);
  for (std::size_t i = 0; i < n_inputs; ++i) {
    Eigen::VectorXd x(dim);
    for (std::size_t d = 0; d < dim; ++d) x(d) = rng.uniform();
    in.eval_points.push_back(x);
  }
  for (const auto& m : in.population)
    in.canonical.push_back(canonicalize_model(m));
  in.diff.seed = seed;
  return in;
}

double detect_score(const std::string& detector, const ModelParams& model,
                    const DetectInputs& in, std::size_t skip) {
  if (detector == "output_diff") {
    // Reference is the first population member that is not the candidate.
    std::size_t ref = skip == 0 ? 1 : 0;
    return detect_output_diff(model, in.population[ref], in.eval_points, in.diff)
        .score;
  }
  if (detector == "weight_distance") {
    ModelParams canon = canonicalize_model(model);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < in.canonical.size(); ++i) {
      if (i == skip) continue;
      best = std::min(best, weight_distance(canon, in.canonical[i]));
    }
    return best;
  }
  if (detector == "hotelling")
    return hotelling_score(model, in.eval_points,
                           model.num_labels());
  throw std::runtime_error("unknown detector: " + detector);
}

constexpr std::size_t kNotInPopulation = static_cast<std::size_t>(-1);

std::vector<double> population_scores(const std::string& detector,
                                      const DetectInputs& in) {
  std::vector<double> scores;
  for (std::size_t i = 0; i < in.population.size(); ++i)
    scores.push_back(detect_score(detector, in.population[i], in, i));
  return scores;
}

int cmd_calibrate(const std::vector<std::string>& benign_paths,
                  const std::vector<std::string>& detectors,
                  std::size_t n_inputs, double percentile, std::uint64_t seed,
                  const std::string& out_dir) {
  DetectInputs in = load_detect_inputs(benign_paths, n_inputs, seed);
  json doc = json::object();
  for (const auto& detector : detectors) {
    double threshold =
        percentile_threshold(population_scores(detector, in), percentile);
    doc[detector] = num(threshold);
    std::cout << detector << " threshold = " << num(threshold) << "\n";
  }
  emit(out_dir, "thresholds.json", doc.dump(2) + "\n");
  return 0;
}

int cmd_detect(const std::vector<std::string>& model_paths,
               const std::vector<std::string>& benign_paths,
               const std::vector<std::string>& detectors,
               const std::string& thresholds_path, std::size_t n_inputs,
               std::uint64_t seed, const std::string& out_dir) {
  DetectInputs in = load_detect_inputs(benign_paths, n_inputs, seed);
  json thresholds = json::object();
  if (!thresholds_path.empty()) thresholds = json::parse(slurp(thresholds_path));

  std::ostringstream csv;
  csv << "model_id,detector,score,flagged\n";
  for (const auto& detector : detectors) {
    double threshold;
    if (thresholds.contains(detector)) {
      threshold = std::stod(thresholds.at(detector).get<std::string>());
    } else {
      threshold = percentile_threshold(population_scores(detector, in), 0.95);
    }
    for (const auto& path : model_paths) {
      ModelParams model = model_from_text(slurp(path));
      double score = detect_score(detector, model, in, kNotInPopulation);
      bool flagged = score > threshold;
      csv << model_id(path) << ',' << detector << ',' << num(score) << ','
          << (flagged ? 1 : 0) << "\n";
      std::cout << model_id(path) << " " << detector << " " << num(score)
                << (flagged ? " FLAGGED" : "") << "\n";
    }
  }
  emit(out_dir, "detect.csv", csv.str());
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

void apply_gen_config(const json& doc, GeneratorSpec& gen) {
  if (!doc.contains("classes")) return;
  gen.classes.clear();
  for (const auto& cls : doc.at("classes")) {
    ClassMixture mixture;
    for (const auto& blob : cls.at("blobs")) {
      GaussianBlob b;
      blob.at("mean").get_to(b.mean);
      if (blob.contains("sigma")) blob.at("sigma").get_to(b.sigma);
      if (blob.contains("weight")) blob.at("weight").get_to(b.weight);
      mixture.blobs.push_back(b);
    }
    gen.classes.push_back(mixture);
  }
}

int cmd_sweep(SweepConfig config) {
  SweepResult result = run_sweep(config);
  for (const auto& row : result.rows)
    std::cout << "alpha*=" << num(row.alpha_star)
              << " alpha/beta=" << num(row.alpha_over_beta)
              << " gamma=" << num(row.gamma) << " included=" << row.included
              << " excluded=" << row.excluded << "\n";
  std::cout << "pearson " << num(result.pearson_gamma_alpha) << "\n"
            << "mean_abs_diff " << num(result.mean_abs_diff) << "\n"
            << "std_abs_diff " << num(result.std_abs_diff) << "\n"
            << "launched " << result.runs_launched << " excluded "
            << result.runs_excluded << "\n";
  if (config.out_dir.empty()) std::cout << result.csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backdoor-distance laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  std::string out_dir;
  std::string config_path;
  app.add_option("--seed", seed, "Base RNG seed");
  app.add_option("--out-dir", out_dir, "Directory for output artifacts");
  app.add_option("--config", config_path, "JSON config file; flags override");

  // distance
  auto* dist = app.add_subcommand("distance", "Exact distance report");
  std::string dist_input;
  dist->add_option("--input", dist_input, "Task+spec JSON document")
      ->required();

  // estimate-kappa
  auto* kap = app.add_subcommand("estimate-kappa", "Sampled kappa estimate");
  RegionArgs region_b, region_ab;
  std::vector<double> prior_mean = {0.5, 0.5};
  double prior_var = 0.04;
  EstimatorConfig est;
  std::size_t repeats = 5;
  kap->add_option("--b-shape", region_b.shape, "disc or square");
  kap->add_option("--b-center", region_b.center, "B center")->expected(2);
  kap->add_option("--b-size", region_b.size, "B radius or half width");
  kap->add_option("--ab-shape", region_ab.shape, "disc or square");
  kap->add_option("--ab-center", region_ab.center, "A(B) center")->expected(2);
  kap->add_option("--ab-size", region_ab.size, "A(B) radius or half width");
  kap->add_option("--prior-mean", prior_mean, "Prior mean")->expected(2);
  kap->add_option("--prior-var", prior_var, "Prior variance");
  kap->add_option("--origins", est.n_origins, "Extent sample origins");
  kap->add_option("--dirs", est.n_dirs, "Extent directions per origin");
  kap->add_option("--prior-samples", est.n_prior_samples,
                  "Samples for the prior ratio");
  kap->add_option("--repeats", repeats, "Independent repetitions");

  // attack
  auto* atk = app.add_subcommand("attack", "Run the backdoor attack");
  GeneratorSpec atk_gen = two_blob_spec();
  double separation = 0.5, sigma = 0.04;
  std::size_t source = 1, target = 0;
  AttackHyperparams hyper;
  atk->add_option("--separation", separation, "Blob separation");
  atk->add_option("--sigma", sigma, "Blob standard deviation");
  atk->add_option("--points-per-class", atk_gen.points_per_class,
                  "Dataset points per class");
  atk->add_option("--grid-n", atk_gen.grid_n, "Discretization grid");
  atk->add_option("--source", source, "Source class");
  atk->add_option("--target", target, "Target class");
  atk->add_option("--alpha-star", hyper.alpha_star, "Distance budget");
  atk->add_option("--beta", hyper.beta, "Poison rate");
  atk->add_option("--epoch-adj", hyper.epoch_adj, "Adversarial rounds");
  atk->add_option("--delta", hyper.delta, "Trigger reach");
  atk->add_option("--zeta", hyper.zeta, "Equilibrium tolerance");
  atk->add_option("--omega", hyper.omega_penalty, "Discriminator penalty");
  atk->add_option("--lr", hyper.lr, "Learning rate");
  atk->add_option("--batch", hyper.batch_size, "Batch size");
  atk->add_option("--benign-epochs", hyper.benign_epochs, "Benign epochs");
  atk->add_option("--trigger-epochs", hyper.trigger_epochs, "Trigger epochs");
  atk->add_option("--disc-epochs", hyper.disc_epochs, "Discriminator epochs");
  atk->add_option("--refine-epochs", hyper.refine_epochs, "Refinement epochs");
  atk->add_option("--backdoor-epochs", hyper.backdoor_epochs,
                  "Backdoored training epochs");
  atk->add_option("--clean-pool", hyper.clean_pool_size, "Clean pool size");
  atk->add_option("--hidden", hyper.hidden, "Hidden layer widths");

  // detect / calibrate
  auto* det = app.add_subcommand("detect", "Score candidate models");
  std::vector<std::string> det_models, det_benign;
  std::vector<std::string> det_detectors = {"output_diff", "weight_distance",
                                            "hotelling"};
  std::string thresholds_path;
  std::size_t det_inputs = 64;
  det->add_option("--model", det_models, "Candidate model dump")->required();
  det->add_option("--benign", det_benign, "Benign population dump")->required();
  det->add_option("--detector", det_detectors, "Detectors to run");
  det->add_option("--thresholds", thresholds_path, "Threshold file");
  det->add_option("--inputs", det_inputs, "Evaluation input count");

  auto* cal = app.add_subcommand("calibrate", "Fit detector thresholds");
  std::vector<std::string> cal_benign;
  std::vector<std::string> cal_detectors = {"output_diff", "weight_distance",
                                            "hotelling"};
  std::size_t cal_inputs = 64;
  double percentile = 0.95;
  cal->add_option("--benign", cal_benign, "Benign population dump")->required();
  cal->add_option("--detector", cal_detectors, "Detectors to calibrate");
  cal->add_option("--inputs", cal_inputs, "Evaluation input count");
  cal->add_option("--percentile", percentile, "Threshold percentile in (0, 1]");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Population sweep over alpha*");
  SweepConfig sweep_config;
  double swp_separation = 0.5, swp_sigma = 0.04;
  swp->add_option("--alpha-stars", sweep_config.alpha_stars, "Alpha* list");
  swp->add_option("--beta", sweep_config.beta, "Poison rate");
  swp->add_option("--benign-count", sweep_config.benign_count,
                  "Benign models per point");
  swp->add_option("--backdoored-count", sweep_config.backdoored_count,
                  "Backdoored models per point");
  swp->add_option("--source", sweep_config.source, "Source class");
  swp->add_option("--target", sweep_config.target, "Target class");
  swp->add_option("--separation", swp_separation, "Blob separation");
  swp->add_option("--sigma", swp_sigma, "Blob standard deviation");
  swp->add_option("--points-per-class", sweep_config.gen.points_per_class,
                  "Dataset points per class");
  swp->add_option("--grid-n", sweep_config.gen.grid_n, "Discretization grid");
  swp->add_option("--detectors", sweep_config.detectors, "Detector list");
  swp->add_option("--diff-delta", sweep_config.output_diff.delta,
                  "Output-diff perturbation bound");
  swp->add_option("--diff-inputs", sweep_config.diff_inputs,
                  "Output-diff evaluation inputs");
  swp->add_option("--asr-floor", sweep_config.asr_floor, "ASR exclusion floor");
  swp->add_option("--threads", sweep_config.threads, "Worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    json doc = load_config(config_path);
    if (doc.contains("seed") && app.count("--seed") == 0)
      doc.at("seed").get_to(seed);
    if (doc.contains("out_dir") && app.count("--out-dir") == 0)
      doc.at("out_dir").get_to(out_dir);

    if (dist->parsed()) {
      from_config(doc, *dist, "input", "input", dist_input);
      return cmd_distance(dist_input, out_dir);
    }
    if (kap->parsed()) {
      from_config(doc, *kap, "b-size", "b_size", region_b.size);
      from_config(doc, *kap, "ab-size", "ab_size", region_ab.size);
      from_config(doc, *kap, "prior-var", "prior_var", prior_var);
      from_config(doc, *kap, "origins", "origins", est.n_origins);
      from_config(doc, *kap, "dirs", "dirs", est.n_dirs);
      from_config(doc, *kap, "prior-samples", "prior_samples",
                  est.n_prior_samples);
      from_config(doc, *kap, "repeats", "repeats", repeats);
      est.seed = seed;
      return cmd_estimate_kappa(region_b, region_ab, prior_mean, prior_var,
                                est, repeats, out_dir);
    }
    if (atk->parsed()) {
      from_config(doc, *atk, "alpha-star", "alpha_star", hyper.alpha_star);
      from_config(doc, *atk, "beta", "beta", hyper.beta);
      from_config(doc, *atk, "separation", "separation", separation);
      from_config(doc, *atk, "sigma", "sigma", sigma);
      from_config(doc, *atk, "backdoor-epochs", "backdoor_epochs",
                  hyper.backdoor_epochs);
      if (atk->count("--separation") > 0 || atk->count("--sigma") > 0 ||
          doc.contains("separation") || doc.contains("sigma")) {
        std::size_t ppc = atk_gen.points_per_class;
        std::size_t grid_n = atk_gen.grid_n;
        atk_gen = two_blob_spec(separation, sigma);
        atk_gen.points_per_class = ppc;
        atk_gen.grid_n = grid_n;
      }
      apply_gen_config(doc, atk_gen);
      return cmd_attack(atk_gen, source, target, hyper, seed, out_dir);
    }
    if (det->parsed()) {
      return cmd_detect(det_models, det_benign, det_detectors, thresholds_path,
                        det_inputs, seed, out_dir);
    }
    if (cal->parsed()) {
      return cmd_calibrate(cal_benign, cal_detectors, cal_inputs, percentile,
                           seed, out_dir);
    }
    if (swp->parsed()) {
      from_config(doc, *swp, "alpha-stars", "alpha_stars",
                  sweep_config.alpha_stars);
      from_config(doc, *swp, "beta", "beta", sweep_config.beta);
      from_config(doc, *swp, "benign-count", "benign_count",
                  sweep_config.benign_count);
      from_config(doc, *swp, "backdoored-count", "backdoored_count",
                  sweep_config.backdoored_count);
      from_config(doc, *swp, "points-per-class", "points_per_class",
                  sweep_config.gen.points_per_class);
      from_config(doc, *swp, "grid-n", "grid_n", sweep_config.gen.grid_n);
      from_config(doc, *swp, "detectors", "detectors", sweep_config.detectors);
      from_config(doc, *swp, "diff-delta", "diff_delta",
                  sweep_config.output_diff.delta);
      from_config(doc, *swp, "diff-inputs", "diff_inputs",
                  sweep_config.diff_inputs);
      from_config(doc, *swp, "asr-floor", "asr_floor", sweep_config.asr_floor);
      from_config(doc, *swp, "separation", "separation", swp_separation);
      from_config(doc, *swp, "sigma", "sigma", swp_sigma);
      if (swp->count("--separation") > 0 || swp->count("--sigma") > 0 ||
          doc.contains("separation") || doc.contains("sigma")) {
        std::size_t ppc = sweep_config.gen.points_per_class;
        std::size_t grid_n = sweep_config.gen.grid_n;
        sweep_config.gen = two_blob_spec(swp_separation, swp_sigma);
        sweep_config.gen.points_per_class = ppc;
        sweep_config.gen.grid_n = grid_n;
      }
      apply_gen_config(doc, sweep_config.gen);
      sweep_config.seed = seed;
      sweep_config.out_dir = out_dir;
      return cmd_sweep(sweep_config);
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
