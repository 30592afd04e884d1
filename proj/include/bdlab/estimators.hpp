#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "bdlab/rng.hpp"

namespace bdlab {

// Label-conditional oracle: the g(.) of a trained model or an exact task
// conditional. Rows must sum to 1 within 1e-9.
struct ConditionalOracle {
  std::function<std::vector<double>(const std::vector<double>&)> eval;
};

// Membership test plus a seeded sampler of interior points.
struct RegionOracle {
  std::function<bool(const std::vector<double>&)> contains;
  std::function<std::vector<double>(Rng&)> sample;
};

// Analytic stand-in for a generator with exact inversion. The latent prior is
// z ~ N(0, I); generate is an affine push-forward with identity-scaled
// variance, so inverse(generate(z)) = z holds exactly.
struct GaussianPriorModel {
  std::vector<double> mean;
  double variance = 1.0;

  std::vector<double> generate(const std::vector<double>& z) const;
  std::vector<double> inverse(const std::vector<double>& x) const;
};

enum class DirectionMode { kPointDiffs, kUniformSphere };

struct EstimatorConfig {
  std::size_t n_origins = 32;
  std::size_t n_dirs = 256;
  double bisect_tol = 1e-4;
  std::uint64_t seed = 0;
  DirectionMode direction_mode = DirectionMode::kPointDiffs;
  std::size_t n_prior_samples = 100;
};

struct ExtentEstimate {
  double extent = 0.0;
  bool clamped = false;  // some ray hit the unit-cube bound before the region
};

struct KappaEstimate {
  double ext_b = 0.0;
  double ext_ab = 0.0;
  double kappa_v = 0.0;
  double ln_kappa_pr = 0.0;
  double kappa = 0.0;
  bool clamped = false;
  bool degenerate_variance = false;
};

// Eq-5 style sampled alpha. Samples must already lie in A(B).
double approx_alpha(const std::vector<std::vector<double>>& trigger_samples,
                    const ConditionalOracle& g_b, const ConditionalOracle& g_p,
                    double beta, double kappa, double z_norm);

ExtentEstimate estimate_extent(const RegionOracle& region,
                               const EstimatorConfig& config, Rng& rng);

double estimate_kappa_v(const RegionOracle& region_b,
                        const RegionOracle& region_ab,
                        const EstimatorConfig& config);

struct LnKappaPr {
  double value = 0.0;
  bool degenerate_variance = false;
};

LnKappaPr estimate_ln_kappa_pr(const std::vector<std::vector<double>>& z_b,
                               const std::vector<std::vector<double>>& z_ab);

KappaEstimate estimate_kappa(const RegionOracle& region_b,
                             const RegionOracle& region_ab,
                             const GaussianPriorModel& prior,
                             const EstimatorConfig& config);

}  // namespace bdlab
