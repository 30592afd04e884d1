#include "bdlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bdlab {
namespace {

constexpr double kRowTol = 1e-9;

void check_row(const std::vector<double>& row) {
  double sum = std::accumulate(row.begin(), row.end(), 0.0);
  if (std::abs(sum - 1.0) > kRowTol)
    throw std::invalid_argument("oracle row does not sum to 1");
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Fits (mean, population variance) to the Euclidean norms of the samples.
std::pair<double, double> norm_moments(
    const std::vector<std::vector<double>>& zs) {
  double mu = 0.0;
  for (const auto& z : zs) mu += norm2(z);
  mu /= static_cast<double>(zs.size());
  double var = 0.0;
  for (const auto& z : zs) {
    double d = norm2(z) - mu;
    var += d * d;
  }
  var /= static_cast<double>(zs.size());
  return {mu, var};
}

}  // namespace

std::vector<double> GaussianPriorModel::generate(
    const std::vector<double>& z) const {
  if (z.size() != mean.size())
    throw std::invalid_argument("latent dimension mismatch");
  std::vector<double> x(z.size());
  double s = std::sqrt(variance);
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = mean[i] + s * z[i];
  return x;
}

std::vector<double> GaussianPriorModel::inverse(
    const std::vector<double>& x) const {
  if (x.size() != mean.size())
    throw std::invalid_argument("point dimension mismatch");
  std::vector<double> z(x.size());
  double s = std::sqrt(variance);
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean[i]) / s;
  return z;
}

double approx_alpha(const std::vector<std::vector<double>>& trigger_samples,
                    const ConditionalOracle& g_b, const ConditionalOracle& g_p,
                    double beta, double kappa, double z_norm) {
  if (trigger_samples.empty())
    throw std::invalid_argument("approx_alpha: no samples");
  if (beta <= 0.0 || kappa <= 0.0 || z_norm <= 0.0)
    throw std::invalid_argument("approx_alpha: nonpositive parameter");
  double total = 0.0;
  for (const auto& x : trigger_samples) {
    auto pb = g_b.eval(x);
    auto pp = g_p.eval(x);
    if (pb.size() != pp.size())
      throw std::invalid_argument("oracle label-count mismatch");
    check_row(pb);
    check_row(pp);
    for (std::size_t y = 0; y < pb.size(); ++y)
      total += std::max(beta / z_norm * pb[y] - pp[y] / kappa, 0.0);
  }
  return total / static_cast<double>(trigger_samples.size());
}

ExtentEstimate estimate_extent(const RegionOracle& region,
                               const EstimatorConfig& config, Rng& rng) {
  if (config.n_origins == 0 || config.n_dirs == 0)
    throw std::invalid_argument("estimate_extent: empty sample budget");
  ExtentEstimate out;
  double grand = 0.0;
  for (std::size_t o = 0; o < config.n_origins; ++o) {
    auto origin = region.sample(rng);
    if (!region.contains(origin))
      throw std::logic_error("region sampler escaped its own region");
    std::size_t dim = origin.size();
    // Rays cannot leave the unit cube by more than its diameter.
    double max_t = std::sqrt(static_cast<double>(dim));

    double origin_sum = 0.0;
    std::size_t made = 0;
    std::size_t misses = 0;
    while (made < config.n_dirs) {
      std::vector<double> dir(dim);
      if (config.direction_mode == DirectionMode::kPointDiffs) {
        auto other = region.sample(rng);
        for (std::size_t i = 0; i < dim; ++i) dir[i] = other[i] - origin[i];
      } else {
        for (std::size_t i = 0; i < dim; ++i) dir[i] = rng.normal();
      }
      double n = norm2(dir);
      if (n < 1e-12) {
        if (++misses > 64 * config.n_dirs)
          throw std::runtime_error("direction construction failed");
        continue;
      }
      for (double& d : dir) d /= n;

      // Bracket the boundary, then bisect to tolerance.
      double hi = config.bisect_tol;
      std::vector<double> probe(dim);
      auto inside_at = [&](double t) {
        for (std::size_t i = 0; i < dim; ++i) probe[i] = origin[i] + t * dir[i];
        return region.contains(probe);
      };
      while (hi < max_t && inside_at(hi)) hi *= 2.0;
      double extent;
      if (hi >= max_t && inside_at(max_t)) {
        extent = max_t;
        out.clamped = true;
      } else {
        double lo = hi / 2.0;
        if (hi == config.bisect_tol) lo = 0.0;
        while (hi - lo > config.bisect_tol) {
          double mid = 0.5 * (lo + hi);
          (inside_at(mid) ? lo : hi) = mid;
        }
        extent = 0.5 * (lo + hi);
      }
      origin_sum += extent;
      ++made;
    }
    grand += origin_sum / static_cast<double>(config.n_dirs);
  }
  out.extent = grand / static_cast<double>(config.n_origins);
  return out;
}

double estimate_kappa_v(const RegionOracle& region_b,
                        const RegionOracle& region_ab,
                        const EstimatorConfig& config) {
  Rng root(config.seed);
  Rng rb = root.fork(1);
  Rng rab = root.fork(2);
  auto eb = estimate_extent(region_b, config, rb);
  auto eab = estimate_extent(region_ab, config, rab);
  if (eab.extent <= 0.0)
    throw std::runtime_error("estimate_kappa_v: zero image extent");
  return eb.extent / eab.extent;
}

LnKappaPr estimate_ln_kappa_pr(const std::vector<std::vector<double>>& z_b,
                               const std::vector<std::vector<double>>& z_ab) {
  if (z_b.size() < 2 || z_ab.size() < 2)
    throw std::invalid_argument("estimate_ln_kappa_pr: need >= 2 samples");
  auto [mu_b, var_b] = norm_moments(z_b);
  auto [mu_ab, var_ab] = norm_moments(z_ab);
  LnKappaPr out;
  out.degenerate_variance = (var_b == 0.0 || var_ab == 0.0);
  out.value = -0.5 * (mu_b * mu_b / (var_b + 1.0) -
                      mu_ab * mu_ab / (var_ab + 1.0));
  return out;
}

KappaEstimate estimate_kappa(const RegionOracle& region_b,
                             const RegionOracle& region_ab,
                             const GaussianPriorModel& prior,
                             const EstimatorConfig& config) {
  Rng root(config.seed);
  Rng rb = root.fork(1);
  Rng rab = root.fork(2);
  Rng rz = root.fork(3);

  KappaEstimate out;
  auto eb = estimate_extent(region_b, config, rb);
  auto eab = estimate_extent(region_ab, config, rab);
  if (eab.extent <= 0.0)
    throw std::runtime_error("estimate_kappa: zero image extent");
  out.ext_b = eb.extent;
  out.ext_ab = eab.extent;
  out.clamped = eb.clamped || eab.clamped;
  out.kappa_v = eb.extent / eab.extent;

  std::vector<std::vector<double>> z_b, z_ab;
  z_b.reserve(config.n_prior_samples);
  z_ab.reserve(config.n_prior_samples);
  for (std::size_t i = 0; i < config.n_prior_samples; ++i) {
    z_b.push_back(prior.inverse(region_b.sample(rz)));
    z_ab.push_back(prior.inverse(region_ab.sample(rz)));
  }
  auto ln_pr = estimate_ln_kappa_pr(z_b, z_ab);
  out.ln_kappa_pr = ln_pr.value;
  out.degenerate_variance = ln_pr.degenerate_variance;
  out.kappa = out.kappa_v * std::exp(out.ln_kappa_pr);
  return out;
}

}  // namespace bdlab
