#pragma once

// Shared fixtures and random-instance generators for unit and acceptance tests.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "bdlab/rng.hpp"
#include "bdlab/task.hpp"

namespace bdlab::testing {

// Canonical 4-point fixture: uniform prior, deterministic labels
// {x0,x1 -> 0; x2,x3 -> 1}, B = {x2}, A(x2) = x3, target 0.
// Coordinates put x2 and x3 at Euclidean distance 0.1.
inline FiniteTask t4_task() {
  FiniteTask t;
  t.coords = {{0.0}, {0.3}, {0.6}, {0.7}};
  t.prior = {0.25, 0.25, 0.25, 0.25};
  t.num_labels = 2;
  t.conditional = {{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}};
  return t;
}

inline BackdoorSpec t4_spec(std::vector<double> target_row, double beta = 1.0) {
  BackdoorSpec s;
  s.trigger.region = {2};
  s.trigger.image = {3};
  s.target = 0;
  s.beta = beta;
  s.target_conditional[3] = std::move(target_row);
  return s;
}

inline BackdoorSpec t4_point_spec() { return t4_spec({1.0, 0.0}); }
inline BackdoorSpec t4_mixed_spec() { return t4_spec({0.6, 0.4}); }

inline std::vector<double> random_prob_row(Rng& rng, std::size_t n) {
  std::vector<double> row(n);
  double sum = 0.0;
  for (double& v : row) {
    v = rng.uniform() + 1e-3;
    sum += v;
  }
  for (double& v : row) v /= sum;
  // Renormalize exactly so validation at kProbTol passes.
  double s2 = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) s2 += row[i];
  row[n - 1] = 1.0 - s2;
  return row;
}

inline FiniteTask random_task(Rng& rng, std::size_t max_inputs = 32,
                              std::size_t max_labels = 5) {
  FiniteTask t;
  std::size_t nx = 2 + rng.index(max_inputs - 1);
  t.num_labels = 2 + rng.index(max_labels - 1);
  t.prior = random_prob_row(rng, nx);
  for (std::size_t i = 0; i < nx; ++i) {
    t.coords.push_back({rng.uniform(), rng.uniform()});
    t.conditional.push_back(random_prob_row(rng, t.num_labels));
  }
  return t;
}

struct RandomInstance {
  FiniteTask task;
  BackdoorSpec spec;
};

// kGeneral draws any valid spec with Z >= 1.  kDominant additionally forces
// kappa >= 1, beta in [1/kappa, 1], a point-mass target conditional, and a
// primary conditional that puts almost no mass on the target over A(B), so the
// backdoor gain is positive on the whole support of the backdoor conditional.
// The Theorem-2 lower bound is an identity in that regime; outside it the
// bound can sit above the true distance, so sandwich checks stick to it.
enum class SpecStyle { kGeneral, kDominant };

// Random valid spec on a random task. When require_kappa_ge_1 is set, the
// region/image choice is retried until kappa >= 1; beta is then drawn from
// [1/kappa, 1] so both Theorem-1 and Theorem-2 preconditions hold.
inline RandomInstance random_instance(Rng& rng, bool require_kappa_ge_1 = false,
                                      SpecStyle style = SpecStyle::kGeneral) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    FiniteTask task = random_task(rng);
    std::size_t target = rng.index(task.num_labels);
    std::vector<std::size_t> candidates;
    for (std::size_t x = 0; x < task.num_inputs(); ++x)
      if (task.argmax_label(x) != target) candidates.push_back(x);
    if (candidates.size() < 2) continue;

    BackdoorSpec spec;
    spec.target = target;
    std::size_t bsize = 1 + rng.index(std::min<std::size_t>(candidates.size(), 6));
    std::vector<std::size_t> pool = candidates;
    rng.shuffle(pool);
    spec.trigger.region.assign(pool.begin(), pool.begin() + bsize);
    std::sort(spec.trigger.region.begin(), spec.trigger.region.end());
    for (std::size_t i = 0; i < bsize; ++i)
      spec.trigger.image.push_back(candidates[rng.index(candidates.size())]);
    for (std::size_t x : spec.trigger.image_set()) {
      if (style == SpecStyle::kDominant) {
        std::vector<double> row(task.num_labels, 0.0);
        row[target] = 1.0;
        spec.target_conditional[x] = std::move(row);
        // Drain the primary target mass at the image point so the backdoor
        // gain stays positive there.
        auto& prow = task.conditional[x];
        prow[target] = 1e-7 * (0.5 + rng.uniform());
        double sum = 0.0;
        for (double v : prow) sum += v;
        for (double& v : prow) v /= sum;
        std::size_t adj = (target + 1) % task.num_labels;
        double s2 = 0.0;
        for (std::size_t i = 0; i < prow.size(); ++i)
          if (i != adj) s2 += prow[i];
        prow[adj] = 1.0 - s2;
      } else {
        auto row = random_prob_row(rng, task.num_labels);
        // Bias mass toward the target so the spec looks like a backdoor.
        row[target] += 1.0;
        double sum = 0.0;
        for (double v : row) sum += v;
        for (double& v : row) v /= sum;
        double s2 = 0.0;
        for (std::size_t i = 0; i + 1 < row.size(); ++i) s2 += row[i];
        row.back() = 1.0 - s2;
        spec.target_conditional[x] = row;
      }
    }

    double kappa;
    try {
      kappa = kappa_of(task, spec.trigger);
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (require_kappa_ge_1 || style == SpecStyle::kDominant) {
      if (kappa < 1.0) continue;
      spec.beta = rng.uniform(1.0 / kappa, 1.0);
    } else {
      // Z >= 1 needs beta >= 1/kappa.
      spec.beta = rng.uniform(1.0 / kappa, 1.0 / kappa + 1.0);
    }
    try {
      spec.validate(task);
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (style == SpecStyle::kDominant) {
      double pr_b = pr_region(task, spec.trigger.region);
      double pr_ab = pr_region(task, spec.trigger.image_set());
      bool dominant = true;
      for (const auto& [x, pre] : spec.trigger.preimages()) {
        double pre_mass = 0.0;
        for (std::size_t z : pre) pre_mass += task.prior[z];
        double u = pre_mass / pr_b;
        double v = task.prior[x] * task.conditional[x][target] / pr_ab;
        if (u <= v) dominant = false;
      }
      if (!dominant) continue;
    }
    return {std::move(task), std::move(spec)};
  }
  throw std::runtime_error("random_instance: generation failed");
}

}  // namespace bdlab::testing
