#pragma once

// Shared synthetic datasets and grid fixtures for the model-level tests.

#include "bdlab/mlp.hpp"
#include "bdlab/task.hpp"
#include "support.hpp"

namespace bdlab::testing {

// Two interleaved arcs in [0,1]^2, class 0 above, class 1 below.
inline LabeledDataset two_moons(std::size_t n_per_class, std::uint64_t seed,
                                double noise = 0.02) {
  LabeledDataset ds;
  Rng rng(seed);
  constexpr double kPi = 3.14159265358979323846;
  for (std::size_t i = 0; i < n_per_class; ++i) {
    double th = kPi * rng.uniform();
    Eigen::VectorXd a(2);
    a << 0.35 + 0.3 * std::cos(th) + noise * rng.normal(),
        0.455 + 0.3 * std::sin(th) + noise * rng.normal();
    Eigen::VectorXd b(2);
    b << 0.65 - 0.3 * std::cos(th) + noise * rng.normal(),
        0.545 - 0.3 * std::sin(th) + noise * rng.normal();
    auto clip = [](Eigen::VectorXd v) {
      for (Eigen::Index j = 0; j < v.size(); ++j)
        v(j) = std::min(1.0, std::max(0.0, v(j)));
      return v;
    };
    ds.points.push_back({clip(a), 0, false});
    ds.points.push_back({clip(b), 1, false});
  }
  return ds;
}

inline std::vector<std::size_t> class_indices(const LabeledDataset& ds,
                                              std::size_t label) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.points.size(); ++i)
    if (ds.points[i].y == label) idx.push_back(i);
  return idx;
}

inline double clean_accuracy(const ModelParams& m, const LabeledDataset& ds) {
  std::size_t hit = 0;
  for (const auto& p : ds.points)
    if (predict_label(m, p.x) == p.y) ++hit;
  return static_cast<double>(hit) / static_cast<double>(ds.points.size());
}

// Uniform-prior grid skeleton; cell (ix, iy) sits at index iy*n + ix. The
// conditional rows are placeholders for pipelines that re-derive them from a
// model.
inline FiniteTask uniform_grid_task(std::size_t n, std::size_t num_labels = 2) {
  FiniteTask t;
  t.num_labels = num_labels;
  double mass = 1.0 / static_cast<double>(n * n);
  for (std::size_t iy = 0; iy < n; ++iy)
    for (std::size_t ix = 0; ix < n; ++ix) {
      t.coords.push_back({(ix + 0.5) / static_cast<double>(n),
                          (iy + 0.5) / static_cast<double>(n)});
      t.prior.push_back(mass);
      std::vector<double> row(num_labels, 0.0);
      row[0] = 1.0;
      t.conditional.push_back(row);
    }
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < t.prior.size(); ++i) sum += t.prior[i];
  t.prior.back() = 1.0 - sum;
  return t;
}

}  // namespace bdlab::testing
