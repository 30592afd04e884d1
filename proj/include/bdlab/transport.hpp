#pragma once

#include "bdlab/task.hpp"

namespace bdlab {

// Distance between joint-distribution cells: 1 for a label mismatch, otherwise
// the input Euclidean distance capped at 1 so the metric diameter stays
// comparable to d_H-W1 on the unit cube.
double ground_metric(const std::vector<double>& c1, std::size_t y1,
                     const std::vector<double>& c2, std::size_t y2);

// Exact Wasserstein-1 between two equal-mass joint distributions on the same
// support (<= 64 cells), solved as a small transportation problem.
double wasserstein1_finite(const JointDistribution& d1, const JointDistribution& d2,
                           const std::vector<std::vector<double>>& coords);

}  // namespace bdlab
