#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bdlab {

inline constexpr double kProbTol = 1e-12;

// Probability table over (input, label) cells, row-major.
struct JointDistribution {
  std::size_t num_inputs = 0;
  std::size_t num_labels = 0;
  std::vector<double> mass;

  double& at(std::size_t x, std::size_t y) { return mass[x * num_labels + y]; }
  double at(std::size_t x, std::size_t y) const { return mass[x * num_labels + y]; }
  double total() const;

  // All entries >= 0, total mass 1 within kProbTol.
  void validate() const;
};

// A finite classification task: inputs with coordinates in [0,1]^n, a prior
// over inputs and a conditional label table per input.
struct FiniteTask {
  std::vector<std::vector<double>> coords;      // |X| rows, each in [0,1]^n
  std::vector<double> prior;                    // |X|, sums to 1
  std::size_t num_labels = 0;
  std::vector<std::vector<double>> conditional; // |X| x L, rows sum to 1

  std::size_t num_inputs() const { return prior.size(); }
  std::size_t dim() const { return coords.empty() ? 0 : coords.front().size(); }

  // Lowest label index wins ties.
  std::size_t argmax_label(std::size_t x) const;

  JointDistribution primary_joint() const;
  void validate() const;
};

// Trigger map A restricted to the backdoor region B (a subset of inputs).
struct TriggerMap {
  std::vector<std::size_t> region;  // B, strictly increasing input indices
  std::vector<std::size_t> image;   // image[i] = A(region[i])

  bool in_region(std::size_t x) const;
  std::size_t map_of(std::size_t x) const;  // throws if x not in B
  std::vector<std::size_t> image_set() const;  // A(B), sorted unique
  // preimage(x) = {z in B : A(z) = x}
  std::unordered_map<std::size_t, std::vector<std::size_t>> preimages() const;
  void validate(const FiniteTask& task) const;
};

struct BackdoorSpec {
  TriggerMap trigger;
  std::size_t target = 0;
  double beta = 1.0;
  // Pr_{D_b}(y|x) for each x in A(B).
  std::unordered_map<std::size_t, std::vector<double>> target_conditional;

  // Structural validation (throws) including the Eq-2 style validity of the
  // trigger: no x in B and no A(x) may already carry the target label.
  void validate(const FiniteTask& task) const;
  // Non-fatal: beta outside [1/kappa, 1] puts the bounds out of scope.
  std::vector<std::string> range_warnings(const FiniteTask& task) const;
};

struct DistanceReport {
  double distance = 0.0;
  double alpha = 0.0;        // distance / Pr(B)
  double kappa = 0.0;        // Pr(B) / Pr(A(B))
  double s_value = 0.0;
  double z_norm = 0.0;       // 1 - Pr(A(B)) + beta * Pr(B)
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  bool bounds_sound = false; // kappa >= 1 and beta in [1/kappa, 1]
  double pr_B = 0.0;
  double pr_AB = 0.0;
  // Support of the optimal separating indicator h: cells with positive gain.
  std::vector<std::pair<std::size_t, std::size_t>> witness;

  double h_divergence() const { return 2.0 * distance; }
};

struct HW1Result {
  double distance = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> witness;
};

struct DistanceBounds {
  double lower = 0.0;
  double upper = 0.0;
  bool sound = false;
};

// Thrown when a request falls outside a theorem's stated parameter range.
class TheoremScopeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double pr_region(const FiniteTask& task, const std::vector<std::size_t>& region);
double kappa_of(const FiniteTask& task, const TriggerMap& trigger);
double z_norm_of(const FiniteTask& task, const BackdoorSpec& spec);

JointDistribution build_backdoor_distribution(const FiniteTask& task,
                                              const BackdoorSpec& spec);

// sup_h E_{d1} h - E_{d2} h over h: X x Y -> [0,1], computed exactly as the
// positive part of the mass difference.
HW1Result d_hw1_exact(const JointDistribution& d1, const JointDistribution& d2);

// Probability-gain evaluation restricted to A(B) x Y; requires Z >= 1.
DistanceReport backdoor_distance(const FiniteTask& task, const BackdoorSpec& spec);

// Conditional-probability gain mass on A(B) x Y; independent of beta.
double s_value(const FiniteTask& task, const BackdoorSpec& spec);

DistanceBounds distance_bounds(const FiniteTask& task, const BackdoorSpec& spec);

// (distance at beta = 1/kappa, distance upper form at beta = 1); both
// re-verified by evaluating the distance at the endpoints.
std::pair<double, double> bounds_at_beta_extremes(const FiniteTask& task,
                                                  const BackdoorSpec& spec);

// (S * beta * Pr(B), beta * Pr(B)), attained at kappa = 1/beta.
std::pair<double, double> bounds_at_kappa_extremes(const FiniteTask& task,
                                                   const BackdoorSpec& spec);

}  // namespace bdlab
