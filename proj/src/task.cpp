#include "bdlab/task.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bdlab {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

double JointDistribution::total() const {
  return std::accumulate(mass.begin(), mass.end(), 0.0);
}

void JointDistribution::validate() const {
  require(mass.size() == num_inputs * num_labels, "joint: mass size mismatch");
  for (double m : mass) require(m >= 0.0, "joint: negative mass");
  require(std::abs(total() - 1.0) <= kProbTol, "joint: total mass != 1");
}

std::size_t FiniteTask::argmax_label(std::size_t x) const {
  const auto& row = conditional[x];
  std::size_t best = 0;
  for (std::size_t y = 1; y < row.size(); ++y)
    if (row[y] > row[best]) best = y;
  return best;
}

JointDistribution FiniteTask::primary_joint() const {
  JointDistribution d;
  d.num_inputs = num_inputs();
  d.num_labels = num_labels;
  d.mass.resize(d.num_inputs * d.num_labels);
  for (std::size_t x = 0; x < d.num_inputs; ++x)
    for (std::size_t y = 0; y < num_labels; ++y)
      d.at(x, y) = prior[x] * conditional[x][y];
  return d;
}

void FiniteTask::validate() const {
  require(!prior.empty(), "task: empty input set");
  require(num_labels >= 1, "task: no labels");
  require(coords.size() == prior.size(), "task: coords/prior size mismatch");
  require(conditional.size() == prior.size(), "task: conditional size mismatch");
  const std::size_t n = coords.front().size();
  double psum = 0.0;
  for (std::size_t x = 0; x < prior.size(); ++x) {
    require(prior[x] >= 0.0, "task: negative prior");
    psum += prior[x];
    require(coords[x].size() == n, "task: ragged coordinates");
    for (double c : coords[x])
      require(c >= 0.0 && c <= 1.0, "task: coordinate outside [0,1]");
    require(conditional[x].size() == num_labels, "task: conditional row size");
    double csum = 0.0;
    for (double p : conditional[x]) {
      require(p >= 0.0 && p <= 1.0, "task: conditional entry outside [0,1]");
      csum += p;
    }
    require(std::abs(csum - 1.0) <= kProbTol, "task: conditional row sum != 1");
  }
  require(std::abs(psum - 1.0) <= kProbTol, "task: prior sum != 1");
}

bool TriggerMap::in_region(std::size_t x) const {
  return std::binary_search(region.begin(), region.end(), x);
}

std::size_t TriggerMap::map_of(std::size_t x) const {
  auto it = std::lower_bound(region.begin(), region.end(), x);
  if (it == region.end() || *it != x)
    throw std::invalid_argument("trigger: input not in region B");
  return image[static_cast<std::size_t>(it - region.begin())];
}

std::vector<std::size_t> TriggerMap::image_set() const {
  std::vector<std::size_t> out = image;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::unordered_map<std::size_t, std::vector<std::size_t>> TriggerMap::preimages() const {
  std::unordered_map<std::size_t, std::vector<std::size_t>> pre;
  for (std::size_t i = 0; i < region.size(); ++i) pre[image[i]].push_back(region[i]);
  return pre;
}

void TriggerMap::validate(const FiniteTask& task) const {
  require(region.size() == image.size(), "trigger: region/image size mismatch");
  for (std::size_t i = 0; i + 1 < region.size(); ++i)
    require(region[i] < region[i + 1], "trigger: region not strictly increasing");
  for (std::size_t i = 0; i < region.size(); ++i) {
    require(region[i] < task.num_inputs(), "trigger: region index out of range");
    require(image[i] < task.num_inputs(), "trigger: image index out of range");
  }
}

void BackdoorSpec::validate(const FiniteTask& task) const {
  trigger.validate(task);
  require(target < task.num_labels, "spec: target label out of range");
  require(beta > 0.0, "spec: beta must be positive");
  // Eq-2 validity: neither x in B nor A(x) may already argmax to the target.
  for (std::size_t i = 0; i < trigger.region.size(); ++i) {
    if (task.argmax_label(trigger.region[i]) == target)
      throw std::invalid_argument("spec: region input already labeled target");
    if (task.argmax_label(trigger.image[i]) == target)
      throw std::invalid_argument("spec: trigger image already labeled target");
  }
  for (std::size_t x : trigger.image_set()) {
    auto it = target_conditional.find(x);
    require(it != target_conditional.end(), "spec: missing target conditional row");
    require(it->second.size() == task.num_labels, "spec: target conditional row size");
    double sum = 0.0;
    for (double p : it->second) {
      require(p >= 0.0 && p <= 1.0, "spec: target conditional entry outside [0,1]");
      sum += p;
    }
    require(std::abs(sum - 1.0) <= kProbTol, "spec: target conditional row sum != 1");
  }
}

std::vector<std::string> BackdoorSpec::range_warnings(const FiniteTask& task) const {
  std::vector<std::string> warnings;
  double pr_ab = pr_region(task, trigger.image_set());
  if (pr_ab > 0.0) {
    double kappa = pr_region(task, trigger.region) / pr_ab;
    if (beta < 1.0 / kappa - kProbTol || beta > 1.0 + kProbTol)
      warnings.push_back("beta outside [1/kappa, 1]; theorem bounds not applicable");
    if (kappa < 1.0 - kProbTol)
      warnings.push_back("kappa < 1; theorem bounds not applicable");
  }
  return warnings;
}

double pr_region(const FiniteTask& task, const std::vector<std::size_t>& region) {
  double p = 0.0;
  for (std::size_t x : region) p += task.prior[x];
  return p;
}

double kappa_of(const FiniteTask& task, const TriggerMap& trigger) {
  double pr_ab = pr_region(task, trigger.image_set());
  if (pr_ab <= 0.0)
    throw std::invalid_argument("kappa undefined: Pr(A(B)) = 0");
  return pr_region(task, trigger.region) / pr_ab;
}

double z_norm_of(const FiniteTask& task, const BackdoorSpec& spec) {
  return 1.0 - pr_region(task, spec.trigger.image_set()) +
         spec.beta * pr_region(task, spec.trigger.region);
}

JointDistribution build_backdoor_distribution(const FiniteTask& task,
                                              const BackdoorSpec& spec) {
  spec.validate(task);
  const double z = z_norm_of(task, spec);
  if (z <= 0.0) throw std::invalid_argument("backdoor distribution: Z <= 0");

  JointDistribution d;
  d.num_inputs = task.num_inputs();
  d.num_labels = task.num_labels;
  d.mass.assign(d.num_inputs * d.num_labels, 0.0);

  auto pre = spec.trigger.preimages();
  for (std::size_t x = 0; x < d.num_inputs; ++x) {
    auto it = pre.find(x);
    if (it != pre.end()) {
      // x in A(B): the "x in A(B)" branch wins even when x also lies in B.
      double pre_mass = 0.0;
      for (std::size_t zidx : it->second) pre_mass += task.prior[zidx];
      const auto& cond = spec.target_conditional.at(x);
      for (std::size_t y = 0; y < d.num_labels; ++y)
        d.at(x, y) = cond[y] * pre_mass * spec.beta / z;
    } else {
      for (std::size_t y = 0; y < d.num_labels; ++y)
        d.at(x, y) = task.prior[x] * task.conditional[x][y] / z;
    }
  }
  return d;
}

HW1Result d_hw1_exact(const JointDistribution& d1, const JointDistribution& d2) {
  if (d1.num_inputs != d2.num_inputs || d1.num_labels != d2.num_labels)
    throw std::invalid_argument("d_hw1: mismatched supports");
  HW1Result r;
  for (std::size_t x = 0; x < d1.num_inputs; ++x)
    for (std::size_t y = 0; y < d1.num_labels; ++y) {
      double gain = d1.at(x, y) - d2.at(x, y);
      if (gain > 0.0) {
        r.distance += gain;
        r.witness.emplace_back(x, y);
      }
    }
  return r;
}

double s_value(const FiniteTask& task, const BackdoorSpec& spec) {
  spec.validate(task);
  const auto ab = spec.trigger.image_set();
  const double pr_b = pr_region(task, spec.trigger.region);
  const double pr_ab = pr_region(task, ab);
  if (ab.empty() || pr_ab <= 0.0)
    throw std::invalid_argument("s_value: empty or zero-mass region A(B)");

  auto pre = spec.trigger.preimages();
  double s = 0.0;
  for (std::size_t x : ab) {
    double pre_mass = 0.0;
    for (std::size_t zidx : pre.at(x)) pre_mass += task.prior[zidx];
    const auto& bcond = spec.target_conditional.at(x);
    for (std::size_t y = 0; y < task.num_labels; ++y) {
      double u = (pre_mass / pr_b) * bcond[y];
      double v = (task.prior[x] / pr_ab) * task.conditional[x][y];
      s += std::max(u - v, 0.0);
    }
  }
  return s;
}

DistanceReport backdoor_distance(const FiniteTask& task, const BackdoorSpec& spec) {
  spec.validate(task);
  DistanceReport rep;
  rep.pr_B = pr_region(task, spec.trigger.region);
  rep.pr_AB = pr_region(task, spec.trigger.image_set());
  rep.z_norm = z_norm_of(task, spec);
  if (rep.z_norm < 1.0 - kProbTol)
    throw TheoremScopeError("backdoor_distance: Z < 1, out of theorem scope");
  if (rep.pr_AB <= 0.0)
    throw std::invalid_argument("backdoor_distance: Pr(A(B)) = 0, kappa undefined");
  rep.kappa = rep.pr_B / rep.pr_AB;

  const JointDistribution backdoor = build_backdoor_distribution(task, spec);
  const JointDistribution primary = task.primary_joint();

  // Theorem-1 path: the gain integral restricted to A(B) x Y.
  for (std::size_t x : spec.trigger.image_set())
    for (std::size_t y = 0; y < task.num_labels; ++y) {
      double gain = backdoor.at(x, y) - primary.at(x, y);
      if (gain > 0.0) {
        rep.distance += gain;
        rep.witness.emplace_back(x, y);
      }
    }

  rep.alpha = rep.pr_B > 0.0 ? rep.distance / rep.pr_B : 0.0;
  rep.s_value = rep.pr_B > 0.0 ? s_value(task, spec) : 0.0;
  rep.bounds_sound = rep.kappa >= 1.0 - kProbTol &&
                     spec.beta >= 1.0 / rep.kappa - kProbTol &&
                     spec.beta <= 1.0 + kProbTol;
  rep.lower_bound =
      (spec.beta / rep.z_norm - (1.0 / rep.kappa) * (1.0 - rep.s_value)) * rep.pr_B;
  rep.upper_bound = (spec.beta / rep.z_norm) * rep.pr_B;
  return rep;
}

DistanceBounds distance_bounds(const FiniteTask& task, const BackdoorSpec& spec) {
  DistanceReport rep = backdoor_distance(task, spec);
  return DistanceBounds{rep.lower_bound, rep.upper_bound, rep.bounds_sound};
}

std::pair<double, double> bounds_at_beta_extremes(const FiniteTask& task,
                                                  const BackdoorSpec& spec) {
  const double kappa = kappa_of(task, spec.trigger);
  if (kappa < 1.0 - kProbTol)
    throw TheoremScopeError("bounds_at_beta_extremes: kappa < 1");
  const double pr_b = pr_region(task, spec.trigger.region);
  const double s = s_value(task, spec);
  const double lo = s * pr_b / kappa;
  const double hi = kappa * pr_b / (kappa + kappa * pr_b - pr_b);

  // Re-evaluate the distance at both beta endpoints as a cross-check.
  BackdoorSpec at_lo = spec;
  at_lo.beta = 1.0 / kappa;
  BackdoorSpec at_hi = spec;
  at_hi.beta = 1.0;
  const double d_lo = backdoor_distance(task, at_lo).distance;
  const double d_hi = backdoor_distance(task, at_hi).distance;
  if (std::abs(d_lo - lo) > 1e-9)
    throw std::logic_error("bounds_at_beta_extremes: lower endpoint mismatch");
  if (d_hi > hi + 1e-9)
    throw std::logic_error("bounds_at_beta_extremes: upper endpoint exceeded");
  return {lo, hi};
}

std::pair<double, double> bounds_at_kappa_extremes(const FiniteTask& task,
                                                   const BackdoorSpec& spec) {
  if (spec.beta > 1.0 + kProbTol)
    throw TheoremScopeError("bounds_at_kappa_extremes: beta > 1");
  const double pr_b = pr_region(task, spec.trigger.region);
  const double s = s_value(task, spec);
  return {s * spec.beta * pr_b, spec.beta * pr_b};
}

}  // namespace bdlab
