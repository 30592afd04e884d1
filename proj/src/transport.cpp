#include "bdlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bdlab {

namespace {

struct Cell {
  std::size_t x, y;
  double mass;
};

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

double ground_metric(const std::vector<double>& c1, std::size_t y1,
                     const std::vector<double>& c2, std::size_t y2) {
  if (y1 != y2) return 1.0;
  return std::min(euclid(c1, c2), 1.0);
}

double wasserstein1_finite(const JointDistribution& d1, const JointDistribution& d2,
                           const std::vector<std::vector<double>>& coords) {
  if (d1.num_inputs != d2.num_inputs || d1.num_labels != d2.num_labels)
    throw std::invalid_argument("wasserstein1: mismatched supports");
  if (coords.size() != d1.num_inputs)
    throw std::invalid_argument("wasserstein1: coords size mismatch");
  const std::size_t cells = d1.num_inputs * d1.num_labels;
  if (cells > 64)
    throw std::invalid_argument("wasserstein1: support too large for exact solve");

  // Only the signed difference needs transporting.
  std::vector<Cell> supply, demand;
  for (std::size_t x = 0; x < d1.num_inputs; ++x)
    for (std::size_t y = 0; y < d1.num_labels; ++y) {
      double diff = d1.at(x, y) - d2.at(x, y);
      if (diff > kProbTol) supply.push_back({x, y, diff});
      else if (diff < -kProbTol) demand.push_back({x, y, -diff});
    }
  if (supply.empty() || demand.empty()) return 0.0;

  const std::size_t ns = supply.size();
  const std::size_t nd = demand.size();
  std::vector<double> cost(ns * nd);
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nd; ++j)
      cost[i * nd + j] = ground_metric(coords[supply[i].x], supply[i].y,
                                       coords[demand[j].x], demand[j].y);

  // Exact transport by successive shortest augmentation on the dense bipartite
  // graph with node potentials (costs satisfy triangle-inequality-free general
  // case; Bellman-Ford style relaxation over the two layers).
  std::vector<double> rem_s(ns), rem_d(nd);
  for (std::size_t i = 0; i < ns; ++i) rem_s[i] = supply[i].mass;
  for (std::size_t j = 0; j < nd; ++j) rem_d[j] = demand[j].mass;
  std::vector<std::vector<double>> flow(ns, std::vector<double>(nd, 0.0));

  const double inf = std::numeric_limits<double>::infinity();
  double total_cost = 0.0;

  while (true) {
    std::size_t src = ns;
    for (std::size_t i = 0; i < ns; ++i)
      if (rem_s[i] > kProbTol) {
        src = i;
        break;
      }
    if (src == ns) break;

    // Shortest residual path from src to any demand with remaining capacity.
    // Nodes: supplies [0, ns), demands [ns, ns+nd). Residual arcs:
    // i -> j (cost c_ij), j -> i (cost -c_ij, needs flow[i][j] > 0).
    std::vector<double> dist(ns + nd, inf);
    std::vector<int> par(ns + nd, -1);
    dist[src] = 0.0;
    for (std::size_t iter = 0; iter < ns + nd; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < ns; ++i) {
        if (dist[i] == inf) continue;
        for (std::size_t j = 0; j < nd; ++j) {
          double nc = dist[i] + cost[i * nd + j];
          if (nc < dist[ns + j] - 1e-15) {
            dist[ns + j] = nc;
            par[ns + j] = static_cast<int>(i);
            changed = true;
          }
        }
      }
      for (std::size_t j = 0; j < nd; ++j) {
        if (dist[ns + j] == inf) continue;
        for (std::size_t i = 0; i < ns; ++i) {
          if (flow[i][j] <= kProbTol) continue;
          double nc = dist[ns + j] - cost[i * nd + j];
          if (nc < dist[i] - 1e-15) {
            dist[i] = nc;
            par[i] = static_cast<int>(ns + j);
            changed = true;
          }
        }
      }
      if (!changed) break;
    }

    std::size_t best = nd;
    double best_cost = inf;
    for (std::size_t j = 0; j < nd; ++j)
      if (rem_d[j] > kProbTol && dist[ns + j] < best_cost) {
        best_cost = dist[ns + j];
        best = j;
      }
    if (best == nd)
      throw std::logic_error("wasserstein1: no augmenting path (unbalanced masses)");

    // Bottleneck along the path.
    double push = std::min(rem_s[src], rem_d[best]);
    for (int v = static_cast<int>(ns + best); par[v] != -1;) {
      int u = par[v];
      if (v >= static_cast<int>(ns)) {
        // arc u(supply) -> v(demand): forward, no capacity bound
      } else {
        // arc u(demand) -> v(supply): reverse of flow[v][u - ns]
        push = std::min(push, flow[static_cast<std::size_t>(v)]
                                  [static_cast<std::size_t>(u) - ns]);
      }
      v = u;
    }

    for (int v = static_cast<int>(ns + best); par[v] != -1;) {
      int u = par[v];
      if (v >= static_cast<int>(ns)) {
        flow[static_cast<std::size_t>(u)][static_cast<std::size_t>(v) - ns] += push;
        total_cost += push * cost[static_cast<std::size_t>(u) * nd +
                                  (static_cast<std::size_t>(v) - ns)];
      } else {
        flow[static_cast<std::size_t>(v)][static_cast<std::size_t>(u) - ns] -= push;
        total_cost -= push * cost[static_cast<std::size_t>(v) * nd +
                                  (static_cast<std::size_t>(u) - ns)];
      }
      v = u;
    }
    rem_s[src] -= push;
    rem_d[best] -= push;
  }

  return total_cost;
}

}  // namespace bdlab
