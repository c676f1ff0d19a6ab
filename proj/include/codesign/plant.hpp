#ifndef CODESIGN_PLANT_HPP
#define CODESIGN_PLANT_HPP

#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "codesign/control.hpp"
#include "codesign/rng.hpp"

namespace codesign {

// Entries with magnitude at or below this are treated as structural zeros
// when building adjacency and counting links.
inline constexpr double kZeroTol = 1e-12;

struct Plant {
  Mat A;  // N_x x N_x
  Mat B;  // N_x x N_u
  std::vector<std::vector<int>> state_partition;  // state indices per subsystem
  std::vector<std::vector<int>> input_partition;  // input indices per subsystem
  int n_subsystems = 0;

  // provenance
  std::string kind;
  std::int64_t seed = 0;
  double target_radius = 0.0;

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
};

// Distances use a sentinel that sorts above every finite path length.
inline constexpr int kUnreachable = std::numeric_limits<int>::max() / 4;

struct SystemGraph {
  int n = 0;
  std::vector<std::uint8_t> adj;  // n*n, zero diagonal
  std::vector<int> dist;          // n*n shortest-path edge counts, kUnreachable if none

  std::uint8_t adjacency(int i, int j) const { return adj[static_cast<std::size_t>(i) * n + j]; }
  int distance(int i, int j) const { return dist[static_cast<std::size_t>(i) * n + j]; }

  int max_finite_distance() const {
    int m = 0;
    for (int v : dist)
      if (v != kUnreachable && v > m) m = v;
    return m;
  }
};

namespace detail {

// True when the subsystem-(i,j) block of A or B has any structural nonzero.
inline bool blocks_coupled(const Plant& p, int i, int j) {
  for (int r : p.state_partition[i]) {
    for (int c : p.state_partition[j])
      if (std::abs(p.A(r, c)) > kZeroTol) return true;
    for (int c : p.input_partition[j])
      if (std::abs(p.B(r, c)) > kZeroTol) return true;
  }
  return false;
}

}  // namespace detail

inline SystemGraph build_graph(const Plant& p) {
  const int n = p.n_subsystems;
  SystemGraph g;
  g.n = n;
  g.adj.assign(static_cast<std::size_t>(n) * n, 0);
  g.dist.assign(static_cast<std::size_t>(n) * n, kUnreachable);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && detail::blocks_coupled(p, i, j)) g.adj[static_cast<std::size_t>(i) * n + j] = 1;
  // directed BFS from every source
  std::deque<int> queue;
  for (int s = 0; s < n; ++s) {
    auto* d = &g.dist[static_cast<std::size_t>(s) * n];
    d[s] = 0;
    queue.clear();
    queue.push_back(s);
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      const auto* row = &g.adj[static_cast<std::size_t>(u) * n];
      for (int v = 0; v < n; ++v) {
        if (row[v] && d[v] == kUnreachable) {
          d[v] = d[u] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return g;
}

// Multiplies A only; B is untouched.
inline void scale_to_radius(Plant& p, double target) {
  double r = spectral_radius(p.A);
  if (r <= 0.0) throw std::runtime_error("scale_to_radius: zero spectral radius");
  p.A *= target / r;
  p.target_radius = target;
}

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

// Swing-equation node: states (phase, frequency), one input.
//   theta_i'' = -(d_i/m_i) theta_i' - sum_j (k_ij/m_i)(theta_i - theta_j) + u_i/m_i
// discretized by explicit Euler with dt = 0.2.
inline Plant assemble_swing(int n_nodes,
                            const std::vector<std::pair<int, int>>& edges,
                            Rng& rng, std::string kind, std::int64_t seed) {
  constexpr double dt = 0.2;
  std::vector<double> m(n_nodes), d(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    m[i] = rng.uniform(1.0, 2.0);
    d[i] = rng.uniform(1.0, 2.0);
  }
  std::vector<double> k(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) k[e] = rng.uniform(0.5, 1.0);

  Plant p;
  p.n_subsystems = n_nodes;
  p.kind = std::move(kind);
  p.seed = seed;
  p.A = Mat::Zero(2 * n_nodes, 2 * n_nodes);
  p.B = Mat::Zero(2 * n_nodes, n_nodes);
  std::vector<double> k_tot(n_nodes, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    k_tot[edges[e].first] += k[e];
    k_tot[edges[e].second] += k[e];
  }
  for (int i = 0; i < n_nodes; ++i) {
    p.A(2 * i, 2 * i) = 1.0;
    p.A(2 * i, 2 * i + 1) = dt;
    p.A(2 * i + 1, 2 * i) = -dt * k_tot[i] / m[i];
    p.A(2 * i + 1, 2 * i + 1) = 1.0 - dt * d[i] / m[i];
    p.B(2 * i + 1, i) = dt / m[i];
    p.state_partition.push_back({2 * i, 2 * i + 1});
    p.input_partition.push_back({i});
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    p.A(2 * a + 1, 2 * b) = dt * k[e] / m[a];
    p.A(2 * b + 1, 2 * a) = dt * k[e] / m[b];
  }
  return p;
}

}  // namespace detail

// Grid of swing nodes with randomized edge retention. A random spanning tree
// is always kept so the grid stays connected; every remaining grid edge
// survives with probability 0.8. The ungrounded phase dynamics put an
// eigenvalue exactly at 1, so A is always normalized to the requested radius
// (default 0.9999) and that value is recorded as target_radius. The default
// sits just under the margin: the raw swing chain carries a rigid-motion mode
// at exactly 1, and pushing it barely inside keeps the open loop technically
// stable but expensive enough that an empty controller never wins.
inline Plant make_grid_swing(int rows, int cols, std::uint64_t seed,
                             std::optional<double> target_radius = std::nullopt) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("make_grid_swing: rows, cols >= 1 required");
  if (target_radius && *target_radius <= 0.0)
    throw std::invalid_argument("make_grid_swing: target_radius > 0 required");
  Rng rng(seed ^ 0x67726964ULL);  // domain-separate plant draws from EA draws
  const int n = rows * cols;
  std::vector<std::pair<int, int>> candidates;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      int id = r * cols + c;
      if (c + 1 < cols) candidates.emplace_back(id, id + 1);
      if (r + 1 < rows) candidates.emplace_back(id, id + cols);
    }
  }
  // spanning tree from a random permutation of the candidate edges
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(order[i - 1], order[j]);
  }
  std::vector<char> in_tree(candidates.size(), 0);
  detail::UnionFind uf(n);
  for (std::size_t idx : order)
    if (uf.unite(candidates[idx].first, candidates[idx].second)) in_tree[idx] = 1;
  std::vector<std::pair<int, int>> edges;
  for (std::size_t e = 0; e < candidates.size(); ++e)
    if (in_tree[e] || rng.bernoulli(0.8)) edges.push_back(candidates[e]);

  Plant p = detail::assemble_swing(n, edges, rng, "grid", static_cast<std::int64_t>(seed));
  scale_to_radius(p, target_radius.value_or(0.9999));
  return p;
}

// The 13-bus feeder topology: backbone plus laterals, 12 fixed edges.
inline const std::vector<std::pair<int, int>>& ieee13_edges() {
  static const std::vector<std::pair<int, int>> edges = {
      {0, 1}, {1, 2}, {2, 3}, {1, 4}, {4, 5}, {1, 6},
      {6, 7}, {7, 8}, {7, 9}, {6, 10}, {6, 11}, {11, 12}};
  return edges;
}

inline Plant make_ieee13(std::uint64_t seed, double target_radius) {
  if (target_radius <= 0.0) throw std::invalid_argument("make_ieee13: target_radius > 0 required");
  Rng rng(seed ^ 0x69656565ULL);
  Plant p = detail::assemble_swing(13, ieee13_edges(), rng, "ieee13", static_cast<std::int64_t>(seed));
  scale_to_radius(p, target_radius);
  return p;
}

// Identity-weighted synthesis, the baseline every run here measures against.
inline LqrSolution solve_lqr(const Plant& p) {
  return solve_lqr(p.A, p.B, Mat::Identity(p.nx(), p.nx()),
                   Mat::Identity(p.nu(), p.nu()));
}

}  // namespace codesign

#endif  // CODESIGN_PLANT_HPP
