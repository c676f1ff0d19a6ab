#ifndef CODESIGN_GENOME_HPP
#define CODESIGN_GENOME_HPP

#include <algorithm>
#include <cstdint>
#include <tuple>
#include <vector>

#include "codesign/plant.hpp"

namespace codesign {

// theta = [ell, a, s]: how many gain entries survive, which actuators stay,
// which sensors stay.
struct Gene {
  int ell = 1;
  std::vector<std::uint8_t> actuator_mask;  // length N_u
  std::vector<std::uint8_t> sensor_mask;    // length N_x

  bool operator==(const Gene& o) const {
    return ell == o.ell && actuator_mask == o.actuator_mask && sensor_mask == o.sensor_mask;
  }
};

struct GeneHash {
  std::size_t operator()(const Gene& g) const {
    std::uint64_t h = fnv1a(&g.ell, sizeof(g.ell));
    h = fnv1a(g.actuator_mask.data(), g.actuator_mask.size(), h);
    h = fnv1a(g.sensor_mask.data(), g.sensor_mask.size(), h);
    return static_cast<std::size_t>(h);
  }
};

struct Weights {
  double w_a = 0.4;
  double w_s = 0.2;
  double w_c = 0.05;
};

struct StructuralCounts {
  int n_act = 0;
  int n_sens = 0;
  int n_comm = 0;
};

struct EvaluatedController {
  Gene gene;
  Mat K_s;
  double j_ratio = kInf;  // J_LQR(K_s) / J_LQR(K_d)
  StructuralCounts counts;
  double j_ea = kInf;
  bool stable = false;
  bool repaired = false;
};

inline int count_nonzero(const Mat& K) {
  int n = 0;
  for (Eigen::Index i = 0; i < K.size(); ++i)
    if (std::abs(K.data()[i]) > kZeroTol) ++n;
  return n;
}

// Keep the ell largest-magnitude entries, zero the rest. Ties go to the
// smaller (row, col) in row-major order so results are reproducible across
// implementations.
inline Mat prune_by_magnitude(const Mat& K_d, int ell) {
  struct Entry {
    double mag;
    int r, c;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(K_d.size()));
  for (int r = 0; r < K_d.rows(); ++r)
    for (int c = 0; c < K_d.cols(); ++c) entries.push_back({std::abs(K_d(r, c)), r, c});
  const auto keep_first = [](const Entry& a, const Entry& b) {
    if (a.mag != b.mag) return a.mag > b.mag;
    return std::tie(a.r, a.c) < std::tie(b.r, b.c);
  };
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(ell, 0)), entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(k), entries.end(), keep_first);
  Mat out = Mat::Zero(K_d.rows(), K_d.cols());
  for (std::size_t i = 0; i < k; ++i) out(entries[i].r, entries[i].c) = K_d(entries[i].r, entries[i].c);
  return out;
}

// Zero rows of dropped actuators, then columns of dropped sensors.
inline Mat apply_masks(const Mat& K, const std::vector<std::uint8_t>& a,
                       const std::vector<std::uint8_t>& s) {
  Mat out = K;
  for (int r = 0; r < out.rows(); ++r)
    if (!a[static_cast<std::size_t>(r)]) out.row(r).setZero();
  for (int c = 0; c < out.cols(); ++c)
    if (!s[static_cast<std::size_t>(c)]) out.col(c).setZero();
  return out;
}

inline Mat realize(const Gene& g, const Mat& K_d) {
  return apply_masks(prune_by_magnitude(K_d, g.ell), g.actuator_mask, g.sensor_mask);
}

// Subsystem-level controller adjacency: entry (i,j) set when the block of K
// mapping subsystem j's states to subsystem i's inputs has a structural
// nonzero. Diagonal stays zero by convention.
inline std::vector<std::uint8_t> controller_adjacency(const Mat& K, const Plant& p) {
  const int n = p.n_subsystems;
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      bool hit = false;
      for (int u : p.input_partition[i]) {
        for (int x : p.state_partition[j]) {
          if (std::abs(K(u, x)) > kZeroTol) {
            hit = true;
            break;
          }
        }
        if (hit) break;
      }
      adj[static_cast<std::size_t>(i) * n + j] = hit ? 1 : 0;
    }
  }
  return adj;
}

inline StructuralCounts structural_counts(const Mat& K, const Plant& p) {
  StructuralCounts out;
  for (int r = 0; r < K.rows(); ++r)
    if ((K.row(r).cwiseAbs().array() > kZeroTol).any()) ++out.n_act;
  for (int c = 0; c < K.cols(); ++c)
    if ((K.col(c).cwiseAbs().array() > kZeroTol).any()) ++out.n_sens;
  const auto adj = controller_adjacency(K, p);
  for (std::uint8_t bit : adj) out.n_comm += bit;
  return out;
}

inline double structural_cost(const StructuralCounts& c, const Weights& w) {
  return w.w_a * c.n_act + w.w_s * c.n_sens + w.w_c * c.n_comm;
}

// Block-diagonal truncation: every cross-subsystem block of K is zeroed, so
// each sub-controller reads only its own subsystem and the link count is 0.
inline Mat diagonal_truncation(const Mat& K, const Plant& p) {
  Mat out = Mat::Zero(K.rows(), K.cols());
  for (int i = 0; i < p.n_subsystems; ++i)
    for (int r : p.input_partition[i])
      for (int c : p.state_partition[i]) out(r, c) = K(r, c);
  return out;
}

inline EvaluatedController evaluate(const Gene& g, const Plant& p, const Mat& K_d,
                                    const Weights& w, double J_dense) {
  EvaluatedController out;
  out.gene = g;
  out.K_s = realize(g, K_d);
  out.counts = structural_counts(out.K_s, p);
  const Mat Q = Mat::Identity(p.nx(), p.nx());
  const Mat R = Mat::Identity(p.nu(), p.nu());
  const double j = lqr_cost(p.A, p.B, Q, R, out.K_s);
  out.stable = std::isfinite(j);
  if (out.stable) {
    out.j_ratio = j / J_dense;
    out.j_ea = out.j_ratio + structural_cost(out.counts, w);
  }
  return out;
}

}  // namespace codesign

#endif  // CODESIGN_GENOME_HPP
