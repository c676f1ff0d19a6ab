#ifndef CODESIGN_REPAIR_HPP
#define CODESIGN_REPAIR_HPP

#include <cmath>
#include <vector>

#include "codesign/genome.hpp"

namespace codesign {

struct RepairConfig {
  double rho_star = 0.95;  // target Gershgorin row-sum, in (0,1)
  int max_iter = 200;
};

struct RepairResult {
  Mat K_r;
  double row_sum = kInf;  // final max absolute row sum of A + B K_r
  int iterations = 0;     // update steps actually taken
  bool succeeded = false; // reached row_sum <= rho_star (+ float slack)
  bool schur_stable = false;
};

inline Vec gershgorin_rowsums(const Mat& M) {
  return M.cwiseAbs().rowwise().sum();
}

inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Subgradient of the max row sum of A + BK with respect to K, projected onto
// the allowed support. i* is the max-row-sum row, smallest index on ties.
inline Mat gershgorin_subgradient(const Mat& A, const Mat& B, const Mat& K,
                                  const std::vector<std::uint8_t>& support) {
  const Mat A_cl = A + B * K;
  const Vec sums = gershgorin_rowsums(A_cl);
  int istar = 0;
  for (int i = 1; i < sums.size(); ++i)
    if (sums[i] > sums[istar]) istar = i;
  Mat g = Mat::Zero(K.rows(), K.cols());
  for (int u = 0; u < K.rows(); ++u)
    for (int j = 0; j < K.cols(); ++j)
      if (support[static_cast<std::size_t>(u) * K.cols() + j])
        g(u, j) = sign0(A_cl(istar, j)) * B(istar, u);
  return g;
}

namespace detail {
inline std::vector<std::uint8_t> support_of(const Mat& K) {
  std::vector<std::uint8_t> s(static_cast<std::size_t>(K.size()));
  for (int u = 0; u < K.rows(); ++u)
    for (int j = 0; j < K.cols(); ++j)
      s[static_cast<std::size_t>(u) * K.cols() + j] = K(u, j) != 0.0 ? 1 : 0;
  return s;
}
}  // namespace detail

// Projected Polyak subgradient descent on the max row sum of A + BK, confined
// to the given sparsity pattern. The loop exits once the row sum reaches
// rho_star; the float slack keeps the exact-hit case (Polyak step lands on
// the target) from spinning with zero step size until max_iter.
inline RepairResult repair_controller(const Mat& A, const Mat& B, const Mat& K_s,
                                      const std::vector<std::uint8_t>& support,
                                      const RepairConfig& cfg = {}) {
  const double stop_at = cfg.rho_star + 1e-12;
  RepairResult out;
  out.K_r = K_s;
  for (int t = 0; t < cfg.max_iter; ++t) {
    const Mat A_cl = A + B * out.K_r;
    const Vec sums = gershgorin_rowsums(A_cl);
    int istar = 0;
    for (int i = 1; i < sums.size(); ++i)
      if (sums[i] > sums[istar]) istar = i;
    const double rbar = sums[istar];
    if (rbar <= stop_at) break;
    Mat g = Mat::Zero(K_s.rows(), K_s.cols());
    for (int u = 0; u < K_s.rows(); ++u)
      for (int j = 0; j < K_s.cols(); ++j)
        if (support[static_cast<std::size_t>(u) * K_s.cols() + j])
          g(u, j) = sign0(A_cl(istar, j)) * B(istar, u);
    const double gn2 = g.squaredNorm();
    if (gn2 <= 0.0) break;  // no descent direction on this support
    const double eta = std::min((rbar - cfg.rho_star) / gn2, 0.5);
    out.K_r -= eta * g;
    ++out.iterations;
  }
  out.row_sum = gershgorin_rowsums(A + B * out.K_r).maxCoeff();
  out.succeeded = out.row_sum <= stop_at;
  out.schur_stable = spectral_radius(A + B * out.K_r) < 1.0;
  return out;
}

// Pattern taken from the nonzeros of K_s itself. A gain with no nonzeros
// carries no pattern information, so every entry stays frozen at zero.
inline RepairResult repair_controller(const Mat& A, const Mat& B, const Mat& K_s,
                                      const RepairConfig& cfg = {}) {
  return repair_controller(A, B, K_s, detail::support_of(K_s), cfg);
}

// Evaluate a gene, routing through repair when the realized gain is unstable.
// Acceptance of the repaired gain is by spectral radius, not by the Gershgorin
// target: the row-sum condition is sufficient but not necessary.
inline EvaluatedController evaluate_with_repair(const Gene& g, const Plant& p,
                                                const Mat& K_d, const Weights& w,
                                                double J_dense,
                                                const RepairConfig& cfg = {}) {
  EvaluatedController out = evaluate(g, p, K_d, w, J_dense);
  if (out.stable) return out;
  RepairResult rep = repair_controller(p.A, p.B, out.K_s, cfg);
  const Mat Q = Mat::Identity(p.nx(), p.nx());
  const Mat R = Mat::Identity(p.nu(), p.nu());
  const double j = lqr_cost(p.A, p.B, Q, R, rep.K_r);
  if (std::isfinite(j)) {
    out.K_s = rep.K_r;
    out.counts = structural_counts(rep.K_r, p);
    out.j_ratio = j / J_dense;
    out.j_ea = out.j_ratio + structural_cost(out.counts, w);
    out.stable = true;
    out.repaired = true;
  }
  return out;
}

}  // namespace codesign

#endif  // CODESIGN_REPAIR_HPP
