#ifndef CODESIGN_ANALYSIS_HPP
#define CODESIGN_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "codesign/genome.hpp"

namespace codesign {

// Exponential envelope on the subsystem blocks of the dense gain:
// ||K_ij|| <= upsilon * rho^{d_G(i,j)} for every finite-distance pair.
struct DecayFit {
  double upsilon = 1.0;            // >= 1
  double rho = 0.5;                // in (0,1)
  std::vector<double> level_max;   // index r: max block 2-norm at distance r
};

inline double operator_2norm(const Mat& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  // largest singular value via the Gram matrix; blocks here are tiny
  Mat G = (M.rows() <= M.cols()) ? Mat(M * M.transpose()) : Mat(M.transpose() * M);
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(G), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// Block of K mapping subsystem j's states into subsystem i's inputs.
inline Mat gain_block(const Mat& K, const Plant& p, int i, int j) {
  const auto& rows = p.input_partition[i];
  const auto& cols = p.state_partition[j];
  Mat blk(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) blk(r, c) = K(rows[r], cols[c]);
  return blk;
}

inline DecayFit fit_decay(const Mat& K_d, const Plant& p, const SystemGraph& g) {
  const int n = p.n_subsystems;
  const int maxd = g.max_finite_distance();
  std::vector<double> level(static_cast<std::size_t>(maxd) + 1, 0.0);
  std::vector<std::pair<int, double>> pair_norms;  // (distance, block norm)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int r = g.distance(i, j);
      if (r == kUnreachable) continue;
      const double nm = operator_2norm(gain_block(K_d, p, i, j));
      pair_norms.emplace_back(r, nm);
      level[static_cast<std::size_t>(r)] = std::max(level[static_cast<std::size_t>(r)], nm);
    }
  }
  // least squares on log m(r) over the nonempty bins
  int used = 0;
  double sr = 0, sl = 0, srr = 0, srl = 0;
  for (int r = 0; r <= maxd; ++r) {
    const double m = level[static_cast<std::size_t>(r)];
    if (m <= 0.0) continue;
    const double lm = std::log(m);
    ++used;
    sr += r;
    sl += lm;
    srr += static_cast<double>(r) * r;
    srl += r * lm;
  }
  if (used < 2) throw std::runtime_error("degenerate topology");
  const double denom = used * srr - sr * sr;
  const double slope = (used * srl - sr * sl) / denom;
  DecayFit fit;
  fit.level_max = std::move(level);
  fit.rho = std::clamp(std::exp(slope), 1e-6, 1.0 - 1e-6);
  // inflate so the envelope bounds every pair, then clamp
  double ups = 0.0;
  for (const auto& [r, nm] : pair_norms) ups = std::max(ups, nm / std::pow(fit.rho, r));
  fit.upsilon = std::max(1.0, ups);
  return fit;
}

// Random gains near K_d inside the sublevel set {J <= c J_dense}. The
// perturbation radii stay small relative to K_d so secant estimates track
// local curvature instead of the sublevel boundary blowup.
inline std::vector<Mat> sample_sublevel(const Plant& p, const Mat& K_d, double J_dense,
                                        double sublevel_factor, int n_samples, Rng& rng) {
  const Mat Q = Mat::Identity(p.nx(), p.nx());
  const Mat R = Mat::Identity(p.nu(), p.nu());
  const double eps_max = 0.1 * (1.0 + K_d.norm());
  std::vector<Mat> out;
  for (int i = 0; i < n_samples; ++i) {
    double eps = eps_max * (i + 1.0) / n_samples;
    for (int attempt = 0; attempt < 100; ++attempt) {
      Mat dir(K_d.rows(), K_d.cols());
      for (Eigen::Index t = 0; t < dir.size(); ++t) dir.data()[t] = rng.gaussian();
      const double nm = dir.norm();
      if (nm <= 0.0) continue;
      Mat K = K_d + (eps / nm) * dir;
      const double j = lqr_cost(p.A, p.B, Q, R, K);
      if (std::isfinite(j) && j <= sublevel_factor * J_dense) {
        out.push_back(std::move(K));
        break;
      }
      eps *= 0.5;
    }
  }
  if (out.empty()) throw std::runtime_error("estimate_lipschitz: no stable samples found");
  return out;
}

// Largest pairwise gradient secant over sampled sublevel gains, inflated by a
// 1.5 safety factor.
inline double estimate_lipschitz(const Plant& p, const Mat& K_d, double J_dense,
                                 double sublevel_factor, int n_samples, Rng& rng) {
  const Mat Q = Mat::Identity(p.nx(), p.nx());
  const Mat R = Mat::Identity(p.nu(), p.nu());
  const auto samples = sample_sublevel(p, K_d, J_dense, sublevel_factor, n_samples, rng);
  std::vector<Mat> grads;
  grads.reserve(samples.size());
  for (const auto& K : samples) grads.push_back(lqr_gradient(p.A, p.B, Q, R, K));
  double best = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double dk = (samples[i] - samples[j]).norm();
      if (dk <= 1e-12) continue;  // identical samples carry no slope information
      best = std::max(best, (grads[i] - grads[j]).norm() / dk);
    }
  }
  if (best <= 0.0) throw std::runtime_error("estimate_lipschitz: degenerate sample set");
  return 1.5 * best;
}

// Phi(h) = L_J Upsilon^2 rho^{2h} / J_dense * (sqrt(N_u N_x) + 1/2)
inline double cost_rate(int h, const DecayFit& fit, double L_J, double J_dense,
                        int n_u, int n_x) {
  const double dims = std::sqrt(static_cast<double>(n_u) * n_x) + 0.5;
  return L_J * fit.upsilon * fit.upsilon * std::pow(fit.rho, 2.0 * h) / J_dense * dims;
}

// h* = floor( log(L_J Upsilon^2 (sqrt(N_u N_x)+1/2) / (w_c J_dense)) / (2 |log rho|) ),
// clamped at zero when the argument drops below one.
inline int critical_distance(const DecayFit& fit, double L_J, double J_dense,
                             double w_c, int n_u, int n_x) {
  const double dims = std::sqrt(static_cast<double>(n_u) * n_x) + 0.5;
  const double arg = L_J * fit.upsilon * fit.upsilon * dims / (w_c * J_dense);
  if (arg <= 1.0) return 0;
  const double h = std::log(arg) / (2.0 * std::abs(std::log(fit.rho)));
  return std::max(0, static_cast<int>(std::floor(h)));
}

// Largest h such that every ordered subsystem pair within graph distance h is
// an edge of the controller adjacency of K_s([ell, 1, 1]).
inline int effective_truncation_distance(int ell, const Mat& K_d, const Plant& p,
                                         const SystemGraph& g) {
  const Mat K = prune_by_magnitude(K_d, ell);
  const auto adj = controller_adjacency(K, p);
  const int n = p.n_subsystems;
  const int maxd = g.max_finite_distance();
  for (int r = 1; r <= maxd; ++r) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && g.distance(i, j) == r && !adj[static_cast<std::size_t>(i) * n + j])
          return r - 1;
  }
  return maxd;
}

struct ImprovementProbability {
  double per_offspring = 0.0;  // p_imp
  double population = 0.0;     // P_imp = 1 - (1 - p_imp)^(N_p - n_e)
};

inline ImprovementProbability improvement_probability(int h_prev, int h_star, int n_p,
                                                      int d, int n_e) {
  ImprovementProbability out;
  if (h_prev > h_star) out.per_offspring = 1.0 / (static_cast<double>(n_p) * (2 * d + 1));
  out.population = 1.0 - std::pow(1.0 - out.per_offspring, n_p - n_e);
  return out;
}

// Predicted best-cost curve driven by the run's own h_t sequence:
//   J^_t = J^_{t-1} - max(0, (w_c - Phi(h_{t-1})) P_imp(t)),  J^ at the first
// recorded generation = J0. Flat once h <= h*.
inline std::vector<double> predicted_curve(const std::vector<int>& h_by_generation,
                                           double J0, const DecayFit& fit, double L_J,
                                           double J_dense, double w_c, int n_p, int d,
                                           int n_e, int n_u, int n_x) {
  std::vector<double> curve;
  curve.reserve(h_by_generation.size());
  if (h_by_generation.empty()) return curve;
  const int h_star = critical_distance(fit, L_J, J_dense, w_c, n_u, n_x);
  curve.push_back(J0);
  for (std::size_t t = 1; t < h_by_generation.size(); ++t) {
    const int h_prev = h_by_generation[t - 1];
    const double phi = cost_rate(h_prev, fit, L_J, J_dense, n_u, n_x);
    const auto ip = improvement_probability(h_prev, h_star, n_p, d, n_e);
    const double dec = std::max(0.0, (w_c - phi) * ip.population);
    curve.push_back(curve.back() - dec);
  }
  return curve;
}

// Assumption-style norm bound with a strict > 1 floor.
inline double norm_bound_L(const Plant& p, const Mat& Q, const Mat& R) {
  double L = 1.0 + 1e-9;
  L = std::max(L, operator_2norm(p.A));
  L = std::max(L, operator_2norm(p.B));
  L = std::max(L, operator_2norm(Q));
  L = std::max(L, operator_2norm(R));
  return L;
}

struct StabilityMargin {
  double L = 0.0;
  double sigma_crit = 0.0;  // admissible gain perturbation radius
  double omega = 0.0;       // trajectory envelope amplitude
  double beta = 0.0;        // trajectory envelope decay, in (0,1)
};

inline StabilityMargin stability_margin(double L, const DecayFit& fit) {
  StabilityMargin out;
  out.L = L;
  const double u2 = fit.upsilon * fit.upsilon;
  const double r2 = fit.rho * fit.rho;
  out.sigma_crit = (1.0 - r2) / (4.0 * u2 * L * (L + 2.0 * fit.upsilon * fit.rho));
  out.beta = std::sqrt(1.0 - (1.0 - r2) / (2.0 * u2));
  out.omega = std::sqrt(u2 / (1.0 - r2));
  return out;
}

// Ordered-pair census over graph distance; bin 0 counts the diagonal.
inline std::vector<long> ndelta_table(const SystemGraph& g) {
  std::vector<long> table(static_cast<std::size_t>(g.max_finite_distance()) + 1, 0);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const int r = g.distance(i, j);
      if (r != kUnreachable) ++table[static_cast<std::size_t>(r)];
    }
  return table;
}

struct StabilityDepth {
  int h_stab = 0;
  bool vacuous = false;  // no h up to the max distance satisfied the tail bound
  int ell_stab = 1;
};

// h_stab: smallest h whose envelope tail beyond h stays inside sigma_crit.
// ell_stab: smallest link count whose effective truncation distance reaches
// h_stab (binary search; h(ell) is nondecreasing).
inline StabilityDepth h_stab_and_ell_stab(const DecayFit& fit, double sigma_crit,
                                          const std::vector<long>& ndelta, const Mat& K_d,
                                          const Plant& p, const SystemGraph& g) {
  StabilityDepth out;
  const int maxd = static_cast<int>(ndelta.size()) - 1;
  out.h_stab = maxd + 1;
  out.vacuous = true;
  for (int h = 0; h <= maxd; ++h) {
    double tail = 0.0;
    for (int r = h + 1; r <= maxd; ++r)
      tail += static_cast<double>(ndelta[static_cast<std::size_t>(r)]) * std::pow(fit.rho, 2.0 * r);
    if (fit.upsilon * std::sqrt(tail) < sigma_crit) {
      out.h_stab = h;
      out.vacuous = false;
      break;
    }
  }
  const int ell_max = p.nu() * p.nx();
  int lo = 1, hi = ell_max;
  if (effective_truncation_distance(ell_max, K_d, p, g) < out.h_stab) {
    out.ell_stab = ell_max;  // only reachable through the vacuous branch
    return out;
  }
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (effective_truncation_distance(mid, K_d, p, g) >= out.h_stab)
      hi = mid;
    else
      lo = mid + 1;
  }
  out.ell_stab = lo;
  return out;
}

// p_stab lower bound: [ell_t - ell_stab + d + 1]_+ / (2d+1) * (1-p_m)^(N_u+N_x),
// the first factor capped at one.
inline double offspring_stability_probability(int ell_t, int ell_stab, int d, double p_m,
                                              int n_u, int n_x) {
  const double kept = std::max(0, ell_t - ell_stab + d + 1);
  const double f1 = std::min(1.0, kept / (2.0 * d + 1.0));
  return f1 * std::pow(1.0 - p_m, n_u + n_x);
}

// max{ell : h(ell) <= h_star}; the step-function inverse used to report the
// guaranteed terminal link count.
inline int inverse_truncation_distance(int h_star, const Mat& K_d, const Plant& p,
                                       const SystemGraph& g) {
  const int ell_max = p.nu() * p.nx();
  if (effective_truncation_distance(ell_max, K_d, p, g) <= h_star) return ell_max;
  if (effective_truncation_distance(1, K_d, p, g) > h_star) return 0;  // empty set
  int lo = 1, hi = ell_max;  // h(lo) <= h_star < h(hi)
  while (lo + 1 < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (effective_truncation_distance(mid, K_d, p, g) <= h_star)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

struct AnalysisReport {
  DecayFit fit;
  double L_J = 0.0;
  double J_dense = 0.0;
  int n_u = 0, n_x = 0;
  int h_star = 0;
  std::vector<double> phi;  // h = 0 .. max finite distance
  StabilityMargin margin;
  StabilityDepth depth;
  std::vector<long> n_delta;
  int ell_inverse_h_star = 0;
  // Recorded for completeness; no implemented formula consumes these.
  double alpha = 0.0;  // realized dense closed-loop spectral radius
  double gamma = 1.0;  // smallest eigenvalue of R
  std::string lipschitz_method;
};

inline AnalysisReport build_analysis_report(const Plant& p, const SystemGraph& g,
                                            const Mat& K_d, double J_dense,
                                            const Weights& w, int n_p, int d, int n_e,
                                            int lipschitz_samples, std::uint64_t seed) {
  AnalysisReport rep;
  rep.fit = fit_decay(K_d, p, g);
  Rng rng(seed ^ 0x616e6c7aULL);
  rep.J_dense = J_dense;
  rep.n_u = p.nu();
  rep.n_x = p.nx();
  rep.L_J = estimate_lipschitz(p, K_d, J_dense, 10.0, lipschitz_samples, rng);
  rep.lipschitz_method =
      "max pairwise gradient secant over sampled sublevel gains, safety factor 1.5";
  rep.h_star = critical_distance(rep.fit, rep.L_J, J_dense, w.w_c, rep.n_u, rep.n_x);
  const int maxd = g.max_finite_distance();
  for (int h = 0; h <= maxd; ++h)
    rep.phi.push_back(cost_rate(h, rep.fit, rep.L_J, J_dense, rep.n_u, rep.n_x));
  const Mat Q = Mat::Identity(p.nx(), p.nx());
  const Mat R = Mat::Identity(p.nu(), p.nu());
  rep.margin = stability_margin(norm_bound_L(p, Q, R), rep.fit);
  rep.n_delta = ndelta_table(g);
  rep.depth = h_stab_and_ell_stab(rep.fit, rep.margin.sigma_crit, rep.n_delta, K_d, p, g);
  rep.ell_inverse_h_star = inverse_truncation_distance(rep.h_star, K_d, p, g);
  rep.alpha = spectral_radius(p.A + p.B * K_d);
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(R, Eigen::EigenvaluesOnly);
    rep.gamma = es.eigenvalues().minCoeff();
  }
  return rep;
}

}  // namespace codesign

#endif  // CODESIGN_ANALYSIS_HPP
