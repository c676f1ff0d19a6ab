#ifndef CODESIGN_CONTROL_HPP
#define CODESIGN_CONTROL_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <limits>
#include <stdexcept>

namespace codesign {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Margin below 1 that still counts as stable; guards eigenvalue roundoff on
// marginal closed loops.
inline constexpr double kStabilityMargin = 1e-9;

inline double spectral_radius(const Mat& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("spectral_radius: square matrix required");
  Eigen::EigenSolver<Mat> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectral_radius: eigenvalue iteration failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline bool is_stable(const Mat& A_cl) {
  return spectral_radius(A_cl) < 1.0 - kStabilityMargin;
}

inline Mat symmetrize(const Mat& M) { return 0.5 * (M + M.transpose()); }

// Discrete algebraic Riccati solution by structured doubling. Quadratic
// convergence; the tolerance applies to the successive-iterate Frobenius
// difference of the H (= P) iterate.
inline Mat solve_dare(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                      double tol = 1e-12, int max_iter = 10000) {
  const Eigen::Index n = A.rows();
  Eigen::LLT<Mat> rllt(R);
  if (rllt.info() != Eigen::Success)
    throw std::runtime_error("solve_dare: R not positive definite");
  Mat Ak = A;
  Mat G = B * rllt.solve(B.transpose());  // B R^-1 B^T
  Mat H = Q;
  const Mat I = Mat::Identity(n, n);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::PartialPivLU<Mat> lu(I + G * H);
    Mat An = Ak * lu.solve(Ak);
    Mat Gn = symmetrize(G + Ak * lu.solve(G * Ak.transpose()));
    Mat Hn = symmetrize(H + Ak.transpose() * H * lu.solve(Ak));
    const double diff = (Hn - H).norm();
    Ak.swap(An);
    G.swap(Gn);
    H.swap(Hn);
    if (!H.allFinite())
      throw std::runtime_error("solve_dare: diverged; input likely not stabilizable");
    if (diff < tol) return H;
  }
  throw std::runtime_error("solve_dare: no convergence; input likely not stabilizable or ill-conditioned");
}

// K = -(R + B^T P B)^-1 B^T P A
inline Mat lqr_gain(const Mat& A, const Mat& B, const Mat& R, const Mat& P) {
  Mat S = R + B.transpose() * P * B;
  Eigen::LLT<Mat> llt(symmetrize(S));
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("lqr_gain: R + B^T P B is singular");
  return -llt.solve(B.transpose() * P * A);
}

// Solves A_cl^T P A_cl - P + W = 0 by Smith doubling:
//   P <- P + M^T P M;  M <- M M
inline Mat solve_dlyap(const Mat& A_cl, const Mat& W, double tol = 1e-12) {
  if (spectral_radius(A_cl) >= 1.0)
    throw std::runtime_error("solve_dlyap: unstable closed loop");
  Mat P = symmetrize(W);
  Mat M = A_cl;
  for (int it = 0; it < 200; ++it) {
    Mat T = M.transpose() * P * M;
    P = symmetrize(P + T);
    if (!P.allFinite()) throw std::runtime_error("solve_dlyap: iteration diverged");
    if (T.norm() < tol) return P;
    M = M * M;
  }
  throw std::runtime_error("solve_dlyap: no convergence");
}

// J = trace(P Sigma) with P the closed-loop cost Lyapunov solution, or
// +infinity when A+BK is not (robustly) stable. Instability is a value here,
// not an error.
inline double lqr_cost(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                       const Mat& K, const Mat& Sigma) {
  Mat A_cl = A + B * K;
  if (spectral_radius(A_cl) >= 1.0 - kStabilityMargin) return kInf;
  Mat W = symmetrize(Q + K.transpose() * R * K);
  Mat P = solve_dlyap(A_cl, W);
  return (P * Sigma).trace();
}

inline double lqr_cost(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                       const Mat& K) {
  return lqr_cost(A, B, Q, R, K, Mat::Identity(A.rows(), A.rows()));
}

// G = 2 ((R + B^T P_K B) K + B^T P_K A) Sigma_K.
// P_K is the cost Lyapunov solution; Sigma_K is the state covariance, which
// solves the transposed equation A_cl Sigma_K A_cl^T - Sigma_K + Sigma = 0.
inline Mat lqr_gradient(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                        const Mat& K, const Mat& Sigma) {
  Mat A_cl = A + B * K;
  if (spectral_radius(A_cl) >= 1.0 - kStabilityMargin)
    throw std::runtime_error("lqr_gradient: unstable closed loop");
  Mat W = symmetrize(Q + K.transpose() * R * K);
  Mat P_K = solve_dlyap(A_cl, W);
  Mat Sigma_K = solve_dlyap(A_cl.transpose(), Sigma);
  return 2.0 * ((R + B.transpose() * P_K * B) * K + B.transpose() * P_K * A) * Sigma_K;
}

inline Mat lqr_gradient(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                        const Mat& K) {
  return lqr_gradient(A, B, Q, R, K, Mat::Identity(A.rows(), A.rows()));
}

struct LqrSolution {
  Mat P;        // Riccati solution
  Mat K_dense;  // optimal gain
  double J_dense = 0.0;
};

inline LqrSolution solve_lqr(const Mat& A, const Mat& B, const Mat& Q, const Mat& R) {
  LqrSolution out;
  out.P = solve_dare(A, B, Q, R);
  out.K_dense = lqr_gain(A, B, R, out.P);
  out.J_dense = lqr_cost(A, B, Q, R, out.K_dense);
  return out;
}

}  // namespace codesign

#endif  // CODESIGN_CONTROL_HPP
