#pragma once

// Rank, null-space and row-independence helpers over Eigen.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace gridseer::linalg {

// Relative threshold below which singular values / pivots count as zero.
inline constexpr double kRankTolerance = 1e-9;

inline Eigen::Index rank(const Eigen::MatrixXd& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(kRankTolerance);
  return qr.rank();
}

// Orthonormal basis of {x : a x = 0}, one basis vector per column.
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.cols();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  if (a.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = kRankTolerance * (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cutoff) ++r;
  return svd.matrixV().rightCols(n - r);
}

// Columns j whose unit vector lies in the row space of `a`, i.e. x_j is
// pinned to zero for every x in the null space.
inline std::vector<bool> determined_columns(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd ns = null_space(a);
  std::vector<bool> out(static_cast<std::size_t>(a.cols()), true);
  for (Eigen::Index j = 0; j < ns.rows(); ++j) {
    if (ns.cols() > 0 && ns.row(j).norm() > 1e-7) {
      out[static_cast<std::size_t>(j)] = false;
    }
  }
  return out;
}

// Greedy scan in row order; a row is kept when it is independent of the rows
// kept before it. Returns the kept row positions.
inline std::vector<Eigen::Index> independent_rows(const Eigen::MatrixXd& a) {
  std::vector<Eigen::Index> kept;
  std::vector<Eigen::VectorXd> basis;  // orthonormal
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    Eigen::VectorXd v = a.row(r).transpose();
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    // Two passes of modified Gram-Schmidt keep the basis orthogonal.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) v -= q.dot(v) * q;
    }
    const double norm = v.norm();
    if (norm > kRankTolerance * norm0 * 1e2) {
      basis.push_back(v / norm);
      kept.push_back(r);
    }
  }
  return kept;
}

}  // namespace gridseer::linalg
