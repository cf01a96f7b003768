#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace privsub {

inline constexpr double kRankTolerance = 1e-9;

// Singular values below rel_tol * sigma_max count as zero.
inline int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = kRankTolerance) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

// Orthonormal basis (as columns) of the orthogonal complement of the column
// space of m. Each basis vector is sign-normalized so that its first entry of
// non-negligible magnitude is positive.
inline Eigen::MatrixXd orthogonal_complement(const Eigen::MatrixXd& m,
                                             double rel_tol = kRankTolerance) {
  const Eigen::Index rows = m.rows();
  if (m.cols() == 0) return Eigen::MatrixXd::Identity(rows, rows);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);
  const int rank = numerical_rank(m, rel_tol);
  Eigen::MatrixXd basis = svd.matrixU().rightCols(rows - rank);
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (std::abs(basis(r, c)) > 1e-12) {
        if (basis(r, c) < 0) basis.col(c) *= -1.0;
        break;
      }
    }
  }
  return basis;
}

// Krylov block (v, Mv, ..., M^{count-1} v).
inline Eigen::MatrixXd krylov(const Eigen::MatrixXd& mat, const Eigen::VectorXd& v, int count) {
  Eigen::MatrixXd out(v.size(), std::max(count, 0));
  if (count <= 0) return out;
  out.col(0) = v;
  for (int i = 1; i < count; ++i) out.col(i) = mat * out.col(i - 1);
  return out;
}

inline double infinity_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace privsub
