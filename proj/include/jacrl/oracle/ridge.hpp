#ifndef JACRL_ORACLE_RIDGE_HPP_
#define JACRL_ORACLE_RIDGE_HPP_

#include <Eigen/Dense>
#include <cmath>

#include "jacrl/errors.hpp"

namespace jacrl::oracle {

// Reference ridge solve (A A^T + reg I)^{-1} A O computed by plain Gaussian
// elimination with partial pivoting. Shares no solver code with the
// estimator it cross-checks.
inline Eigen::MatrixXd ridge_oracle(const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& O, double reg) {
  if (A.cols() != O.rows()) throw ShapeMismatch("ridge_oracle: A cols != O rows");
  if (reg < 0.0) throw ValidationError("ridge_oracle: reg must be >= 0");

  const int d = static_cast<int>(A.rows());
  const int m = static_cast<int>(O.cols());

  // Normal matrix and right-hand side, formed with explicit loops.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < A.cols(); ++k) G(i, j) += A(i, k) * A(j, k);
  for (int i = 0; i < d; ++i) G(i, i) += reg;

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(d, m);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < A.cols(); ++k) B(i, j) += A(i, k) * O(k, j);

  // Forward elimination with partial pivoting on the augmented system.
  double scale = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) scale = std::max(scale, std::abs(G(i, j)));
  if (scale == 0.0) scale = 1.0;

  for (int col = 0; col < d; ++col) {
    int pivot = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(G(r, col)) > std::abs(G(pivot, col))) pivot = r;
    if (std::abs(G(pivot, col)) < 1e-13 * scale) {
      throw SingularSystem("ridge_oracle: normal matrix is rank deficient");
    }
    if (pivot != col) {
      G.row(pivot).swap(G.row(col));
      B.row(pivot).swap(B.row(col));
    }
    for (int r = col + 1; r < d; ++r) {
      const double f = G(r, col) / G(col, col);
      for (int c = col; c < d; ++c) G(r, c) -= f * G(col, c);
      for (int c = 0; c < m; ++c) B(r, c) -= f * B(col, c);
    }
  }

  // Back substitution.
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(d, m);
  for (int r = d - 1; r >= 0; --r) {
    for (int c = 0; c < m; ++c) {
      double acc = B(r, c);
      for (int k = r + 1; k < d; ++k) acc -= G(r, k) * X(k, c);
      X(r, c) = acc / G(r, r);
    }
  }
  return X;
}

}  // namespace jacrl::oracle

#endif  // JACRL_ORACLE_RIDGE_HPP_
