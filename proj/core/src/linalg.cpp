#include "tucktree/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace tucktree {

namespace {

// Flip column signs so each column's largest-magnitude entry is nonnegative,
// ties broken by lowest row index. rows_to_fix follows q's column flips.
void apply_sign_convention(Eigen::MatrixXd& q, Eigen::MatrixXd* rows_to_fix) {
  for (Index j = 0; j < q.cols(); ++j) {
    Index pivot = 0;
    double best = -1.0;
    for (Index i = 0; i < q.rows(); ++i) {
      const double mag = std::abs(q(i, j));
      if (mag > best) {
        best = mag;
        pivot = i;
      }
    }
    if (q(pivot, j) < 0.0) {
      q.col(j) = -q.col(j);
      if (rows_to_fix != nullptr) rows_to_fix->row(j) = -rows_to_fix->row(j);
    }
  }
}

}  // namespace

QrResult thin_qr(const Eigen::MatrixXd& a) {
  const Index k = std::min(a.rows(), a.cols());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  QrResult out;
  out.q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  apply_sign_convention(out.q, &out.r);
  return out;
}

Eigen::MatrixXd leading_left_singular_vectors(const Eigen::MatrixXd& a, Index rank) {
  if (rank < 1) throw std::invalid_argument("leading_left_singular_vectors: rank must be >= 1");
  const Index k = std::min({rank, a.rows(), a.cols()});
  Eigen::MatrixXd u;
  if (a.rows() > 2 * a.cols()) {
    // Tall case: reduce by QR, take the SVD of the small triangular factor.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd q =
        qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
    const Eigen::MatrixXd r =
        qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeThinU);
    u = q * svd.matrixU().leftCols(k);
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    u = svd.matrixU().leftCols(k);
  }
  apply_sign_convention(u, nullptr);
  return u;
}

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double max_orthonormality_defect(const Eigen::MatrixXd& u) {
  const Eigen::MatrixXd gram = u.transpose() * u;
  return (gram - Eigen::MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd random_orthonormal(Index rows, Index cols, std::mt19937_64& rng) {
  if (rows < cols) throw std::invalid_argument("random_orthonormal: rows < cols");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) g(i, j) = normal(rng);
  }
  return thin_qr(g).q;
}

}  // namespace tucktree
