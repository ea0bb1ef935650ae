#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

#include "tucktree/tensor.hpp"

namespace tucktree {

struct QrResult {
  Eigen::MatrixXd q;  // m x min(m,k), orthonormal columns
  Eigen::MatrixXd r;  // min(m,k) x k, upper triangular
};

/// Thin QR with a deterministic sign convention: each column of q is scaled
/// so its largest-magnitude entry is nonnegative (ties broken by lowest row
/// index); r is adjusted to match. Rank-deficient input is allowed.
QrResult thin_qr(const Eigen::MatrixXd& a);

/// The min(rank, m, k) leading left singular vectors of a, with the same
/// sign convention as thin_qr.
Eigen::MatrixXd leading_left_singular_vectors(const Eigen::MatrixXd& a, Index rank);

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// max |(u^T u - I)_{ij}|
double max_orthonormality_defect(const Eigen::MatrixXd& u);

/// Deterministic Gaussian matrix orthonormalized by thin QR. Requires
/// rows >= cols.
Eigen::MatrixXd random_orthonormal(Index rows, Index cols, std::mt19937_64& rng);

}  // namespace tucktree
