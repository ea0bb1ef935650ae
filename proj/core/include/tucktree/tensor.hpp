#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace tucktree {

using Index = Eigen::Index;

/// Extents of a dense tensor. By convention the first mode is temporal.
class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<Index> dims);
  Shape(std::initializer_list<Index> dims) : Shape(std::vector<Index>(dims)) {}

  Index order() const { return static_cast<Index>(dims_.size()); }
  Index dim(Index mode) const;
  const std::vector<Index>& dims() const { return dims_; }
  Index element_count() const;

  /// Row-major flat position of a multi-index (last index varies fastest).
  Index flat_index(std::span<const Index> idx) const;

  bool operator==(const Shape&) const = default;

 private:
  std::vector<Index> dims_;
};

/// Dense tensor of 64-bit floats in canonical row-major storage.
/// Row-major with the temporal mode first makes vectorization the identity
/// and temporal slicing a contiguous copy.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Shape shape);
  DenseTensor(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  Index order() const { return shape_.order(); }
  Index dim(Index mode) const { return shape_.dim(mode); }
  Index size() const { return static_cast<Index>(data_.size()); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double at(std::span<const Index> idx) const { return data_[shape_.flat_index(idx)]; }
  double& at(std::span<const Index> idx) { return data_[shape_.flat_index(idx)]; }
  double at(std::initializer_list<Index> idx) const {
    return at(std::span<const Index>(idx.begin(), idx.size()));
  }
  double& at(std::initializer_list<Index> idx) {
    return at(std::span<const Index>(idx.begin(), idx.size()));
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Flattens a tensor; entry (i1,...,ip) lands at sum_n i_n * prod_{m>n} D_m.
/// For row-major storage this is a copy of the flat data.
std::vector<double> vectorize(const DenseTensor& x);

/// Mode-n unfolding: row i is the vectorization of the mode-n slice at
/// index i. Shape (D_n, prod_{m != n} D_m); remaining modes keep their
/// original order in the columns, last varying fastest.
Eigen::MatrixXd matricize(const DenseTensor& x, Index mode);

/// Inverse of matricize for a known target shape.
DenseTensor from_matricization(const Eigen::MatrixXd& m, Shape shape, Index mode);

/// Mode-n tensor-matrix product: matricize(result, n) = u * matricize(x, n).
/// Replaces the mode-n extent with u's row count.
DenseTensor mode_product(const DenseTensor& x, const Eigen::MatrixXd& u, Index mode);

double frobenius_norm(const DenseTensor& x);
double squared_norm(const DenseTensor& x);

/// Concatenation along the temporal (first) mode; slice order preserved.
DenseTensor concat_temporal(std::span<const DenseTensor> parts);

/// Contiguous temporal sub-range [begin, end) of a tensor.
DenseTensor slice_temporal(const DenseTensor& x, Index begin, Index end);

/// One temporal slice as a (p-1)-way tensor, the leading mode dropped.
/// Requires order >= 2.
DenseTensor temporal_slice(const DenseTensor& x, Index t);

/// A 2-way tensor from a matrix and back.
DenseTensor tensor_from_matrix(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_tensor(const DenseTensor& x);

}  // namespace tucktree
