#include "tucktree/tensor.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace tucktree {

namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_mode(const Shape& shape, Index mode) {
  if (mode < 0 || mode >= shape.order()) {
    throw std::invalid_argument("invalid mode index " + std::to_string(mode) +
                                " for order-" + std::to_string(shape.order()) +
                                " tensor");
  }
}

// Product of extents strictly before / strictly after a mode.
Index outer_extent(const Shape& shape, Index mode) {
  Index n = 1;
  for (Index m = 0; m < mode; ++m) n *= shape.dim(m);
  return n;
}

Index inner_extent(const Shape& shape, Index mode) {
  Index n = 1;
  for (Index m = mode + 1; m < shape.order(); ++m) n *= shape.dim(m);
  return n;
}

}  // namespace

Shape::Shape(std::vector<Index> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("Shape: no dims given");
  Index count = 1;
  for (Index d : dims_) {
    if (d < 1) throw std::invalid_argument("Shape: all dims must be >= 1");
    if (count > std::numeric_limits<Index>::max() / d) {
      throw std::invalid_argument("Shape: element count overflows");
    }
    count *= d;
  }
}

Index Shape::dim(Index mode) const {
  check_mode(*this, mode);
  return dims_[static_cast<std::size_t>(mode)];
}

Index Shape::element_count() const {
  Index count = 1;
  for (Index d : dims_) count *= d;
  return count;
}

Index Shape::flat_index(std::span<const Index> idx) const {
  if (static_cast<Index>(idx.size()) != order()) {
    throw std::invalid_argument("flat_index: wrong multi-index length");
  }
  Index flat = 0;
  for (Index n = 0; n < order(); ++n) {
    Index i = idx[static_cast<std::size_t>(n)];
    if (i < 0 || i >= dims_[static_cast<std::size_t>(n)]) {
      throw std::out_of_range("flat_index: index out of range");
    }
    flat = flat * dims_[static_cast<std::size_t>(n)] + i;
  }
  return flat;
}

DenseTensor::DenseTensor(Shape shape)
    : shape_(std::move(shape)),
      data_(static_cast<std::size_t>(shape_.element_count()), 0.0) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<Index>(data_.size()) != shape_.element_count()) {
    throw std::invalid_argument("DenseTensor: data length does not match shape");
  }
}

std::vector<double> vectorize(const DenseTensor& x) {
  return std::vector<double>(x.data().begin(), x.data().end());
}

Eigen::MatrixXd matricize(const DenseTensor& x, Index mode) {
  check_mode(x.shape(), mode);
  const Index rows = x.dim(mode);
  const Index outer = outer_extent(x.shape(), mode);
  const Index inner = inner_extent(x.shape(), mode);
  Eigen::MatrixXd m(rows, outer * inner);
  const double* src = x.data().data();
  for (Index o = 0; o < outer; ++o) {
    m.middleCols(o * inner, inner) =
        Eigen::Map<const RowMajorMatrix>(src + o * rows * inner, rows, inner);
  }
  return m;
}

DenseTensor from_matricization(const Eigen::MatrixXd& m, Shape shape, Index mode) {
  check_mode(shape, mode);
  const Index rows = shape.dim(mode);
  const Index outer = outer_extent(shape, mode);
  const Index inner = inner_extent(shape, mode);
  if (m.rows() != rows || m.cols() != outer * inner) {
    throw std::invalid_argument("from_matricization: matrix does not match shape");
  }
  DenseTensor out(std::move(shape));
  double* dst = out.data().data();
  for (Index o = 0; o < outer; ++o) {
    Eigen::Map<RowMajorMatrix>(dst + o * rows * inner, rows, inner) =
        m.middleCols(o * inner, inner);
  }
  return out;
}

DenseTensor mode_product(const DenseTensor& x, const Eigen::MatrixXd& u, Index mode) {
  check_mode(x.shape(), mode);
  if (u.cols() != x.dim(mode)) {
    throw std::invalid_argument("mode_product: matrix has " + std::to_string(u.cols()) +
                                " cols but mode extent is " + std::to_string(x.dim(mode)));
  }
  std::vector<Index> dims = x.shape().dims();
  dims[static_cast<std::size_t>(mode)] = u.rows();
  DenseTensor out(Shape(std::move(dims)));

  const Index outer = outer_extent(x.shape(), mode);
  const Index inner = inner_extent(x.shape(), mode);
  const Index rows_in = x.dim(mode);
  const Index rows_out = u.rows();
  const double* src = x.data().data();
  double* dst = out.data().data();
  for (Index o = 0; o < outer; ++o) {
    Eigen::Map<const RowMajorMatrix> in(src + o * rows_in * inner, rows_in, inner);
    Eigen::Map<RowMajorMatrix> res(dst + o * rows_out * inner, rows_out, inner);
    res.noalias() = u * in;
  }
  return out;
}

double squared_norm(const DenseTensor& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data().data(), x.size()).squaredNorm();
}

double frobenius_norm(const DenseTensor& x) { return std::sqrt(squared_norm(x)); }

DenseTensor concat_temporal(std::span<const DenseTensor> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_temporal: no parts");
  const Shape& first = parts[0].shape();
  Index total = 0;
  for (const DenseTensor& part : parts) {
    if (part.order() != first.order()) {
      throw std::invalid_argument("concat_temporal: order mismatch");
    }
    for (Index m = 1; m < first.order(); ++m) {
      if (part.dim(m) != first.dim(m)) {
        throw std::invalid_argument("concat_temporal: non-temporal shape mismatch");
      }
    }
    total += part.dim(0);
  }
  std::vector<Index> dims = first.dims();
  dims[0] = total;
  DenseTensor out(Shape(std::move(dims)));
  double* dst = out.data().data();
  for (const DenseTensor& part : parts) {
    std::copy(part.data().begin(), part.data().end(), dst);
    dst += part.size();
  }
  return out;
}

DenseTensor slice_temporal(const DenseTensor& x, Index begin, Index end) {
  if (begin < 0 || begin >= end || end > x.dim(0)) {
    throw std::invalid_argument("slice_temporal: invalid range");
  }
  const Index inner = inner_extent(x.shape(), 0);
  std::vector<Index> dims = x.shape().dims();
  dims[0] = end - begin;
  std::vector<double> data(x.data().begin() + begin * inner,
                           x.data().begin() + end * inner);
  return DenseTensor(Shape(std::move(dims)), std::move(data));
}

DenseTensor temporal_slice(const DenseTensor& x, Index t) {
  if (x.order() < 2) throw std::invalid_argument("temporal_slice: order must be >= 2");
  if (t < 0 || t >= x.dim(0)) throw std::invalid_argument("temporal_slice: index out of range");
  const Index inner = inner_extent(x.shape(), 0);
  std::vector<Index> dims(x.shape().dims().begin() + 1, x.shape().dims().end());
  std::vector<double> data(x.data().begin() + t * inner,
                           x.data().begin() + (t + 1) * inner);
  return DenseTensor(Shape(std::move(dims)), std::move(data));
}

DenseTensor tensor_from_matrix(const Eigen::MatrixXd& m) {
  DenseTensor out(Shape{m.rows(), m.cols()});
  Eigen::Map<RowMajorMatrix>(out.data().data(), m.rows(), m.cols()) = m;
  return out;
}

Eigen::MatrixXd matrix_from_tensor(const DenseTensor& x) {
  if (x.order() != 2) throw std::invalid_argument("matrix_from_tensor: order must be 2");
  return Eigen::Map<const RowMajorMatrix>(x.data().data(), x.dim(0), x.dim(1));
}

}  // namespace tucktree
