#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dcn {

// Dense N-dimensional array of doubles, row-major.
// Images and feature maps use channel-first [C,H,W] order.
class Tensor {
 public:
  Tensor() = default;
  // Filled tensor; throws shape_error on empty shape or a dimension < 1.
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_[axis]; }
  std::size_t size() const { return data_.size(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Rank-checked element access.
  double& at2(std::size_t i, std::size_t j);
  double at2(std::size_t i, std::size_t j) const;
  double& at3(std::size_t c, std::size_t i, std::size_t j);
  double at3(std::size_t c, std::size_t i, std::size_t j) const;

  Tensor reshaped(std::vector<std::size_t> shape) const;
  Tensor flattened() const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool bit_equal(const Tensor& other) const;

  std::string shape_str() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

Tensor matmul(const Tensor& a, const Tensor& b);

// Raw GEMM on row-major buffers: c[m,n] += a[m,k] * b[k,n].
void gemm_accumulate(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n);

// Contiguous sub-window of a [C,H,W] tensor, channels preserved.
Tensor crop(const Tensor& t, std::size_t top, std::size_t left, std::size_t h,
            std::size_t w);

// Width axis reversed per channel of a [C,H,W] tensor.
Tensor mirror_horizontal(const Tensor& t);

enum class ReduceOp { sum, mean, max, argmax };

// Collapses `axis` with the named statistic; argmax ties pick the lowest
// index. Scalar results come back as shape [1].
Tensor reduce(const Tensor& t, ReduceOp op, std::size_t axis);

// Elementwise helpers used by the optimizer and gradient accumulation.
void axpy(double alpha, const Tensor& x, Tensor& y);  // y += alpha * x
void scale(Tensor& t, double alpha);

// Raw tensor binary format: magic "DCNT", u32 version, u64 rank, u64 dims,
// then raw little-endian IEEE doubles.
void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);

}  // namespace dcn
