#include "dcn/tensor.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "dcn/errors.hpp"

namespace dcn {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw shape_error("tensor shape must be non-empty");
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d < 1) throw shape_error("tensor dimensions must be >= 1");
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(checked_product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_product(shape_) != data_.size())
    throw shape_error("tensor data length does not match shape");
}

double& Tensor::at2(std::size_t i, std::size_t j) {
  return data_[i * shape_[1] + j];
}
double Tensor::at2(std::size_t i, std::size_t j) const {
  return data_[i * shape_[1] + j];
}
double& Tensor::at3(std::size_t c, std::size_t i, std::size_t j) {
  return data_[(c * shape_[1] + i) * shape_[2] + j];
}
double Tensor::at3(std::size_t c, std::size_t i, std::size_t j) const {
  return data_[(c * shape_[1] + i) * shape_[2] + j];
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  if (checked_product(shape) != data_.size())
    throw shape_error("reshape changes element count");
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::flattened() const { return reshaped({data_.size()}); }

bool Tensor::bit_equal(const Tensor& other) const {
  return shape_ == other.shape_ &&
         std::memcmp(data_.data(), other.data_.data(),
                     data_.size() * sizeof(double)) == 0;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

void gemm_accumulate(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n) {
  // i-k-j order keeps the inner loop contiguous over b and c.
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw shape_error("matmul requires rank-2 tensors");
  if (a.dim(1) != b.dim(0))
    throw shape_error("matmul inner dimensions disagree: " + a.shape_str() +
                      " vs " + b.shape_str());
  Tensor c({a.dim(0), b.dim(1)}, 0.0);
  gemm_accumulate(a.data(), b.data(), c.data(), a.dim(0), a.dim(1), b.dim(1));
  return c;
}

Tensor crop(const Tensor& t, std::size_t top, std::size_t left, std::size_t h,
            std::size_t w) {
  if (t.rank() != 3) throw shape_error("crop requires a [C,H,W] tensor");
  const std::size_t C = t.dim(0), H = t.dim(1), W = t.dim(2);
  if (h < 1 || w < 1 || top + h > H || left + w > W)
    throw std::out_of_range("crop window outside tensor bounds");
  Tensor out({C, h, w});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j)
        out.at3(c, i, j) = t.at3(c, top + i, left + j);
  return out;
}

Tensor mirror_horizontal(const Tensor& t) {
  if (t.rank() != 3)
    throw shape_error("mirror_horizontal requires a [C,H,W] tensor");
  const std::size_t C = t.dim(0), H = t.dim(1), W = t.dim(2);
  Tensor out({C, H, W});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < W; ++j)
        out.at3(c, i, j) = t.at3(c, i, W - 1 - j);
  return out;
}

Tensor reduce(const Tensor& t, ReduceOp op, std::size_t axis) {
  if (axis >= t.rank()) throw shape_error("reduce axis out of range");
  const auto& shape = t.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t len = shape[axis];

  std::vector<std::size_t> out_shape;
  for (std::size_t i = 0; i < shape.size(); ++i)
    if (i != axis) out_shape.push_back(shape[i]);
  if (out_shape.empty()) out_shape.push_back(1);
  Tensor out(out_shape, 0.0);

  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      double acc = 0.0;
      std::size_t best = 0;
      double best_val = t[(o * len) * inner + in];
      for (std::size_t a = 0; a < len; ++a) {
        const double v = t[(o * len + a) * inner + in];
        acc += v;
        if (v > best_val) {
          best_val = v;
          best = a;
        }
      }
      double r = 0.0;
      switch (op) {
        case ReduceOp::sum: r = acc; break;
        case ReduceOp::mean: r = acc / static_cast<double>(len); break;
        case ReduceOp::max: r = best_val; break;
        case ReduceOp::argmax: r = static_cast<double>(best); break;
      }
      out[o * inner + in] = r;
    }
  }
  return out;
}

void axpy(double alpha, const Tensor& x, Tensor& y) {
  if (!x.same_shape(y)) throw shape_error("axpy shape mismatch");
  const double* xs = x.data();
  double* ys = y.data();
  for (std::size_t i = 0; i < y.size(); ++i) ys[i] += alpha * xs[i];
}

void scale(Tensor& t, double alpha) {
  for (double& v : t.values()) v *= alpha;
}

namespace {
constexpr char kMagic[4] = {'D', 'C', 'N', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw format_error("truncated tensor stream");
  return v;
}
}  // namespace

void write_tensor(std::ostream& os, const Tensor& t) {
  os.write(kMagic, 4);
  write_pod(os, kVersion);
  write_pod<std::uint64_t>(os, t.rank());
  for (std::size_t d : t.shape()) write_pod<std::uint64_t>(os, d);
  os.write(reinterpret_cast<const char*>(t.data()),
           static_cast<std::streamsize>(t.size() * sizeof(double)));
}

Tensor read_tensor(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw format_error("bad tensor magic");
  if (read_pod<std::uint32_t>(is) != kVersion)
    throw format_error("unsupported tensor format version");
  const auto rank = read_pod<std::uint64_t>(is);
  if (rank == 0 || rank > 8) throw format_error("implausible tensor rank");
  std::vector<std::size_t> shape(rank);
  std::size_t n = 1;
  for (auto& d : shape) {
    d = read_pod<std::uint64_t>(is);
    if (d < 1) throw format_error("non-positive tensor dimension");
    n *= d;
  }
  std::vector<double> data(n);
  is.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw format_error("truncated tensor payload");
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace dcn
