#include "dcn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "dcn/errors.hpp"

namespace dcn {

namespace {

struct ConvDims {
  std::size_t C, H, W, K, N, stride, pad, OH, OW;
};

ConvDims conv_dims(const std::vector<std::size_t>& input_shape,
                   const ConvParams& p) {
  if (input_shape.size() != 3)
    throw shape_error("conv2d expects a [C,H,W] input");
  if (p.kernels.rank() != 4) throw shape_error("conv kernels must be rank 4");
  if (p.kernels.dim(2) != p.kernels.dim(3))
    throw shape_error("conv kernels must be square");
  if (p.stride < 1) throw shape_error("conv stride must be >= 1");
  ConvDims d{};
  d.C = input_shape[0];
  d.H = input_shape[1];
  d.W = input_shape[2];
  d.K = p.kernels.dim(0);
  d.N = p.kernels.dim(2);
  d.stride = p.stride;
  d.pad = p.padding;
  if (p.kernels.dim(1) != d.C)
    throw shape_error("conv input channels disagree with kernel channels");
  if (p.bias.rank() != 1 || p.bias.dim(0) != d.K)
    throw shape_error("conv bias must be [K]");
  if (d.N > d.H + 2 * d.pad || d.N > d.W + 2 * d.pad)
    throw shape_error("conv kernel larger than padded input");
  d.OH = (d.H + 2 * d.pad - d.N) / d.stride + 1;
  d.OW = (d.W + 2 * d.pad - d.N) / d.stride + 1;
  return d;
}

// Unfolds the padded input into [C*N*N, OH*OW]; zeros outside bounds.
std::vector<double> im2col(const Tensor& input, const ConvDims& d) {
  const std::size_t L = d.OH * d.OW;
  std::vector<double> cols(d.C * d.N * d.N * L, 0.0);
  const double* in = input.data();
  for (std::size_t c = 0; c < d.C; ++c) {
    for (std::size_t r = 0; r < d.N; ++r) {
      for (std::size_t s = 0; s < d.N; ++s) {
        double* row = cols.data() + ((c * d.N + r) * d.N + s) * L;
        for (std::size_t oi = 0; oi < d.OH; ++oi) {
          const std::ptrdiff_t ii =
              static_cast<std::ptrdiff_t>(oi * d.stride + r) -
              static_cast<std::ptrdiff_t>(d.pad);
          if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(d.H)) continue;
          const double* in_row = in + (c * d.H + ii) * d.W;
          double* out_row = row + oi * d.OW;
          for (std::size_t oj = 0; oj < d.OW; ++oj) {
            const std::ptrdiff_t jj =
                static_cast<std::ptrdiff_t>(oj * d.stride + s) -
                static_cast<std::ptrdiff_t>(d.pad);
            if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(d.W)) continue;
            out_row[oj] = in_row[jj];
          }
        }
      }
    }
  }
  return cols;
}

// Scatter-add of [C*N*N, OH*OW] columns back onto the input plane.
void col2im_accumulate(const std::vector<double>& cols, const ConvDims& d,
                       Tensor& grad_input) {
  const std::size_t L = d.OH * d.OW;
  double* out = grad_input.data();
  for (std::size_t c = 0; c < d.C; ++c) {
    for (std::size_t r = 0; r < d.N; ++r) {
      for (std::size_t s = 0; s < d.N; ++s) {
        const double* row = cols.data() + ((c * d.N + r) * d.N + s) * L;
        for (std::size_t oi = 0; oi < d.OH; ++oi) {
          const std::ptrdiff_t ii =
              static_cast<std::ptrdiff_t>(oi * d.stride + r) -
              static_cast<std::ptrdiff_t>(d.pad);
          if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(d.H)) continue;
          double* out_row = out + (c * d.H + ii) * d.W;
          const double* in_row = row + oi * d.OW;
          for (std::size_t oj = 0; oj < d.OW; ++oj) {
            const std::ptrdiff_t jj =
                static_cast<std::ptrdiff_t>(oj * d.stride + s) -
                static_cast<std::ptrdiff_t>(d.pad);
            if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(d.W)) continue;
            out_row[jj] += in_row[oj];
          }
        }
      }
    }
  }
}

// c[m,n] += a[m,l] * b[n,l]   (B transposed)
void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t l, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * l;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * l;
      double acc = 0.0;
      for (std::size_t p = 0; p < l; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// c[m,n] += a[k,m] * b[k,n]   (A transposed)
void gemm_tn(const double* a, const double* b, double* c, std::size_t k,
             std::size_t m, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const ConvParams& p) {
  const ConvDims d = conv_dims(input.shape(), p);
  const std::size_t L = d.OH * d.OW;
  const std::size_t M = d.C * d.N * d.N;
  const std::vector<double> cols = im2col(input, d);
  Tensor out({d.K, d.OH, d.OW});
  double* o = out.data();
  for (std::size_t k = 0; k < d.K; ++k)
    std::fill(o + k * L, o + (k + 1) * L, p.bias[k]);
  gemm_accumulate(p.kernels.data(), cols.data(), o, d.K, M, L);
  return out;
}

Tensor conv2d_as_dense(const std::vector<std::size_t>& input_shape,
                       const ConvParams& p) {
  const ConvDims d = conv_dims(input_shape, p);
  Tensor mat({d.K * d.OH * d.OW, d.C * d.H * d.W}, 0.0);
  for (std::size_t k = 0; k < d.K; ++k) {
    for (std::size_t oi = 0; oi < d.OH; ++oi) {
      for (std::size_t oj = 0; oj < d.OW; ++oj) {
        const std::size_t row = (k * d.OH + oi) * d.OW + oj;
        for (std::size_t c = 0; c < d.C; ++c) {
          for (std::size_t r = 0; r < d.N; ++r) {
            const std::ptrdiff_t ii =
                static_cast<std::ptrdiff_t>(oi * d.stride + r) -
                static_cast<std::ptrdiff_t>(d.pad);
            if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(d.H)) continue;
            for (std::size_t s = 0; s < d.N; ++s) {
              const std::ptrdiff_t jj =
                  static_cast<std::ptrdiff_t>(oj * d.stride + s) -
                  static_cast<std::ptrdiff_t>(d.pad);
              if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(d.W)) continue;
              const std::size_t col = (c * d.H + ii) * d.W + jj;
              mat.at2(row, col) =
                  p.kernels[((k * d.C + c) * d.N + r) * d.N + s];
            }
          }
        }
      }
    }
  }
  return mat;
}

ConvGrads conv2d_backward(const Tensor& input, const ConvParams& p,
                          const Tensor& grad_output) {
  const ConvDims d = conv_dims(input.shape(), p);
  if (grad_output.shape() != std::vector<std::size_t>{d.K, d.OH, d.OW})
    throw shape_error("conv grad_output shape mismatch");
  const std::size_t L = d.OH * d.OW;
  const std::size_t M = d.C * d.N * d.N;
  const std::vector<double> cols = im2col(input, d);

  ConvGrads g;
  g.kernels = Tensor(p.kernels.shape(), 0.0);
  gemm_nt(grad_output.data(), cols.data(), g.kernels.data(), d.K, L, M);

  g.bias = Tensor({d.K}, 0.0);
  for (std::size_t k = 0; k < d.K; ++k) {
    double acc = 0.0;
    const double* go = grad_output.data() + k * L;
    for (std::size_t i = 0; i < L; ++i) acc += go[i];
    g.bias[k] = acc;
  }

  std::vector<double> grad_cols(M * L, 0.0);
  gemm_tn(p.kernels.data(), grad_output.data(), grad_cols.data(), d.K, M, L);
  g.input = Tensor(input.shape(), 0.0);
  col2im_accumulate(grad_cols, d, g.input);
  return g;
}

std::pair<Tensor, PoolContext> maxpool_forward(const Tensor& input,
                                               std::size_t size,
                                               std::size_t stride) {
  if (input.rank() != 3) throw shape_error("maxpool expects a [K,H,W] input");
  const std::size_t K = input.dim(0), H = input.dim(1), W = input.dim(2);
  if (size < 1 || size > H || size > W)
    throw shape_error("pool window larger than input");
  if (stride < 1) throw shape_error("pool stride must be >= 1");
  const std::size_t OH = (H - size) / stride + 1;
  const std::size_t OW = (W - size) / stride + 1;
  Tensor out({K, OH, OW});
  PoolContext ctx;
  ctx.input_shape = input.shape();
  ctx.output_shape = out.shape();
  ctx.argmax.resize(K * OH * OW);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t oi = 0; oi < OH; ++oi) {
      for (std::size_t oj = 0; oj < OW; ++oj) {
        std::size_t best_idx = (k * H + oi * stride) * W + oj * stride;
        double best = input[best_idx];
        for (std::size_t r = 0; r < size; ++r) {
          for (std::size_t s = 0; s < size; ++s) {
            const std::size_t idx =
                (k * H + oi * stride + r) * W + oj * stride + s;
            if (input[idx] > best) {
              best = input[idx];
              best_idx = idx;
            }
          }
        }
        const std::size_t o = (k * OH + oi) * OW + oj;
        out[o] = best;
        ctx.argmax[o] = best_idx;
      }
    }
  }
  return {std::move(out), std::move(ctx)};
}

Tensor maxpool_backward(const PoolContext& ctx, const Tensor& grad_output) {
  if (grad_output.shape() != ctx.output_shape)
    throw shape_error("maxpool grad_output does not match context");
  Tensor grad_input(ctx.input_shape, 0.0);
  for (std::size_t o = 0; o < ctx.argmax.size(); ++o)
    grad_input[ctx.argmax[o]] += grad_output[o];
  return grad_input;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.values())
    if (v < 0.0) v = 0.0;
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_output) {
  if (!input.same_shape(grad_output))
    throw shape_error("relu grad shape mismatch");
  Tensor grad = grad_output;
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (input[i] <= 0.0) grad[i] = 0.0;
  return grad;
}

Tensor fc_forward(const Tensor& input, const FcParams& p) {
  if (p.weight.rank() != 2) throw shape_error("fc weight must be [out,in]");
  const std::size_t out_n = p.weight.dim(0), in_n = p.weight.dim(1);
  if (input.size() != in_n)
    throw shape_error("fc input length " + std::to_string(input.size()) +
                      " != " + std::to_string(in_n));
  Tensor out({out_n});
  const double* w = p.weight.data();
  const double* x = input.data();
  for (std::size_t i = 0; i < out_n; ++i) {
    double acc = p.bias[i];
    const double* wrow = w + i * in_n;
    for (std::size_t j = 0; j < in_n; ++j) acc += wrow[j] * x[j];
    out[i] = acc;
  }
  return out;
}

FcGrads fc_backward(const Tensor& input, const FcParams& p,
                    const Tensor& grad_output) {
  const std::size_t out_n = p.weight.dim(0), in_n = p.weight.dim(1);
  if (input.size() != in_n || grad_output.size() != out_n)
    throw shape_error("fc backward shape mismatch");
  FcGrads g;
  g.weight = Tensor({out_n, in_n}, 0.0);
  g.bias = grad_output.reshaped({out_n});
  g.input = Tensor({in_n}, 0.0);
  const double* x = input.data();
  const double* w = p.weight.data();
  double* gi = g.input.data();
  for (std::size_t i = 0; i < out_n; ++i) {
    const double go = grad_output[i];
    double* gw = g.weight.data() + i * in_n;
    const double* wrow = w + i * in_n;
    for (std::size_t j = 0; j < in_n; ++j) {
      gw[j] = go * x[j];
      gi[j] += go * wrow[j];
    }
  }
  return g;
}

std::pair<Tensor, DropoutContext> dropout(const Tensor& input, double rate,
                                          Mode mode, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw parameter_error("dropout rate must be in [0,1)");
  if (mode == Mode::eval || rate == 0.0) return {input, DropoutContext{}};
  const double keep_scale = 1.0 / (1.0 - rate);
  DropoutContext ctx;
  ctx.mask = Tensor(input.shape(), 0.0);
  Tensor out(input.shape(), 0.0);
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (!rng.bernoulli(rate)) {
      ctx.mask[i] = keep_scale;
      out[i] = input[i] * keep_scale;
    }
  }
  return {std::move(out), std::move(ctx)};
}

Tensor dropout_backward(const DropoutContext& ctx, const Tensor& grad_output) {
  if (ctx.mask.size() == 0) return grad_output;  // eval / rate-0 identity
  if (!ctx.mask.same_shape(grad_output))
    throw shape_error("dropout grad shape mismatch");
  Tensor grad = grad_output;
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= ctx.mask[i];
  return grad;
}

Tensor softmax(const Tensor& logits) {
  Tensor out = logits;
  double mx = out[0];
  for (double v : out.values()) mx = std::max(mx, v);
  double sum = 0.0;
  for (double& v : out.values()) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out.values()) v /= sum;
  return out;
}

Tensor sigmoid(const Tensor& logits) {
  Tensor out = logits;
  for (double& v : out.values()) v = 1.0 / (1.0 + std::exp(-v));
  return out;
}

LossResult softmax_xent(const Tensor& logits, std::size_t label) {
  const std::size_t n = logits.size();
  if (n < 2) throw parameter_error("softmax head needs >= 2 classes");
  if (label >= n) throw parameter_error("label out of range");
  Tensor probs = softmax(logits);
  LossResult r;
  r.loss = -std::log(std::max(probs[label], 1e-300));
  r.grad_logits = std::move(probs);
  r.grad_logits[label] -= 1.0;
  return r;
}

LossResult sigmoid_bce(const Tensor& logits, const Tensor& targets) {
  if (logits.size() != targets.size())
    throw shape_error("sigmoid_bce length mismatch");
  const std::size_t n = logits.size();
  for (double t : targets.values())
    if (t != 0.0 && t != 1.0)
      throw parameter_error("sigmoid_bce targets must be 0 or 1");
  LossResult r;
  r.grad_logits = Tensor({n}, 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = logits[i], t = targets[i];
    // max(z,0) - z*t + log(1 + exp(-|z|)) is the stable BCE form.
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
    const double s = 1.0 / (1.0 + std::exp(-z));
    r.grad_logits[i] = (s - t) / static_cast<double>(n);
  }
  r.loss = loss / static_cast<double>(n);
  return r;
}

}  // namespace dcn
