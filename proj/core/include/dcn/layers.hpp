#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "dcn/rng.hpp"
#include "dcn/tensor.hpp"

namespace dcn {

enum class Mode { train, eval };

// Convolution layer parameters. Kernels are [K, C, N_W, N_W] (square only).
struct ConvParams {
  Tensor kernels;
  Tensor bias;  // [K]
  std::size_t stride = 1;
  std::size_t padding = 0;
};

struct FcParams {
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]
};

// Cached argmax positions from a max-pool forward pass.
struct PoolContext {
  std::vector<std::size_t> input_shape;   // [K,H,W]
  std::vector<std::size_t> output_shape;  // [K,H'',W'']
  std::vector<std::size_t> argmax;        // flat input index per output
};

// Cached inverted-dropout mask (already scaled by 1/(1-rate)).
struct DropoutContext {
  Tensor mask;
};

// Output side: floor((H + 2*pad - N_W)/stride) + 1. No activation applied.
Tensor conv2d_forward(const Tensor& input, const ConvParams& p);

// The convolution realized as an explicit dense matrix over the flattened
// input: every entry is either a kernel value (tied weight) or zero (local
// response). Bias is not folded in; the dense path is matrix * flatten(input)
// + bias broadcast per output channel.
Tensor conv2d_as_dense(const std::vector<std::size_t>& input_shape,
                       const ConvParams& p);

struct ConvGrads {
  Tensor input;
  Tensor kernels;
  Tensor bias;
};
ConvGrads conv2d_backward(const Tensor& input, const ConvParams& p,
                          const Tensor& grad_output);

std::pair<Tensor, PoolContext> maxpool_forward(const Tensor& input,
                                               std::size_t size,
                                               std::size_t stride);
Tensor maxpool_backward(const PoolContext& ctx, const Tensor& grad_output);

Tensor relu(const Tensor& input);
Tensor relu_backward(const Tensor& input, const Tensor& grad_output);

Tensor fc_forward(const Tensor& input, const FcParams& p);
struct FcGrads {
  Tensor input;
  Tensor weight;
  Tensor bias;
};
FcGrads fc_backward(const Tensor& input, const FcParams& p,
                    const Tensor& grad_output);

// Inverted dropout: train mode zeroes with probability `rate` and scales
// survivors by 1/(1-rate); eval mode is the identity (empty mask).
std::pair<Tensor, DropoutContext> dropout(const Tensor& input, double rate,
                                          Mode mode, Rng& rng);
Tensor dropout_backward(const DropoutContext& ctx, const Tensor& grad_output);

struct LossResult {
  double loss = 0.0;
  Tensor grad_logits;
};

// Single-label head: -log softmax(logits)[label], stabilized by max
// subtraction. Gradient is softmax - onehot.
LossResult softmax_xent(const Tensor& logits, std::size_t label);

// Multi-label head: mean over classes of binary cross-entropy on
// sigmoid(logit); targets must be 0/1.
LossResult sigmoid_bce(const Tensor& logits, const Tensor& targets);

Tensor softmax(const Tensor& logits);
Tensor sigmoid(const Tensor& logits);

}  // namespace dcn
