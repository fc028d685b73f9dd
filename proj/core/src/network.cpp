#include "dcn/network.hpp"

#include <unordered_map>

#include "dcn/errors.hpp"

namespace dcn {

GradStore GradStore::zeros_like(const ParamStore& params) {
  GradStore g;
  g.entries.reserve(params.entries.size());
  for (const auto& e : params.entries)
    g.entries.push_back({Tensor(e.weight.shape(), 0.0),
                         Tensor(e.bias.shape(), 0.0)});
  return g;
}

void GradStore::accumulate(const GradStore& other) {
  if (entries.size() != other.entries.size())
    throw shape_error("gradient store size mismatch");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    axpy(1.0, other.entries[i].weight, entries[i].weight);
    axpy(1.0, other.entries[i].bias, entries[i].bias);
  }
}

namespace {

// entry index per trunk layer index, SIZE_MAX for parameterless layers
std::vector<std::size_t> trunk_entry_map(const NetworkSpec& spec,
                                         const ParamStore& params) {
  std::vector<std::size_t> map(spec.trunk.size(), SIZE_MAX);
  for (std::size_t i = 0; i < params.entries.size(); ++i)
    if (!params.entries[i].is_head)
      map[params.entries[i].trunk_index] = i;
  return map;
}

}  // namespace

Tensor forward_trunk(const NetworkSpec& spec, const ParamStore& params,
                     const Tensor& input, Mode mode, Rng* rng,
                     ForwardCache* cache) {
  if (input.rank() != 3 || input.dim(0) != spec.input_channels ||
      input.dim(1) != spec.crop_resolution ||
      input.dim(2) != spec.crop_resolution)
    throw shape_error("trunk input must be [" +
                      std::to_string(spec.input_channels) + "," +
                      std::to_string(spec.crop_resolution) + "," +
                      std::to_string(spec.crop_resolution) + "], got " +
                      input.shape_str());
  const auto emap = trunk_entry_map(spec, params);
  if (cache) {
    cache->layer_inputs.assign(spec.trunk.size(), Tensor());
    cache->pool_ctxs.assign(spec.trunk.size(), PoolContext{});
    cache->drop_ctxs.assign(spec.trunk.size(), DropoutContext{});
  }

  Tensor x = input;
  for (std::size_t li = 0; li < spec.trunk.size(); ++li) {
    const LayerSpec& l = spec.trunk[li];
    switch (l.kind) {
      case LayerKind::conv: {
        const ParamEntry& e = params.entries[emap[li]];
        if (cache) cache->layer_inputs[li] = x;
        ConvParams p{e.weight, e.bias, l.stride, l.padding};
        x = conv2d_forward(x, p);
        break;
      }
      case LayerKind::maxpool: {
        auto [out, ctx] = maxpool_forward(x, l.pool_size, l.pool_stride);
        if (cache) cache->pool_ctxs[li] = std::move(ctx);
        x = std::move(out);
        break;
      }
      case LayerKind::relu: {
        if (cache) cache->layer_inputs[li] = x;
        x = relu(x);
        break;
      }
      case LayerKind::fc: {
        const ParamEntry& e = params.entries[emap[li]];
        Tensor flat = x.rank() == 1 ? std::move(x) : x.flattened();
        if (cache) cache->layer_inputs[li] = flat;
        x = fc_forward(flat, FcParams{e.weight, e.bias});
        break;
      }
      case LayerKind::dropout: {
        if (mode == Mode::train && l.rate > 0.0) {
          if (!rng)
            throw parameter_error("train-mode dropout needs an rng");
          auto [out, ctx] = dropout(x, l.rate, Mode::train, *rng);
          if (cache) cache->drop_ctxs[li] = std::move(ctx);
          x = std::move(out);
        }
        break;
      }
    }
  }
  Tensor flat = x.rank() == 1 ? std::move(x) : x.flattened();
  if (cache) cache->trunk_output = flat;
  return flat;
}

Tensor forward_head(const ParamStore& params, const std::string& head_name,
                    const Tensor& trunk_output) {
  const ParamEntry& h = params.entries[params.head_index(head_name)];
  return fc_forward(trunk_output, FcParams{h.weight, h.bias});
}

Tensor forward(const NetworkSpec& spec, const ParamStore& params,
               const Tensor& input, const std::string& head_name, Mode mode,
               Rng* rng, ForwardCache* cache) {
  return forward_head(params, head_name,
                      forward_trunk(spec, params, input, mode, rng, cache));
}

void backward(const NetworkSpec& spec, const ParamStore& params,
              const std::string& head_name, const ForwardCache& cache,
              const Tensor& grad_logits, GradStore& grads) {
  if (grads.entries.size() != params.entries.size())
    throw shape_error("gradient store not aligned with parameters");
  const auto emap = trunk_entry_map(spec, params);

  // head
  const std::size_t hi = params.head_index(head_name);
  const ParamEntry& h = params.entries[hi];
  FcGrads hg = fc_backward(cache.trunk_output, FcParams{h.weight, h.bias},
                           grad_logits);
  axpy(1.0, hg.weight, grads.entries[hi].weight);
  axpy(1.0, hg.bias, grads.entries[hi].bias);

  Tensor g = std::move(hg.input);
  for (std::size_t li = spec.trunk.size(); li-- > 0;) {
    const LayerSpec& l = spec.trunk[li];
    switch (l.kind) {
      case LayerKind::conv: {
        const ParamEntry& e = params.entries[emap[li]];
        if (g.rank() == 1)
          g = g.reshaped(infer_shapes(spec)[li]);
        ConvParams p{e.weight, e.bias, l.stride, l.padding};
        ConvGrads cg = conv2d_backward(cache.layer_inputs[li], p, g);
        axpy(1.0, cg.kernels, grads.entries[emap[li]].weight);
        axpy(1.0, cg.bias, grads.entries[emap[li]].bias);
        g = std::move(cg.input);
        break;
      }
      case LayerKind::maxpool: {
        if (g.rank() == 1) g = g.reshaped(cache.pool_ctxs[li].output_shape);
        g = maxpool_backward(cache.pool_ctxs[li], g);
        break;
      }
      case LayerKind::relu: {
        if (!g.same_shape(cache.layer_inputs[li]))
          g = g.reshaped(cache.layer_inputs[li].shape());
        g = relu_backward(cache.layer_inputs[li], g);
        break;
      }
      case LayerKind::fc: {
        const ParamEntry& e = params.entries[emap[li]];
        FcGrads fg = fc_backward(cache.layer_inputs[li],
                                 FcParams{e.weight, e.bias}, g);
        axpy(1.0, fg.weight, grads.entries[emap[li]].weight);
        axpy(1.0, fg.bias, grads.entries[emap[li]].bias);
        g = std::move(fg.input);
        break;
      }
      case LayerKind::dropout: {
        g = dropout_backward(cache.drop_ctxs[li], g);
        break;
      }
    }
  }
}

}  // namespace dcn
