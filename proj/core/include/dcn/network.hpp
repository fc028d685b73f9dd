#pragma once

#include "dcn/layers.hpp"
#include "dcn/netspec.hpp"

namespace dcn {

// Per-sample cache of everything the backward pass needs.
struct ForwardCache {
  std::vector<Tensor> layer_inputs;         // input to each trunk layer
  std::vector<PoolContext> pool_ctxs;       // by trunk index
  std::vector<DropoutContext> drop_ctxs;    // by trunk index
  Tensor trunk_output;                      // flattened
};

// Gradients aligned one-to-one with ParamStore::entries.
struct GradStore {
  struct Entry {
    Tensor weight;
    Tensor bias;
  };
  std::vector<Entry> entries;

  static GradStore zeros_like(const ParamStore& params);
  void accumulate(const GradStore& other);
};

// Runs the shared trunk. Train mode draws dropout masks from `rng` and
// records contexts into `cache`; eval mode treats dropout as identity.
Tensor forward_trunk(const NetworkSpec& spec, const ParamStore& params,
                     const Tensor& input, Mode mode, Rng* rng,
                     ForwardCache* cache);

// Head logits from a flattened trunk output.
Tensor forward_head(const ParamStore& params, const std::string& head_name,
                    const Tensor& trunk_output);

// Full forward for one sample.
Tensor forward(const NetworkSpec& spec, const ParamStore& params,
               const Tensor& input, const std::string& head_name, Mode mode,
               Rng* rng, ForwardCache* cache);

// Reverse pass from head-logit gradients; adds parameter gradients for the
// trunk and the named head into `grads`.
void backward(const NetworkSpec& spec, const ParamStore& params,
              const std::string& head_name, const ForwardCache& cache,
              const Tensor& grad_logits, GradStore& grads);

}  // namespace dcn
