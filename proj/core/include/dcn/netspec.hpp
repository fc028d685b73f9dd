#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcn/tensor.hpp"

namespace dcn {

enum class LayerKind { conv, maxpool, relu, fc, dropout };

std::string to_string(LayerKind k);
LayerKind layer_kind_from_string(const std::string& s);

// One trunk layer description; only the fields of its kind are meaningful.
struct LayerSpec {
  LayerKind kind;
  // conv
  std::size_t kernels = 0;
  std::size_t kernel_width = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  // maxpool
  std::size_t pool_size = 0;
  std::size_t pool_stride = 0;
  // fc
  std::size_t width = 0;
  // dropout
  double rate = 0.0;

  static LayerSpec Conv(std::size_t kernels, std::size_t kernel_width,
                        std::size_t stride, std::size_t padding);
  static LayerSpec MaxPool(std::size_t size = 2, std::size_t stride = 2);
  static LayerSpec Relu();
  static LayerSpec Fc(std::size_t width);
  static LayerSpec Dropout(double rate = 0.5);
};

enum class LabelMode { single, multi };

struct HeadSpec {
  std::string name;
  std::size_t class_count = 0;
  LabelMode label_mode = LabelMode::single;
};

// Full declarative architecture: shared trunk plus one or more heads, each
// head a plain FC layer attached after the last trunk layer.
struct NetworkSpec {
  std::size_t input_resolution = 0;  // 32/64/128/256
  std::size_t crop_resolution = 0;   // 28/56/116/227
  std::size_t input_channels = 3;
  std::vector<LayerSpec> trunk;
  std::vector<HeadSpec> heads;

  const HeadSpec& head(const std::string& name) const;
  bool has_head(const std::string& name) const;
};

// Crop size paired with each supported input resolution.
std::size_t crop_for_resolution(std::size_t resolution);

// Builds one of the eight supported (depth, resolution) architectures.
// Depths 4 and 5 exist only at resolution 256. fc1_width defaults to the
// standard 4096; smaller values are for reduced-scale experiments.
NetworkSpec build_architecture(std::size_t depth, std::size_t resolution,
                               std::vector<HeadSpec> heads,
                               std::size_t fc2_width,
                               std::size_t fc1_width = 4096);

// Output shape after every trunk layer (head shapes excluded). Throws
// config_error naming the first layer whose output would collapse.
std::vector<std::vector<std::size_t>> infer_shapes(const NetworkSpec& spec);

// Learnable tensors for one layer (conv or fc), with momentum buffers.
struct ParamEntry {
  std::string name;
  LayerKind kind = LayerKind::fc;
  std::size_t trunk_index = 0;  // index into spec.trunk; unused for heads
  bool is_head = false;
  Tensor weight;      // conv: [K,C,N,N]; fc: [out,in]
  Tensor bias;        // [K] or [out]
  Tensor vel_weight;  // same shape, init 0
  Tensor vel_bias;
  bool frozen = false;
};

struct ParamStore {
  std::vector<ParamEntry> entries;  // trunk layers in order, then heads

  ParamEntry& by_name(const std::string& name);
  const ParamEntry& by_name(const std::string& name) const;
  std::size_t head_index(const std::string& head_name) const;
};

// Gaussian(0, scale) weights, zero biases and velocities, nothing frozen.
ParamStore init_params(const NetworkSpec& spec, std::uint64_t seed,
                       double scale = 0.01);

std::size_t parameter_count(const ParamStore& params);

void save_checkpoint(const NetworkSpec& spec, const ParamStore& params,
                     const std::string& path);
struct Checkpoint {
  NetworkSpec spec;
  ParamStore params;
};
Checkpoint load_checkpoint(const std::string& path);

// JSON (de)serialization of specs, shared by checkpoints and run configs.
std::string spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const std::string& json_text);

}  // namespace dcn
