#include "dcn/netspec.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dcn/errors.hpp"
#include "dcn/rng.hpp"

namespace dcn {

using nlohmann::json;

std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::relu: return "relu";
    case LayerKind::fc: return "fc";
    case LayerKind::dropout: return "dropout";
  }
  return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "conv") return LayerKind::conv;
  if (s == "maxpool") return LayerKind::maxpool;
  if (s == "relu") return LayerKind::relu;
  if (s == "fc") return LayerKind::fc;
  if (s == "dropout") return LayerKind::dropout;
  throw format_error("unknown layer kind: " + s);
}

LayerSpec LayerSpec::Conv(std::size_t kernels, std::size_t kernel_width,
                          std::size_t stride, std::size_t padding) {
  LayerSpec l;
  l.kind = LayerKind::conv;
  l.kernels = kernels;
  l.kernel_width = kernel_width;
  l.stride = stride;
  l.padding = padding;
  return l;
}
LayerSpec LayerSpec::MaxPool(std::size_t size, std::size_t stride) {
  LayerSpec l;
  l.kind = LayerKind::maxpool;
  l.pool_size = size;
  l.pool_stride = stride;
  return l;
}
LayerSpec LayerSpec::Relu() {
  LayerSpec l;
  l.kind = LayerKind::relu;
  return l;
}
LayerSpec LayerSpec::Fc(std::size_t width) {
  LayerSpec l;
  l.kind = LayerKind::fc;
  l.width = width;
  return l;
}
LayerSpec LayerSpec::Dropout(double rate) {
  LayerSpec l;
  l.kind = LayerKind::dropout;
  l.rate = rate;
  return l;
}

const HeadSpec& NetworkSpec::head(const std::string& name) const {
  for (const auto& h : heads)
    if (h.name == name) return h;
  throw config_error("unknown head: " + name);
}

bool NetworkSpec::has_head(const std::string& name) const {
  for (const auto& h : heads)
    if (h.name == name) return true;
  return false;
}

std::size_t crop_for_resolution(std::size_t resolution) {
  switch (resolution) {
    case 256: return 227;
    case 128: return 116;
    case 64: return 56;
    case 32: return 28;
  }
  throw config_error("unsupported input resolution: " +
                     std::to_string(resolution));
}

NetworkSpec build_architecture(std::size_t depth, std::size_t resolution,
                               std::vector<HeadSpec> heads,
                               std::size_t fc2_width, std::size_t fc1_width) {
  NetworkSpec spec;
  spec.input_resolution = resolution;
  spec.crop_resolution = crop_for_resolution(resolution);
  if (heads.empty()) throw config_error("network needs at least one head");
  for (const auto& h : heads) {
    const std::size_t min_classes = h.label_mode == LabelMode::single ? 2 : 1;
    if (h.class_count < min_classes)
      throw config_error("head '" + h.name + "' has too few classes");
  }
  spec.heads = std::move(heads);

  auto& t = spec.trunk;
  auto conv = [&](std::size_t k, std::size_t n, std::size_t s, std::size_t p,
                  bool pool) {
    t.push_back(LayerSpec::Conv(k, n, s, p));
    t.push_back(LayerSpec::Relu());
    if (pool) t.push_back(LayerSpec::MaxPool());
  };

  const bool large = resolution >= 128;
  switch (depth) {
    case 2:
      if (large) {
        conv(64, 11, 4, 0, true);
        conv(128, 5, 1, 2, true);
      } else if (resolution == 64) {
        conv(32, 5, 1, 2, true);
        conv(64, 5, 1, 2, true);
      } else {  // 32
        conv(64, 5, 1, 2, true);
        conv(128, 5, 1, 2, true);
      }
      break;
    case 3:
      if (large) {
        conv(64, 7, 3, 0, true);
        conv(128, 5, 1, 2, true);
        conv(320, 3, 1, 1, false);
      } else if (resolution == 64) {
        conv(32, 5, 1, 2, true);
        conv(64, 5, 1, 2, true);
        conv(120, 3, 1, 1, false);
      } else {  // 32: pooling only after the first conv layer
        conv(32, 5, 1, 2, true);
        conv(64, 5, 1, 2, false);
        conv(120, 3, 1, 1, false);
      }
      break;
    case 4:
      if (resolution != 256)
        throw config_error("4-conv architecture is defined only at 256");
      conv(64, 11, 4, 0, true);
      conv(128, 5, 1, 2, true);
      conv(192, 3, 1, 1, true);
      conv(192, 3, 1, 1, true);
      break;
    case 5:
      // AlexNet-lineage counts; pooling after layers 1, 2 and 5.
      if (resolution != 256)
        throw config_error("5-conv architecture is defined only at 256");
      conv(96, 11, 4, 0, true);
      conv(256, 5, 1, 2, true);
      conv(384, 3, 1, 1, false);
      conv(384, 3, 1, 1, false);
      conv(256, 3, 1, 1, true);
      break;
    default:
      throw config_error("depth must be in {2,3,4,5}");
  }

  t.push_back(LayerSpec::Fc(fc1_width));
  t.push_back(LayerSpec::Relu());
  t.push_back(LayerSpec::Dropout(0.5));
  t.push_back(LayerSpec::Fc(fc2_width));
  t.push_back(LayerSpec::Relu());
  t.push_back(LayerSpec::Dropout(0.5));

  infer_shapes(spec);  // validates the dimension flow
  return spec;
}

std::vector<std::vector<std::size_t>> infer_shapes(const NetworkSpec& spec) {
  std::vector<std::vector<std::size_t>> shapes;
  std::vector<std::size_t> cur = {spec.input_channels, spec.crop_resolution,
                                  spec.crop_resolution};
  for (std::size_t li = 0; li < spec.trunk.size(); ++li) {
    const LayerSpec& l = spec.trunk[li];
    switch (l.kind) {
      case LayerKind::conv: {
        if (cur.size() != 3)
          throw config_error("conv after flatten at layer " +
                             std::to_string(li));
        const std::size_t h = cur[1] + 2 * l.padding;
        const std::size_t w = cur[2] + 2 * l.padding;
        if (l.kernel_width > h || l.kernel_width > w)
          throw config_error("architecture infeasible at layer " +
                             std::to_string(li) + " (conv): kernel " +
                             std::to_string(l.kernel_width) +
                             " exceeds map size " + std::to_string(cur[1]));
        cur = {l.kernels, (h - l.kernel_width) / l.stride + 1,
               (w - l.kernel_width) / l.stride + 1};
        break;
      }
      case LayerKind::maxpool: {
        if (cur.size() != 3)
          throw config_error("maxpool after flatten at layer " +
                             std::to_string(li));
        if (l.pool_size > cur[1] || l.pool_size > cur[2])
          throw config_error("architecture infeasible at layer " +
                             std::to_string(li) + " (maxpool): window " +
                             std::to_string(l.pool_size) +
                             " exceeds map size " + std::to_string(cur[1]));
        cur = {cur[0], (cur[1] - l.pool_size) / l.pool_stride + 1,
               (cur[2] - l.pool_size) / l.pool_stride + 1};
        break;
      }
      case LayerKind::fc: {
        std::size_t in = 1;
        for (std::size_t d : cur) in *= d;
        if (l.width < 1)
          throw config_error("fc width must be positive at layer " +
                             std::to_string(li));
        cur = {l.width};
        (void)in;
        break;
      }
      case LayerKind::relu:
      case LayerKind::dropout:
        break;
    }
    shapes.push_back(cur);
  }
  return shapes;
}

ParamEntry& ParamStore::by_name(const std::string& name) {
  for (auto& e : entries)
    if (e.name == name) return e;
  throw config_error("no parameter entry named " + name);
}
const ParamEntry& ParamStore::by_name(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw config_error("no parameter entry named " + name);
}
std::size_t ParamStore::head_index(const std::string& head_name) const {
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].is_head && entries[i].name == "head:" + head_name) return i;
  throw config_error("no head entry for " + head_name);
}

namespace {
Tensor gaussian_tensor(std::vector<std::size_t> shape, Rng& rng,
                       double scale) {
  Tensor t(std::move(shape), 0.0);
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}
}  // namespace

ParamStore init_params(const NetworkSpec& spec, std::uint64_t seed,
                       double scale) {
  const auto shapes = infer_shapes(spec);
  Rng rng(seed);
  ParamStore store;
  std::vector<std::size_t> cur = {spec.input_channels, spec.crop_resolution,
                                  spec.crop_resolution};
  std::size_t conv_i = 0, fc_i = 0;
  for (std::size_t li = 0; li < spec.trunk.size(); ++li) {
    const LayerSpec& l = spec.trunk[li];
    if (l.kind == LayerKind::conv) {
      ParamEntry e;
      e.name = "conv" + std::to_string(++conv_i);
      e.kind = LayerKind::conv;
      e.trunk_index = li;
      e.weight = gaussian_tensor(
          {l.kernels, cur[0], l.kernel_width, l.kernel_width}, rng, scale);
      e.bias = Tensor({l.kernels}, 0.0);
      e.vel_weight = Tensor(e.weight.shape(), 0.0);
      e.vel_bias = Tensor(e.bias.shape(), 0.0);
      store.entries.push_back(std::move(e));
    } else if (l.kind == LayerKind::fc) {
      std::size_t in = 1;
      for (std::size_t d : cur) in *= d;
      ParamEntry e;
      e.name = "fc" + std::to_string(++fc_i);
      e.kind = LayerKind::fc;
      e.trunk_index = li;
      e.weight = gaussian_tensor({l.width, in}, rng, scale);
      e.bias = Tensor({l.width}, 0.0);
      e.vel_weight = Tensor(e.weight.shape(), 0.0);
      e.vel_bias = Tensor(e.bias.shape(), 0.0);
      store.entries.push_back(std::move(e));
    }
    cur = shapes[li];
  }
  std::size_t trunk_out = 1;
  for (std::size_t d : cur) trunk_out *= d;
  for (const auto& h : spec.heads) {
    ParamEntry e;
    e.name = "head:" + h.name;
    e.kind = LayerKind::fc;
    e.is_head = true;
    e.weight = gaussian_tensor({h.class_count, trunk_out}, rng, scale);
    e.bias = Tensor({h.class_count}, 0.0);
    e.vel_weight = Tensor(e.weight.shape(), 0.0);
    e.vel_bias = Tensor(e.bias.shape(), 0.0);
    store.entries.push_back(std::move(e));
  }
  return store;
}

std::size_t parameter_count(const ParamStore& params) {
  std::size_t n = 0;
  for (const auto& e : params.entries) n += e.weight.size() + e.bias.size();
  return n;
}

namespace {

json layer_to_json(const LayerSpec& l) {
  json j;
  j["kind"] = to_string(l.kind);
  switch (l.kind) {
    case LayerKind::conv:
      j["kernels"] = l.kernels;
      j["kernel_width"] = l.kernel_width;
      j["stride"] = l.stride;
      j["padding"] = l.padding;
      break;
    case LayerKind::maxpool:
      j["size"] = l.pool_size;
      j["stride"] = l.pool_stride;
      break;
    case LayerKind::fc:
      j["width"] = l.width;
      break;
    case LayerKind::dropout:
      j["rate"] = l.rate;
      break;
    case LayerKind::relu:
      break;
  }
  return j;
}

LayerSpec layer_from_json(const json& j) {
  LayerSpec l;
  l.kind = layer_kind_from_string(j.at("kind").get<std::string>());
  switch (l.kind) {
    case LayerKind::conv:
      l.kernels = j.at("kernels").get<std::size_t>();
      l.kernel_width = j.at("kernel_width").get<std::size_t>();
      l.stride = j.at("stride").get<std::size_t>();
      l.padding = j.at("padding").get<std::size_t>();
      break;
    case LayerKind::maxpool:
      l.pool_size = j.at("size").get<std::size_t>();
      l.pool_stride = j.at("stride").get<std::size_t>();
      break;
    case LayerKind::fc:
      l.width = j.at("width").get<std::size_t>();
      break;
    case LayerKind::dropout:
      l.rate = j.at("rate").get<double>();
      break;
    case LayerKind::relu:
      break;
  }
  return l;
}

json spec_to_json_obj(const NetworkSpec& spec) {
  json j;
  j["input_resolution"] = spec.input_resolution;
  j["crop_resolution"] = spec.crop_resolution;
  j["input_channels"] = spec.input_channels;
  j["trunk"] = json::array();
  for (const auto& l : spec.trunk) j["trunk"].push_back(layer_to_json(l));
  j["heads"] = json::array();
  for (const auto& h : spec.heads)
    j["heads"].push_back(
        {{"name", h.name},
         {"class_count", h.class_count},
         {"label_mode", h.label_mode == LabelMode::single ? "single" : "multi"}});
  return j;
}

NetworkSpec spec_from_json_obj(const json& j) {
  NetworkSpec spec;
  spec.input_resolution = j.at("input_resolution").get<std::size_t>();
  spec.crop_resolution = j.at("crop_resolution").get<std::size_t>();
  spec.input_channels = j.at("input_channels").get<std::size_t>();
  for (const auto& lj : j.at("trunk")) spec.trunk.push_back(layer_from_json(lj));
  for (const auto& hj : j.at("heads")) {
    HeadSpec h;
    h.name = hj.at("name").get<std::string>();
    h.class_count = hj.at("class_count").get<std::size_t>();
    h.label_mode = hj.at("label_mode").get<std::string>() == "multi"
                       ? LabelMode::multi
                       : LabelMode::single;
    spec.heads.push_back(std::move(h));
  }
  return spec;
}

constexpr char kCkptMagic[8] = {'D', 'C', 'N', 'C', 'K', 'P', 'T', '1'};

}  // namespace

std::string spec_to_json(const NetworkSpec& spec) {
  return spec_to_json_obj(spec).dump(2);
}

NetworkSpec spec_from_json(const std::string& json_text) {
  try {
    return spec_from_json_obj(json::parse(json_text));
  } catch (const json::exception& e) {
    throw format_error(std::string("bad spec JSON: ") + e.what());
  }
}

void save_checkpoint(const NetworkSpec& spec, const ParamStore& params,
                     const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("cannot open checkpoint for writing: " + path);

  json header;
  header["version"] = 1;
  header["spec"] = spec_to_json_obj(spec);
  header["entries"] = json::array();
  for (const auto& e : params.entries) {
    header["entries"].push_back({{"name", e.name},
                                 {"kind", to_string(e.kind)},
                                 {"trunk_index", e.trunk_index},
                                 {"is_head", e.is_head},
                                 {"frozen", e.frozen},
                                 {"weight_shape", e.weight.shape()},
                                 {"bias_shape", e.bias.shape()}});
  }
  const std::string htext = header.dump();
  const std::uint64_t hlen = htext.size();
  os.write(kCkptMagic, 8);
  os.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  os.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const auto& e : params.entries) {
    write_tensor(os, e.weight);
    write_tensor(os, e.bias);
    write_tensor(os, e.vel_weight);
    write_tensor(os, e.vel_bias);
  }
  if (!os) throw format_error("write failure on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kCkptMagic, 8) != 0)
    throw format_error("bad checkpoint magic in " + path);
  std::uint64_t hlen = 0;
  is.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  if (!is || hlen > (1ULL << 30))
    throw format_error("corrupt checkpoint header in " + path);
  std::string htext(hlen, '\0');
  is.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!is) throw format_error("truncated checkpoint header in " + path);

  json header;
  try {
    header = json::parse(htext);
  } catch (const json::exception& e) {
    throw format_error(std::string("bad checkpoint header: ") + e.what());
  }
  if (header.at("version").get<int>() != 1)
    throw format_error("unsupported checkpoint version");

  Checkpoint ck;
  ck.spec = spec_from_json_obj(header.at("spec"));
  for (const auto& ej : header.at("entries")) {
    ParamEntry e;
    e.name = ej.at("name").get<std::string>();
    e.kind = layer_kind_from_string(ej.at("kind").get<std::string>());
    e.trunk_index = ej.at("trunk_index").get<std::size_t>();
    e.is_head = ej.at("is_head").get<bool>();
    e.frozen = ej.at("frozen").get<bool>();
    e.weight = read_tensor(is);
    e.bias = read_tensor(is);
    e.vel_weight = read_tensor(is);
    e.vel_bias = read_tensor(is);
    if (e.weight.shape() !=
            ej.at("weight_shape").get<std::vector<std::size_t>>() ||
        e.bias.shape() != ej.at("bias_shape").get<std::vector<std::size_t>>())
      throw format_error("checkpoint tensor does not match header for " +
                         e.name);
    ck.params.entries.push_back(std::move(e));
  }
  return ck;
}

}  // namespace dcn
