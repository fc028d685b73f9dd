#include "dcn/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcn/errors.hpp"
#include "dcn/rng.hpp"

namespace dcn {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<std::size_t> parse_labels(const std::string& tok,
                                      std::size_t line_no) {
  std::vector<std::size_t> labels;
  std::stringstream ss(tok);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.empty()) continue;
    try {
      const long v = std::stol(part);
      if (v < 0) throw std::out_of_range("negative");
      labels.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw format_error("manifest line " + std::to_string(line_no) +
                         ": bad label '" + part + "'");
    }
  }
  if (labels.empty())
    throw format_error("manifest line " + std::to_string(line_no) +
                       ": empty label list");
  return labels;
}

}  // namespace

Dataset load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw format_error("cannot open manifest: " + path);
  Dataset ds;
  bool declared_classes = false;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> missing;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "classes") {
      if (toks.size() != 2)
        throw format_error("manifest line " + std::to_string(line_no) +
                           ": malformed classes directive");
      ds.class_count = std::stoul(toks[1]);
      declared_classes = true;
      continue;
    }
    if (toks.size() < 2 || toks.size() > 3)
      throw format_error("manifest line " + std::to_string(line_no) +
                         ": expected 'path labels [domain]'");
    DataEntry e;
    e.path = toks[0];
    e.labels = parse_labels(toks[1], line_no);
    if (toks.size() == 3) {
      if (toks[2] == "image")
        e.domain = Domain::image;
      else if (toks[2] == "video_frame")
        e.domain = Domain::video_frame;
      else
        throw format_error("manifest line " + std::to_string(line_no) +
                           ": unknown domain '" + toks[2] + "'");
    }
    if (declared_classes) {
      for (std::size_t l : e.labels)
        if (l >= ds.class_count)
          throw config_error("manifest line " + std::to_string(line_no) +
                             ": label " + std::to_string(l) +
                             " outside vocabulary of " +
                             std::to_string(ds.class_count));
    } else {
      for (std::size_t l : e.labels)
        ds.class_count = std::max(ds.class_count, l + 1);
    }
    if (!fs::exists(e.path))
      missing.push_back("line " + std::to_string(line_no) + ": " + e.path);
    ds.entries.push_back(std::move(e));
  }
  if (!missing.empty()) {
    std::string msg = "manifest references missing files:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw format_error(msg);
  }
  return ds;
}

void save_manifest(const Dataset& ds, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw format_error("cannot write manifest: " + path);
  os << "classes " << ds.class_count << "\n";
  for (const auto& e : ds.entries) {
    os << e.path << ' ';
    for (std::size_t i = 0; i < e.labels.size(); ++i) {
      if (i) os << ';';
      os << e.labels[i];
    }
    os << ' ' << (e.domain == Domain::image ? "image" : "video_frame") << "\n";
  }
}

std::vector<VideoRecord> load_video_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw format_error("cannot open video manifest: " + path);
  std::vector<VideoRecord> videos;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto toks = split_ws(line);
    if (toks.size() < 4 || toks.size() > 5)
      throw format_error("video manifest line " + std::to_string(line_no) +
                         ": expected 'id split labels frames [keyframes]'");
    VideoRecord v;
    v.id = toks[0];
    v.split = toks[1];
    if (v.split != "train" && v.split != "test")
      throw format_error("video manifest line " + std::to_string(line_no) +
                         ": split must be train or test");
    v.labels = parse_labels(toks[2], line_no);
    std::stringstream fs_ss(toks[3]);
    std::string frame_tok;
    double prev_ts = -1.0;
    while (std::getline(fs_ss, frame_tok, ',')) {
      const auto colon = frame_tok.find(':');
      if (colon == std::string::npos)
        throw format_error("video manifest line " + std::to_string(line_no) +
                           ": frame entry needs ts:path");
      VideoFrame f;
      try {
        f.timestamp = std::stod(frame_tok.substr(0, colon));
      } catch (const std::exception&) {
        throw format_error("video manifest line " + std::to_string(line_no) +
                           ": bad timestamp");
      }
      f.path = frame_tok.substr(colon + 1);
      if (f.timestamp <= prev_ts)
        throw format_error("video manifest line " + std::to_string(line_no) +
                           ": timestamps must be strictly increasing");
      prev_ts = f.timestamp;
      v.frames.push_back(std::move(f));
    }
    if (v.frames.empty())
      throw format_error("video manifest line " + std::to_string(line_no) +
                         ": no frames");
    if (toks.size() == 5) {
      std::stringstream kf_ss(toks[4]);
      std::string kf_tok;
      while (std::getline(kf_ss, kf_tok, ',')) {
        const std::size_t kf = std::stoul(kf_tok);
        if (kf >= v.frames.size())
          throw format_error("video manifest line " + std::to_string(line_no) +
                             ": keyframe index out of range");
        v.keyframes.push_back(kf);
      }
    }
    videos.push_back(std::move(v));
  }
  return videos;
}

void save_video_manifest(const std::vector<VideoRecord>& videos,
                         const std::string& path) {
  std::ofstream os(path);
  if (!os) throw format_error("cannot write video manifest: " + path);
  for (const auto& v : videos) {
    os << v.id << ' ' << v.split << ' ';
    for (std::size_t i = 0; i < v.labels.size(); ++i) {
      if (i) os << ';';
      os << v.labels[i];
    }
    os << ' ';
    for (std::size_t i = 0; i < v.frames.size(); ++i) {
      if (i) os << ',';
      os << v.frames[i].timestamp << ':' << v.frames[i].path;
    }
    if (!v.keyframes.empty()) {
      os << ' ';
      for (std::size_t i = 0; i < v.keyframes.size(); ++i) {
        if (i) os << ',';
        os << v.keyframes[i];
      }
    }
    os << "\n";
  }
}

namespace {

Tensor load_ppm(std::ifstream& is, const std::string& path) {
  auto next_token = [&]() -> std::string {
    std::string tok;
    for (;;) {
      int c = is.get();
      if (c == EOF) throw format_error("truncated PPM header: " + path);
      if (c == '#') {
        std::string skip;
        std::getline(is, skip);
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
  };
  const std::string magic = next_token();
  if (magic != "P6") throw format_error("unsupported PPM type in " + path);
  const std::size_t w = std::stoul(next_token());
  const std::size_t h = std::stoul(next_token());
  const std::size_t maxval = std::stoul(next_token());
  if (w < 1 || h < 1 || maxval != 255)
    throw format_error("unsupported PPM geometry/maxval in " + path);
  std::vector<unsigned char> raw(w * h * 3);
  is.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (!is) throw format_error("truncated PPM payload: " + path);
  Tensor t({3, h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        t.at3(c, y, x) = raw[(y * w + x) * 3 + c] / 255.0;
  return t;
}

}  // namespace

Tensor bilinear_resize(const Tensor& image, std::size_t out_h,
                       std::size_t out_w) {
  if (image.rank() != 3) throw shape_error("resize expects [C,H,W]");
  const std::size_t C = image.dim(0), H = image.dim(1), W = image.dim(2);
  if (out_h == H && out_w == W) return image;
  Tensor out({C, out_h, out_w});
  const double sy = static_cast<double>(H) / static_cast<double>(out_h);
  const double sx = static_cast<double>(W) / static_cast<double>(out_w);
  for (std::size_t y = 0; y < out_h; ++y) {
    double fy = (static_cast<double>(y) + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(H - 1));
    const std::size_t y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, H - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < out_w; ++x) {
      double fx = (static_cast<double>(x) + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(W - 1));
      const std::size_t x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, W - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < C; ++c) {
        const double v00 = image.at3(c, y0, x0), v01 = image.at3(c, y0, x1);
        const double v10 = image.at3(c, y1, x0), v11 = image.at3(c, y1, x1);
        out.at3(c, y, x) = (1 - wy) * ((1 - wx) * v00 + wx * v01) +
                           wy * ((1 - wx) * v10 + wx * v11);
      }
    }
  }
  return out;
}

Tensor load_image(const std::string& path, std::size_t target_resolution) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error("cannot open image: " + path);
  char magic[4] = {};
  is.read(magic, 4);
  if (!is) throw format_error("image file too short: " + path);
  is.seekg(0);
  Tensor img;
  if (std::memcmp(magic, "DCNT", 4) == 0) {
    img = read_tensor(is);
    if (img.rank() != 3 || img.dim(0) != 3)
      throw format_error("raw tensor image must be [3,H,W]: " + path);
  } else if (magic[0] == 'P' && magic[1] == '6') {
    img = load_ppm(is, path);
  } else {
    throw format_error("unsupported image format: " + path);
  }
  return bilinear_resize(img, target_resolution, target_resolution);
}

Tensor fetch_image(const DataEntry& e, std::size_t target_resolution) {
  if (e.in_memory())
    return bilinear_resize(e.image, target_resolution, target_resolution);
  return load_image(e.path, target_resolution);
}

Tensor fetch_frame(const VideoFrame& f, std::size_t target_resolution) {
  if (f.in_memory())
    return bilinear_resize(f.image, target_resolution, target_resolution);
  return load_image(f.path, target_resolution);
}

void save_ppm(const Tensor& image, const std::string& path) {
  if (image.rank() != 3 || image.dim(0) != 3)
    throw shape_error("save_ppm expects [3,H,W]");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("cannot write PPM: " + path);
  const std::size_t H = image.dim(1), W = image.dim(2);
  os << "P6\n" << W << ' ' << H << "\n255\n";
  std::vector<unsigned char> raw(W * H * 3);
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < W; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = std::clamp(image.at3(c, y, x), 0.0, 1.0);
        raw[(y * W + x) * 3 + c] =
            static_cast<unsigned char>(std::lround(v * 255.0));
      }
  os.write(reinterpret_cast<const char*>(raw.data()),
           static_cast<std::streamsize>(raw.size()));
}

// ---------------------------------------------------------------------------
// synthetic two-domain generator

namespace {

constexpr double kPi = 3.14159265358979323846;

// Bar-cross motif: two bars through the patch center at +/- theta, which is
// symmetric under horizontal mirroring.
Tensor motif_patch(std::size_t side, std::size_t cls, std::size_t classes) {
  const double theta =
      0.5 * kPi * static_cast<double>(cls + 1) / static_cast<double>(classes + 1);
  Tensor patch({side, side}, 0.0);
  const double c0 = 0.5 * static_cast<double>(side - 1);
  const double thickness = std::max(1.0, static_cast<double>(side) / 12.0);
  const double radius = 0.5 * static_cast<double>(side);
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      const double dx = static_cast<double>(x) - c0;
      const double dy = static_cast<double>(y) - c0;
      if (dx * dx + dy * dy > radius * radius) continue;
      const double d1 = std::abs(-std::sin(theta) * dx + std::cos(theta) * dy);
      const double d2 = std::abs(std::sin(theta) * dx + std::cos(theta) * dy);
      if (std::min(d1, d2) <= thickness) patch.at2(y, x) = 1.0;
    }
  }
  return patch;
}

void stamp_motif(Tensor& img, const Tensor& patch, std::size_t top,
                 std::size_t left, double intensity) {
  const std::size_t side = patch.dim(0);
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x) {
      if (patch.at2(y, x) <= 0.0) continue;
      for (std::size_t c = 0; c < 3; ++c)
        img.at3(c, top + y, left + x) = intensity;
    }
}

void add_noise_clamp(Tensor& img, double noise, Rng& rng) {
  for (double& v : img.values()) {
    if (noise > 0.0) v += noise * rng.normal();
    v = std::clamp(v, 0.0, 1.0);
  }
}

// Domain A: horizontal gradient with a per-image color ramp.
Tensor background_gradient(std::size_t res, Rng& rng) {
  Tensor img({3, res, res});
  for (std::size_t c = 0; c < 3; ++c) {
    const double base = 0.1 + 0.35 * rng.uniform();
    const double slope = -0.25 + 0.5 * rng.uniform();
    for (std::size_t y = 0; y < res; ++y)
      for (std::size_t x = 0; x < res; ++x)
        img.at3(c, y, x) =
            base + slope * static_cast<double>(x) / static_cast<double>(res - 1);
  }
  return img;
}

// Domain B: checkerboard with per-video colors and phase.
Tensor background_checker(std::size_t res, Rng& rng) {
  Tensor img({3, res, res});
  const std::size_t cell = std::max<std::size_t>(2, res / 8);
  const std::size_t phase_x = rng.uniform_index(cell);
  const std::size_t phase_y = rng.uniform_index(cell);
  double col_a[3], col_b[3];
  for (std::size_t c = 0; c < 3; ++c) {
    col_a[c] = 0.1 + 0.3 * rng.uniform();
    col_b[c] = 0.25 + 0.3 * rng.uniform();
  }
  for (std::size_t y = 0; y < res; ++y)
    for (std::size_t x = 0; x < res; ++x) {
      const bool odd = (((y + phase_y) / cell) + ((x + phase_x) / cell)) % 2;
      for (std::size_t c = 0; c < 3; ++c)
        img.at3(c, y, x) = odd ? col_a[c] : col_b[c];
    }
  return img;
}

}  // namespace

Tensor synth_motif(const SynthConfig& cfg, std::size_t cls) {
  return motif_patch(cfg.resolution / 2, cls, cfg.class_count);
}

SynthCorpus synth_two_domain(const SynthConfig& cfg) {
  if (cfg.class_count < 2) throw config_error("synth needs >= 2 classes");
  if (cfg.resolution != 32 && cfg.resolution != 64 && cfg.resolution != 128 &&
      cfg.resolution != 256)
    throw config_error("synth resolution must be 32/64/128/256");
  const std::size_t R = cfg.resolution;
  const std::size_t m = R / 2;

  std::vector<Tensor> motifs;
  for (std::size_t c = 0; c < cfg.class_count; ++c)
    motifs.push_back(motif_patch(m, c, cfg.class_count));

  SynthCorpus corpus;
  corpus.class_count = cfg.class_count;

  auto make_image_set = [&](std::size_t count, const char* split,
                            std::uint64_t stream) {
    Dataset ds;
    ds.class_count = cfg.class_count;
    ds.split = split;
    for (std::size_t i = 0; i < count; ++i) {
      Rng rng(derive_seed(cfg.seed, stream, i));
      const std::size_t cls = i % cfg.class_count;
      Tensor img = background_gradient(R, rng);
      const std::size_t top = rng.uniform_index(R - m + 1);
      const std::size_t left = rng.uniform_index(R - m + 1);
      stamp_motif(img, motifs[cls], top, left, 0.9);
      add_noise_clamp(img, cfg.noise, rng);
      DataEntry e;
      e.image = std::move(img);
      e.labels = {cls};
      e.domain = Domain::image;
      ds.entries.push_back(std::move(e));
    }
    return ds;
  };
  corpus.image_train = make_image_set(cfg.image_train_size, "train", 1);
  corpus.image_test = make_image_set(cfg.image_test_size, "test", 2);

  const std::size_t total_videos = cfg.video_train_count + cfg.video_test_count;
  for (std::size_t v = 0; v < total_videos; ++v) {
    Rng rng(derive_seed(cfg.seed, 3, v));
    VideoRecord rec;
    {
      std::ostringstream id;
      id << "vid" << v;
      rec.id = id.str();
    }
    rec.split = v < cfg.video_train_count ? "train" : "test";
    const std::size_t cls = v % cfg.class_count;
    rec.labels = {cls};
    if (cfg.class_count > 1 && rng.uniform() < cfg.second_label_prob) {
      std::size_t other = rng.uniform_index(cfg.class_count - 1);
      if (other >= cls) ++other;
      rec.labels.push_back(other);
    }
    const Tensor bg = background_checker(R, rng);
    std::vector<std::pair<std::size_t, std::size_t>> base_pos;
    for (std::size_t li = 0; li < rec.labels.size(); ++li)
      base_pos.push_back(
          {rng.uniform_index(R - m + 1), rng.uniform_index(R - m + 1)});
    for (std::size_t f = 0; f < cfg.frames_per_video; ++f) {
      Tensor img = bg;
      for (std::size_t li = 0; li < rec.labels.size(); ++li) {
        const long jt = static_cast<long>(rng.uniform_index(5)) - 2;
        const long jl = static_cast<long>(rng.uniform_index(5)) - 2;
        const std::size_t top = static_cast<std::size_t>(std::clamp<long>(
            static_cast<long>(base_pos[li].first) + jt, 0,
            static_cast<long>(R - m)));
        const std::size_t left = static_cast<std::size_t>(std::clamp<long>(
            static_cast<long>(base_pos[li].second) + jl, 0,
            static_cast<long>(R - m)));
        stamp_motif(img, motifs[rec.labels[li]], top, left, 0.9);
      }
      add_noise_clamp(img, cfg.noise, rng);
      VideoFrame frame;
      frame.timestamp = static_cast<double>(f) * cfg.frame_interval;
      frame.image = std::move(img);
      rec.frames.push_back(std::move(frame));
    }
    corpus.videos.push_back(std::move(rec));
  }
  return corpus;
}

void write_synth_corpus(const SynthCorpus& corpus, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "img");
  fs::create_directories(fs::path(dir) / "vid");

  auto write_images = [&](const Dataset& src, const std::string& prefix,
                          const std::string& manifest_name) {
    Dataset on_disk;
    on_disk.class_count = src.class_count;
    on_disk.split = src.split;
    for (std::size_t i = 0; i < src.entries.size(); ++i) {
      const auto& e = src.entries[i];
      std::ostringstream name;
      name << prefix << i << ".ppm";
      const std::string p = (fs::path(dir) / "img" / name.str()).string();
      save_ppm(e.image, p);
      DataEntry d;
      d.path = p;
      d.labels = e.labels;
      d.domain = e.domain;
      on_disk.entries.push_back(std::move(d));
    }
    save_manifest(on_disk, (fs::path(dir) / manifest_name).string());
  };
  write_images(corpus.image_train, "train_", "image_train.manifest");
  write_images(corpus.image_test, "test_", "image_test.manifest");

  std::vector<VideoRecord> train_videos, test_videos;
  for (const auto& v : corpus.videos) {
    VideoRecord d = v;
    for (std::size_t f = 0; f < v.frames.size(); ++f) {
      std::ostringstream name;
      name << v.id << "_f" << f << ".ppm";
      const std::string p = (fs::path(dir) / "vid" / name.str()).string();
      save_ppm(v.frames[f].image, p);
      d.frames[f].path = p;
      d.frames[f].image = Tensor();
    }
    (v.split == "train" ? train_videos : test_videos).push_back(std::move(d));
  }
  save_video_manifest(train_videos,
                      (fs::path(dir) / "video_train.manifest").string());
  save_video_manifest(test_videos,
                      (fs::path(dir) / "video_test.manifest").string());
}

}  // namespace dcn
