#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcn/tensor.hpp"

namespace dcn {

enum class Domain { image, video_frame };

struct DataEntry {
  std::string path;  // empty when `image` is held in memory
  Tensor image;      // [3,R,R] when in memory
  std::vector<std::size_t> labels;
  Domain domain = Domain::image;

  bool in_memory() const { return image.size() > 0; }
};

struct Dataset {
  std::vector<DataEntry> entries;
  std::size_t class_count = 0;
  std::string split;
};

// A video as an ordered frame sequence with video-level labels.
struct VideoFrame {
  double timestamp = 0.0;
  std::string path;  // empty when in memory
  Tensor image;
  bool in_memory() const { return image.size() > 0; }
};

struct VideoRecord {
  std::string id;
  std::vector<VideoFrame> frames;  // timestamps strictly increasing
  std::vector<std::size_t> labels;
  std::string split;                  // "train" or "test"
  std::vector<std::size_t> keyframes; // optional frame indices
};

// Image manifest: one entry per line, `path label[;label...] [domain]`.
// An optional leading `classes N` line declares the vocabulary; otherwise it
// is inferred from the labels seen.
Dataset load_manifest(const std::string& path);
void save_manifest(const Dataset& ds, const std::string& path);

// Video manifest: `id split label[;label...] ts:path[,ts:path...] [kf,kf...]`.
std::vector<VideoRecord> load_video_manifest(const std::string& path);
void save_video_manifest(const std::vector<VideoRecord>& videos,
                         const std::string& path);

// Decodes binary PPM (P6) or the raw tensor format, scales pixels to [0,1],
// and bilinearly resizes to [3,R,R] when the source size differs.
Tensor load_image(const std::string& path, std::size_t target_resolution);

// Image tensor resolved from an entry (from memory or from disk).
Tensor fetch_image(const DataEntry& e, std::size_t target_resolution);
Tensor fetch_frame(const VideoFrame& f, std::size_t target_resolution);

void save_ppm(const Tensor& image, const std::string& path);

Tensor bilinear_resize(const Tensor& image, std::size_t out_h,
                       std::size_t out_w);

// Synthetic two-domain corpus. Every class is defined by a shared motif (a
// symmetric bar cross at a class-specific opening angle); the image domain
// renders motifs on gradient backgrounds, the video domain renders the same
// motifs on checkerboard backgrounds with per-frame position jitter.
struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t class_count = 4;
  std::size_t image_train_size = 400;
  std::size_t image_test_size = 80;
  std::size_t video_train_count = 20;
  std::size_t video_test_count = 20;
  std::size_t frames_per_video = 3;
  double frame_interval = 1.0;  // seconds between generated frames
  std::size_t resolution = 32;
  double noise = 0.05;
  double second_label_prob = 0.25;  // chance a video carries a second class
};

struct SynthCorpus {
  Dataset image_train;
  Dataset image_test;
  std::vector<VideoRecord> videos;  // train and test, per-record split
  std::size_t class_count = 0;
};

SynthCorpus synth_two_domain(const SynthConfig& cfg);

// Class motif template, used by the matched-filter sanity oracle.
Tensor synth_motif(const SynthConfig& cfg, std::size_t cls);

// Materializes a corpus as PPM files plus manifests under `dir`:
// image_train.manifest, image_test.manifest, video_train.manifest,
// video_test.manifest.
void write_synth_corpus(const SynthCorpus& corpus, const std::string& dir);

}  // namespace dcn
