#pragma once

#include <string>
#include <vector>

#include "dcn/data_io.hpp"
#include "dcn/metrics.hpp"
#include "dcn/netspec.hpp"

namespace dcn {

struct VideoScore {
  std::string video_id;
  std::vector<double> scores;  // one entry per class of the head
};

// Frame indices at target times 0, 1/fps, 2/fps, ... each mapped to the
// nearest frame at or before the target; duplicates removed. Targets before
// the first frame snap to the first frame.
std::vector<std::size_t> sample_frames(const VideoRecord& video, double fps);

// Every sampled frame becomes a dataset entry carrying the full video label
// set and the video_frame domain tag.
std::vector<DataEntry> propagate_labels(const VideoRecord& video,
                                        const std::vector<std::size_t>& frames);

// Flattens videos into a frame-level training dataset at the given sampling
// rate (labels propagated).
Dataset frames_dataset(const std::vector<VideoRecord>& videos, double fps,
                       std::size_t class_count);

// Per-keyframe head scores (softmax or sigmoid by head mode) averaged
// elementwise. Falls back to 1-fps sampled frames when the video carries no
// keyframe annotations. Eval-mode preprocessing (center crop, no mirror).
VideoScore predict_video(const NetworkSpec& spec, const ParamStore& params,
                         const std::string& head, const VideoRecord& video);

// Binary-relevance AP/MAP over all videos; adds top-1/top-5 for single-label
// heads. Classes with zero positives are excluded from MAP and listed in the
// report.
EvalReport evaluate_split(const NetworkSpec& spec, const ParamStore& params,
                          const std::string& head,
                          const std::vector<VideoRecord>& videos);

}  // namespace dcn
