#include "dcn/videopipe.hpp"

#include <algorithm>

#include "dcn/errors.hpp"
#include "dcn/layers.hpp"
#include "dcn/network.hpp"
#include "dcn/trainer.hpp"

namespace dcn {

std::vector<std::size_t> sample_frames(const VideoRecord& video, double fps) {
  if (fps <= 0.0) throw parameter_error("fps must be positive");
  if (video.frames.empty()) return {};
  std::vector<std::size_t> out;
  const double last_ts = video.frames.back().timestamp;
  const double eps = 1e-9;
  for (std::size_t k = 0;; ++k) {
    const double target = static_cast<double>(k) / fps;
    if (target > last_ts + eps) break;
    // last frame with timestamp <= target; targets before the first frame
    // snap to frame 0
    std::size_t idx = 0;
    for (std::size_t i = 0; i < video.frames.size(); ++i) {
      if (video.frames[i].timestamp <= target + eps)
        idx = i;
      else
        break;
    }
    if (out.empty() || out.back() != idx) out.push_back(idx);
  }
  if (out.empty()) out.push_back(0);  // single target before first timestamp
  return out;
}

std::vector<DataEntry> propagate_labels(
    const VideoRecord& video, const std::vector<std::size_t>& frames) {
  if (video.labels.empty())
    throw config_error("cannot propagate labels of unlabeled video " +
                       video.id);
  std::vector<DataEntry> entries;
  entries.reserve(frames.size());
  for (std::size_t idx : frames) {
    const VideoFrame& f = video.frames.at(idx);
    DataEntry e;
    e.path = f.path;
    e.image = f.image;
    e.labels = video.labels;
    e.domain = Domain::video_frame;
    entries.push_back(std::move(e));
  }
  return entries;
}

Dataset frames_dataset(const std::vector<VideoRecord>& videos, double fps,
                       std::size_t class_count) {
  Dataset ds;
  ds.class_count = class_count;
  ds.split = "train";
  for (const auto& v : videos) {
    auto entries = propagate_labels(v, sample_frames(v, fps));
    for (auto& e : entries) ds.entries.push_back(std::move(e));
  }
  return ds;
}

VideoScore predict_video(const NetworkSpec& spec, const ParamStore& params,
                         const std::string& head, const VideoRecord& video) {
  if (video.frames.empty())
    throw config_error("cannot score empty video " + video.id);
  std::vector<std::size_t> keyframes = video.keyframes;
  if (keyframes.empty()) keyframes = sample_frames(video, 1.0);
  // keyframe lists must be duplicate-free or the mean would double-count
  std::vector<std::size_t> sorted = keyframes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw config_error("duplicate keyframes in video " + video.id);

  const HeadSpec& h = spec.head(head);
  VideoScore score;
  score.video_id = video.id;
  score.scores.assign(h.class_count, 0.0);
  for (std::size_t idx : keyframes) {
    Tensor full =
        fetch_frame(video.frames.at(idx), spec.input_resolution);
    Rng unused(0);
    Tensor input =
        augment_sample(full, spec.crop_resolution, unused, Mode::eval);
    Tensor logits =
        forward(spec, params, input, head, Mode::eval, nullptr, nullptr);
    Tensor probs =
        h.label_mode == LabelMode::single ? softmax(logits) : sigmoid(logits);
    for (std::size_t c = 0; c < h.class_count; ++c)
      score.scores[c] += probs[c];
  }
  const double inv = 1.0 / static_cast<double>(keyframes.size());
  for (double& s : score.scores) s *= inv;
  return score;
}

EvalReport evaluate_split(const NetworkSpec& spec, const ParamStore& params,
                          const std::string& head,
                          const std::vector<VideoRecord>& videos) {
  if (videos.empty()) throw config_error("no videos to evaluate");
  const HeadSpec& h = spec.head(head);
  std::vector<VideoScore> scores;
  scores.reserve(videos.size());
  for (const auto& v : videos) {
    if (v.labels.empty())
      throw config_error("unlabeled video in evaluation: " + v.id);
    scores.push_back(predict_video(spec, params, head, v));
  }

  EvalReport report;
  report.sample_count = videos.size();
  std::vector<double> aps;
  for (std::size_t c = 0; c < h.class_count; ++c) {
    std::vector<double> cls_scores;
    std::vector<bool> rel;
    bool any_pos = false;
    for (std::size_t i = 0; i < videos.size(); ++i) {
      cls_scores.push_back(scores[i].scores[c]);
      const auto& ls = videos[i].labels;
      const bool pos = std::find(ls.begin(), ls.end(), c) != ls.end();
      rel.push_back(pos);
      any_pos |= pos;
    }
    if (!any_pos) {
      report.skipped_classes.push_back(c);
      continue;
    }
    const double ap = average_precision(cls_scores, rel);
    report.per_class_ap[c] = ap;
    aps.push_back(ap);
  }
  report.map = mean_ap(aps);

  if (h.label_mode == LabelMode::single) {
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < videos.size(); ++i) {
      rows.push_back(scores[i].scores);
      labels.push_back(videos[i].labels[0]);
    }
    report.top1 = topk_accuracy(rows, labels, 1);
    if (h.class_count >= 5) report.top5 = topk_accuracy(rows, labels, 5);
  }
  return report;
}

}  // namespace dcn
