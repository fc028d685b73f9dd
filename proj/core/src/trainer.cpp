#include "dcn/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dcn/errors.hpp"
#include "dcn/metrics.hpp"

namespace dcn {

void sgd_momentum_step(ParamStore& params, const GradStore& grads,
                       double learning_rate, double momentum,
                       double weight_decay) {
  if (grads.entries.size() != params.entries.size())
    throw shape_error("sgd step: gradient/parameter mismatch");
  for (std::size_t i = 0; i < params.entries.size(); ++i) {
    ParamEntry& e = params.entries[i];
    if (e.frozen) continue;
    const auto& g = grads.entries[i];
    if (!g.weight.same_shape(e.weight) || !g.bias.same_shape(e.bias))
      throw shape_error("sgd step: gradient shape mismatch at " + e.name);
    auto update = [&](Tensor& w, Tensor& v, const Tensor& gw) {
      double* wp = w.data();
      double* vp = v.data();
      const double* gp = gw.data();
      for (std::size_t j = 0; j < w.size(); ++j) {
        vp[j] = momentum * vp[j] -
                learning_rate * (gp[j] + weight_decay * wp[j]);
        wp[j] += vp[j];
      }
    };
    update(e.weight, e.vel_weight, g.weight);
    update(e.bias, e.vel_bias, g.bias);
  }
}

Tensor augment_sample(const Tensor& image, std::size_t crop_resolution,
                      Rng& rng, Mode mode) {
  if (image.rank() != 3) throw shape_error("augment expects [C,R,R]");
  const std::size_t R = image.dim(1);
  const std::size_t r = crop_resolution;
  if (r > R || image.dim(2) != R)
    throw parameter_error("crop resolution exceeds image resolution");
  Tensor out;
  if (mode == Mode::eval) {
    const std::size_t off = (R - r) / 2;
    out = crop(image, off, off, r, r);
  } else {
    const std::size_t top = rng.uniform_index(R - r + 1);
    const std::size_t left = rng.uniform_index(R - r + 1);
    out = crop(image, top, left, r, r);
    if (rng.bernoulli(0.5)) out = mirror_horizontal(out);
  }
  for (double& v : out.values()) v -= 0.5;  // center [0,1] pixels
  return out;
}

std::vector<std::pair<bool, std::size_t>> mixed_epoch_plan(
    std::size_t image_count, std::size_t frame_count, Rng& rng) {
  if (frame_count == 0)
    throw config_error("mixed epoch needs a non-empty frame set");
  std::vector<std::pair<bool, std::size_t>> plan;
  plan.reserve(frame_count * 2);
  for (std::size_t i = 0; i < frame_count; ++i) plan.push_back({false, i});
  if (image_count > 0) {
    if (image_count <= frame_count) {
      // too few images to subsample: take them all, then draw the remainder
      // with replacement
      for (std::size_t i = 0; i < image_count; ++i) plan.push_back({true, i});
      for (std::size_t i = image_count; i < frame_count; ++i)
        plan.push_back({true, rng.uniform_index(image_count)});
    } else {
      // partial Fisher-Yates draw of frame_count distinct image indices
      std::vector<std::size_t> idx(image_count);
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t i = 0; i < frame_count; ++i) {
        const std::size_t j = i + rng.uniform_index(image_count - i);
        std::swap(idx[i], idx[j]);
        plan.push_back({true, idx[i]});
      }
    }
  }
  // shuffle the union
  for (std::size_t i = plan.size(); i > 1; --i)
    std::swap(plan[i - 1], plan[rng.uniform_index(i)]);
  return plan;
}

namespace {

LossResult head_loss(const NetworkSpec& spec, const std::string& head,
                     const Tensor& logits,
                     const std::vector<std::size_t>& labels) {
  const HeadSpec& h = spec.head(head);
  if (h.label_mode == LabelMode::single) {
    if (labels.size() != 1)
      throw config_error("single-label head got " +
                         std::to_string(labels.size()) + " labels");
    return softmax_xent(logits, labels[0]);
  }
  Tensor targets({h.class_count}, 0.0);
  for (std::size_t l : labels) {
    if (l >= h.class_count)
      throw parameter_error("label out of range for head " + head);
    targets[l] = 1.0;
  }
  return sigmoid_bce(logits, targets);
}

}  // namespace

StepLosses multi_head_step(const NetworkSpec& spec, ParamStore& params,
                           const Batch& batch, const TrainConfig& cfg,
                           double learning_rate, Rng& rng) {
  if (batch.samples.empty()) throw config_error("empty batch");
  GradStore grads = GradStore::zeros_like(params);
  std::map<std::string, double> loss_sum;
  std::map<std::string, std::size_t> loss_n;
  for (const TrainSample& s : batch.samples) {
    if (!spec.has_head(s.head)) throw config_error("unknown head: " + s.head);
    ForwardCache cache;
    Tensor trunk_out =
        forward_trunk(spec, params, s.input, Mode::train, &rng, &cache);
    Tensor logits = forward_head(params, s.head, trunk_out);
    LossResult lr = head_loss(spec, s.head, logits, s.labels);
    loss_sum[s.head] += lr.loss;
    ++loss_n[s.head];
    backward(spec, params, s.head, cache, lr.grad_logits, grads);
  }
  const double inv_b = 1.0 / static_cast<double>(batch.samples.size());
  for (auto& e : grads.entries) {
    scale(e.weight, inv_b);
    scale(e.bias, inv_b);
  }
  sgd_momentum_step(params, grads, learning_rate, cfg.momentum,
                    cfg.weight_decay);
  StepLosses out;
  out.count = loss_n;
  for (const auto& [head, sum] : loss_sum)
    out.mean[head] = sum / static_cast<double>(loss_n[head]);
  return out;
}

std::pair<double, double> evaluate_dataset(const NetworkSpec& spec,
                                           const ParamStore& params,
                                           const Dataset& ds,
                                           const std::string& head) {
  if (ds.entries.empty()) throw config_error("evaluate on empty dataset");
  const HeadSpec& h = spec.head(head);
  double loss_sum = 0.0;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> single_labels;
  for (const auto& e : ds.entries) {
    Tensor full = fetch_image(e, spec.input_resolution);
    Rng unused(0);
    Tensor input =
        augment_sample(full, spec.crop_resolution, unused, Mode::eval);
    Tensor logits =
        forward(spec, params, input, head, Mode::eval, nullptr, nullptr);
    loss_sum += head_loss(spec, head, logits, e.labels).loss;
    Tensor scores =
        h.label_mode == LabelMode::single ? softmax(logits) : sigmoid(logits);
    rows.emplace_back(scores.values().begin(), scores.values().end());
    if (h.label_mode == LabelMode::single) single_labels.push_back(e.labels[0]);
  }
  const double loss = loss_sum / static_cast<double>(ds.entries.size());

  double metric;
  if (h.label_mode == LabelMode::single) {
    metric = topk_accuracy(rows, single_labels, 1);
  } else {
    std::vector<double> aps;
    for (std::size_t c = 0; c < h.class_count; ++c) {
      std::vector<double> scores;
      std::vector<bool> rel;
      bool any_pos = false;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        scores.push_back(rows[i][c]);
        const auto& ls = ds.entries[i].labels;
        const bool pos = std::find(ls.begin(), ls.end(), c) != ls.end();
        rel.push_back(pos);
        any_pos |= pos;
      }
      if (any_pos) aps.push_back(average_precision(scores, rel));
    }
    metric = mean_ap(aps);
  }
  return {loss, metric};
}

std::string TrainReport::to_log() const {
  std::ostringstream os;
  os.precision(6);
  for (const auto& r : rows) {
    os << r.epoch << ',' << r.head << ',' << r.train_loss << ','
       << r.heldout_loss << ',' << r.heldout_metric << "\n";
  }
  return os.str();
}

TrainReport train(const NetworkSpec& spec, ParamStore& params,
                  const TrainData& data, const TrainConfig& cfg,
                  std::ostream* log) {
  if (data.primary.entries.empty())
    throw config_error("training set is empty");
  if (!spec.has_head(data.primary_head))
    throw config_error("unknown primary head: " + data.primary_head);
  const bool mixed = !data.augment_images.entries.empty();
  if (mixed && !spec.has_head(data.augment_head))
    throw config_error("unknown augment head: " + data.augment_head);
  if (cfg.learning_rate <= 0.0) throw config_error("learning_rate must be > 0");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
    throw config_error("momentum must be in [0,1)");
  if (cfg.weight_decay < 0.0) throw config_error("weight_decay must be >= 0");
  if (cfg.batch_size < 1) throw config_error("batch_size must be >= 1");

  TrainReport report;
  double lr = cfg.learning_rate;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.step_decay && cfg.decay_every > 0 && epoch > 0 &&
        epoch % cfg.decay_every == 0)
      lr *= cfg.decay_factor;

    Rng epoch_rng(derive_seed(cfg.seed, 0xEA0C, epoch));
    std::vector<std::pair<bool, std::size_t>> plan;
    if (mixed) {
      plan = mixed_epoch_plan(data.augment_images.entries.size(),
                              data.primary.entries.size(), epoch_rng);
    } else {
      plan.reserve(data.primary.entries.size());
      for (std::size_t i = 0; i < data.primary.entries.size(); ++i)
        plan.push_back({false, i});
      for (std::size_t i = plan.size(); i > 1; --i)
        std::swap(plan[i - 1], plan[epoch_rng.uniform_index(i)]);
    }

    std::map<std::string, double> loss_sum;
    std::map<std::string, std::size_t> loss_n;
    Rng step_rng(derive_seed(cfg.seed, 0x57E9, epoch));
    for (std::size_t start = 0; start < plan.size();
         start += cfg.batch_size) {
      const std::size_t end = std::min(plan.size(), start + cfg.batch_size);
      Batch batch;
      for (std::size_t i = start; i < end; ++i) {
        const auto [is_image, idx] = plan[i];
        const DataEntry& e = is_image ? data.augment_images.entries[idx]
                                      : data.primary.entries[idx];
        Rng aug_rng(derive_seed(cfg.seed, epoch * 1000003 + i, 0xA6));
        TrainSample s;
        s.input = augment_sample(fetch_image(e, spec.input_resolution),
                                 spec.crop_resolution, aug_rng, Mode::train);
        s.head = is_image ? data.augment_head : data.primary_head;
        s.labels = e.labels;
        s.domain = e.domain;
        batch.samples.push_back(std::move(s));
      }
      auto losses = multi_head_step(spec, params, batch, cfg, lr, step_rng);
      for (const auto& [head, l] : losses.mean) {
        const std::size_t n = losses.count[head];
        loss_sum[head] += l * static_cast<double>(n);
        loss_n[head] += n;
      }
    }

    for (const auto& [head, sum] : loss_sum) {
      EpochRow row;
      row.epoch = epoch;
      row.head = head;
      row.train_loss = sum / static_cast<double>(loss_n[head]);
      if (!data.heldout.entries.empty() && head == data.primary_head) {
        auto [hl, hm] = evaluate_dataset(spec, params, data.heldout, head);
        row.heldout_loss = hl;
        row.heldout_metric = hm;
      }
      report.rows.push_back(row);
      if (log) {
        std::ostringstream os;
        os.precision(6);
        os << row.epoch << ',' << row.head << ',' << row.train_loss << ','
           << row.heldout_loss << ',' << row.heldout_metric << "\n";
        *log << os.str() << std::flush;
      }
    }
  }
  return report;
}

}  // namespace dcn
