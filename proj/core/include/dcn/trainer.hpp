#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dcn/data_io.hpp"
#include "dcn/network.hpp"

namespace dcn {

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  std::size_t epochs = 10;  // full passes ("cycles") over the training set
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  // optional step decay, off by default
  bool step_decay = false;
  std::size_t decay_every = 0;
  double decay_factor = 0.1;
};

// One resolved training sample at crop resolution, routed to a head.
struct TrainSample {
  Tensor input;  // [C, crop, crop]
  std::string head;
  std::vector<std::size_t> labels;
  Domain domain = Domain::image;
};

struct Batch {
  std::vector<TrainSample> samples;
};

// v <- momentum*v - lr*(g + wd*w); w <- w + v, skipping frozen entries.
// Gradients must be aligned with the parameter store.
void sgd_momentum_step(ParamStore& params, const GradStore& grads,
                       double learning_rate, double momentum,
                       double weight_decay);

// Random crop + mirror in train mode; deterministic center crop in eval.
// Pixels are shifted from [0,1] to [-0.5,0.5].
Tensor augment_sample(const Tensor& image, std::size_t crop_resolution,
                      Rng& rng, Mode mode);

// Index plan for one mixed-domain epoch: image entries are subsampled
// (without replacement when possible) down to the frame count, then the
// union is shuffled. first=true marks an image-domain index.
std::vector<std::pair<bool, std::size_t>> mixed_epoch_plan(
    std::size_t image_count, std::size_t frame_count, Rng& rng);

struct StepLosses {
  std::map<std::string, double> mean;        // mean loss per head in batch
  std::map<std::string, std::size_t> count;  // samples routed to each head
};

// One forward/backward/update over a batch. Loss is routed to each sample's
// own head; trunk gradients accumulate across domains; a single SGD step is
// applied.
StepLosses multi_head_step(const NetworkSpec& spec, ParamStore& params,
                           const Batch& batch, const TrainConfig& cfg,
                           double learning_rate, Rng& rng);

struct TrainData {
  Dataset primary;          // required training set
  std::string primary_head;
  Dataset augment_images;   // optional mixed-domain image set (may be empty)
  std::string augment_head;
  Dataset heldout;          // optional held-out split of the primary domain
};

struct EpochRow {
  std::size_t epoch = 0;
  std::string head;
  double train_loss = 0.0;
  double heldout_loss = -1.0;
  double heldout_metric = -1.0;
};

struct TrainReport {
  std::vector<EpochRow> rows;
  std::string to_log() const;  // "epoch,head,train_loss,heldout_loss,heldout_metric"
};

// Full training loop: cfg.epochs passes, crop/mirror augmentation, optional
// mixed-domain batches, per-epoch train and held-out statistics.
// Deterministic given (seed, data, config). `log` gets one line per row.
TrainReport train(const NetworkSpec& spec, ParamStore& params,
                  const TrainData& data, const TrainConfig& cfg,
                  std::ostream* log = nullptr);

// Eval-mode loss + metric (top-1 for single-label heads, MAP for
// multi-label) over a dataset.
std::pair<double, double> evaluate_dataset(const NetworkSpec& spec,
                                           const ParamStore& params,
                                           const Dataset& ds,
                                           const std::string& head);

}  // namespace dcn
