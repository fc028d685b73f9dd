#include <doctest.h>

#include <algorithm>
#include <set>

#include "dcn/errors.hpp"
#include "dcn/network.hpp"
#include "dcn/trainer.hpp"

using namespace dcn;

namespace {

// Minimal one-parameter store for optimizer recurrence checks.
ParamStore scalar_store(double w) {
  ParamStore s;
  ParamEntry e;
  e.name = "fc1";
  e.kind = LayerKind::fc;
  e.weight = Tensor({1, 1}, w);
  e.bias = Tensor({1}, 0.0);
  e.vel_weight = Tensor({1, 1}, 0.0);
  e.vel_bias = Tensor({1}, 0.0);
  s.entries.push_back(std::move(e));
  return s;
}

GradStore scalar_grad(const ParamStore& s, double g) {
  GradStore grads = GradStore::zeros_like(s);
  grads.entries[0].weight[0] = g;
  return grads;
}

NetworkSpec tiny_spec(std::vector<HeadSpec> heads) {
  NetworkSpec spec;
  spec.input_resolution = 10;
  spec.crop_resolution = 8;
  spec.trunk = {LayerSpec::Conv(4, 3, 1, 1), LayerSpec::Relu(),
                LayerSpec::MaxPool(), LayerSpec::Fc(6), LayerSpec::Relu()};
  spec.heads = std::move(heads);
  return spec;
}

Dataset tiny_dataset(std::size_t n, std::size_t classes, std::uint64_t seed) {
  Dataset ds;
  ds.class_count = classes;
  ds.split = "train";
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    DataEntry e;
    e.image = Tensor({3, 10, 10});
    for (double& v : e.image.values()) v = rng.uniform();
    e.labels = {i % classes};
    ds.entries.push_back(std::move(e));
  }
  return ds;
}

}  // namespace

TEST_CASE("sgd momentum recurrence hand values") {
  // w=1, g=0.5, lr=0.1, m=0.9, wd=0:
  // v1 = -0.05, w1 = 0.95; v2 = 0.9*(-0.05) - 0.05 = -0.095, w2 = 0.855
  ParamStore s = scalar_store(1.0);
  sgd_momentum_step(s, scalar_grad(s, 0.5), 0.1, 0.9, 0.0);
  CHECK(s.entries[0].weight[0] == doctest::Approx(0.95));
  sgd_momentum_step(s, scalar_grad(s, 0.5), 0.1, 0.9, 0.0);
  CHECK(s.entries[0].weight[0] == doctest::Approx(0.855));
}

TEST_CASE("weight decay pulls toward zero even with zero gradient") {
  ParamStore s = scalar_store(2.0);
  sgd_momentum_step(s, scalar_grad(s, 0.0), 0.1, 0.0, 0.5);
  CHECK(s.entries[0].weight[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0));
}

TEST_CASE("frozen entries are skipped by the optimizer") {
  ParamStore s = scalar_store(1.0);
  s.entries[0].frozen = true;
  sgd_momentum_step(s, scalar_grad(s, 0.5), 0.1, 0.9, 0.001);
  CHECK(s.entries[0].weight[0] == 1.0);
  CHECK(s.entries[0].vel_weight[0] == 0.0);
}

TEST_CASE("train-mode augmentation crops and mirrors; eval is centered") {
  Tensor img({3, 10, 10});
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = double(i);
  Rng rng(3);
  Tensor a = augment_sample(img, 8, rng, Mode::train);
  CHECK(a.shape() == std::vector<std::size_t>{3, 8, 8});

  Rng rng2(3);
  Tensor e1 = augment_sample(img, 8, rng2, Mode::eval);
  Rng rng3(99);
  Tensor e2 = augment_sample(img, 8, rng3, Mode::eval);
  CHECK(e1.bit_equal(e2));  // eval ignores the rng
  // eval center crop with centering: top-left of crop is img(0,1,1) - 0.5
  CHECK(e1.at3(0, 0, 0) == doctest::Approx(img.at3(0, 1, 1) - 0.5));
}

TEST_CASE("mixed epoch plan balances domains and subsamples without replacement") {
  Rng rng(11);
  auto plan = mixed_epoch_plan(50, 20, rng);
  CHECK(plan.size() == 40);
  std::set<std::size_t> image_idx;
  std::size_t images = 0, frames = 0;
  for (auto [is_image, idx] : plan) {
    if (is_image) {
      ++images;
      CHECK(idx < 50);
      image_idx.insert(idx);
    } else {
      ++frames;
      CHECK(idx < 20);
    }
  }
  CHECK(images == 20);
  CHECK(frames == 20);
  CHECK(image_idx.size() == 20);  // distinct picks
}

TEST_CASE("mixed epoch plan falls back to replacement when images are scarce") {
  Rng rng(11);
  auto plan = mixed_epoch_plan(3, 10, rng);
  std::size_t images = 0;
  for (auto [is_image, idx] : plan)
    if (is_image) {
      ++images;
      CHECK(idx < 3);
    }
  CHECK(images == 10);
}

TEST_CASE("trunk gradients accumulate across heads") {
  NetworkSpec spec = tiny_spec({{"a", 3, LabelMode::single},
                                {"b", 2, LabelMode::multi}});
  ParamStore params = init_params(spec, 21, 0.1);
  Tensor x({3, 8, 8});
  Rng rng(5);
  for (double& v : x.values()) v = rng.normal();

  auto head_grads = [&](const std::string& head, const Tensor& glogits) {
    ForwardCache cache;
    forward_trunk(spec, params, x, Mode::eval, nullptr, &cache);
    GradStore g = GradStore::zeros_like(params);
    backward(spec, params, head, cache, glogits, g);
    return g;
  };

  Tensor ga({3}, std::vector<double>{0.2, -0.1, 0.4});
  Tensor gb({2}, std::vector<double>{-0.3, 0.5});
  GradStore only_a = head_grads("a", ga);
  GradStore only_b = head_grads("b", gb);
  GradStore both = head_grads("a", ga);
  both.accumulate(only_b);

  GradStore joint = GradStore::zeros_like(params);
  {
    ForwardCache cache;
    forward_trunk(spec, params, x, Mode::eval, nullptr, &cache);
    backward(spec, params, "a", cache, ga, joint);
    backward(spec, params, "b", cache, gb, joint);
  }
  for (std::size_t i = 0; i < joint.entries.size(); ++i) {
    for (std::size_t j = 0; j < joint.entries[i].weight.size(); ++j)
      CHECK(joint.entries[i].weight[j] ==
            doctest::Approx(both.entries[i].weight[j]).epsilon(1e-12));
  }
  // head gradients stay separated
  const std::size_t bi = params.head_index("b");
  for (std::size_t j = 0; j < only_a.entries[bi].weight.size(); ++j)
    CHECK(only_a.entries[bi].weight[j] == 0.0);
}

TEST_CASE("training is deterministic for a fixed seed") {
  NetworkSpec spec = tiny_spec({{"h", 2, LabelMode::single}});
  TrainData data;
  data.primary = tiny_dataset(12, 2, 8);
  data.primary_head = "h";
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.seed = 31;

  ParamStore p1 = init_params(spec, 31, 0.05);
  ParamStore p2 = init_params(spec, 31, 0.05);
  TrainReport r1 = train(spec, p1, data, cfg);
  TrainReport r2 = train(spec, p2, data, cfg);
  for (std::size_t i = 0; i < p1.entries.size(); ++i)
    CHECK(p1.entries[i].weight.bit_equal(p2.entries[i].weight));
  CHECK(r1.to_log() == r2.to_log());

  cfg.seed = 32;
  ParamStore p3 = init_params(spec, 31, 0.05);
  train(spec, p3, data, cfg);
  CHECK_FALSE(p1.entries[0].weight.bit_equal(p3.entries[0].weight));
}

TEST_CASE("training reduces loss on a learnable toy problem") {
  NetworkSpec spec = tiny_spec({{"h", 2, LabelMode::single}});
  // class 0 bright, class 1 dark: trivially separable
  Dataset ds;
  ds.class_count = 2;
  Rng rng(2);
  for (std::size_t i = 0; i < 16; ++i) {
    DataEntry e;
    const double level = (i % 2 == 0) ? 0.9 : 0.1;
    e.image = Tensor({3, 10, 10}, level);
    for (double& v : e.image.values()) v += 0.02 * rng.normal();
    e.labels = {i % 2};
    ds.entries.push_back(std::move(e));
  }
  TrainData data;
  data.primary = ds;
  data.primary_head = "h";
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.05;
  cfg.seed = 3;

  ParamStore params = init_params(spec, 3, 0.1);
  TrainReport rep = train(spec, params, data, cfg);
  auto [loss, acc] = evaluate_dataset(spec, params, ds, "h");
  CHECK(rep.rows.front().train_loss > loss);
  CHECK(acc >= 0.9);
}

TEST_CASE("train validates its configuration") {
  NetworkSpec spec = tiny_spec({{"h", 2, LabelMode::single}});
  ParamStore params = init_params(spec, 1);
  TrainData data;
  data.primary = tiny_dataset(4, 2, 1);
  data.primary_head = "h";
  TrainConfig cfg;

  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train(spec, params, data, cfg), config_error);
  cfg.learning_rate = 0.01;
  cfg.momentum = 1.0;
  CHECK_THROWS_AS(train(spec, params, data, cfg), config_error);
  cfg.momentum = 0.9;
  data.primary_head = "nope";
  CHECK_THROWS_AS(train(spec, params, data, cfg), config_error);
}

TEST_CASE("step decay reduces the learning rate on schedule") {
  // With aggressive decay the late epochs barely move the weights.
  NetworkSpec spec = tiny_spec({{"h", 2, LabelMode::single}});
  TrainData data;
  data.primary = tiny_dataset(8, 2, 4);
  data.primary_head = "h";
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 5;

  ParamStore base = init_params(spec, 7, 0.05);
  ParamStore no_decay = base;
  train(spec, no_decay, data, cfg);

  cfg.step_decay = true;
  cfg.decay_every = 1;
  cfg.decay_factor = 1e-12;
  ParamStore with_decay = base;
  train(spec, with_decay, data, cfg);
  CHECK_FALSE(no_decay.entries[0].weight.bit_equal(with_decay.entries[0].weight));
}
