#include "dcn/gradcheck.hpp"

#include <cmath>
#include <functional>

#include "dcn/layers.hpp"
#include "dcn/network.hpp"
#include "dcn/rng.hpp"

namespace dcn {

namespace {

constexpr double kStep = 1e-5;

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng,
                     double scale = 1.0) {
  Tensor t(std::move(shape), 0.0);
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

double rel_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

// Max relative error between `analytic` and central differences of
// `f` with respect to `x` (x is mutated and restored in place).
double check_grad(Tensor& x, const Tensor& analytic,
                  const std::function<double()>& f) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + kStep;
    const double fp = f();
    x[i] = orig - kStep;
    const double fm = f();
    x[i] = orig;
    const double numeric = (fp - fm) / (2.0 * kStep);
    worst = std::max(worst, rel_error(analytic[i], numeric));
  }
  return worst;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<GradCheckResult> run_gradient_checks(std::uint64_t seed,
                                                 double tolerance,
                                                 bool inject_conv_fault) {
  Rng rng(seed);
  std::vector<GradCheckResult> results;
  auto record = [&](const std::string& name, double err) {
    results.push_back({name, err, err < tolerance});
  };

  // conv: scalar functional <w, conv(x)>
  {
    Tensor x = random_tensor({2, 6, 6}, rng);
    ConvParams p;
    p.kernels = random_tensor({3, 2, 3, 3}, rng, 0.5);
    p.bias = random_tensor({3}, rng, 0.5);
    p.stride = 1;
    p.padding = 1;
    const Tensor w = random_tensor({3, 6, 6}, rng);
    auto f = [&]() { return dot(w, conv2d_forward(x, p)); };
    ConvGrads g = conv2d_backward(x, p, w);
    if (inject_conv_fault) scale(g.kernels, -1.0);
    record("conv_input", check_grad(x, g.input, f));
    record("conv_kernels", check_grad(p.kernels, g.kernels, f));
    record("conv_bias", check_grad(p.bias, g.bias, f));
  }

  // conv with stride > 1 and no padding
  {
    Tensor x = random_tensor({1, 7, 7}, rng);
    ConvParams p;
    p.kernels = random_tensor({2, 1, 3, 3}, rng, 0.5);
    p.bias = random_tensor({2}, rng, 0.5);
    p.stride = 2;
    const Tensor w = random_tensor({2, 3, 3}, rng);
    auto f = [&]() { return dot(w, conv2d_forward(x, p)); };
    ConvGrads g = conv2d_backward(x, p, w);
    record("conv_strided_input", check_grad(x, g.input, f));
    record("conv_strided_kernels", check_grad(p.kernels, g.kernels, f));
  }

  // maxpool: argmax routing; values made distinct so kStep cannot flip them
  {
    Tensor x({2, 4, 4});
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = rng.normal() + static_cast<double>(i % 7) * 0.01;
    const Tensor w = random_tensor({2, 2, 2}, rng);
    auto f = [&]() { return dot(w, maxpool_forward(x, 2, 2).first); };
    auto [out, ctx] = maxpool_forward(x, 2, 2);
    Tensor g = maxpool_backward(ctx, w);
    record("maxpool_input", check_grad(x, g, f));
  }

  // relu (inputs kept away from the kink)
  {
    Tensor x = random_tensor({10}, rng);
    for (double& v : x.values())
      if (std::abs(v) < 1e-3) v = 0.1;
    const Tensor w = random_tensor({10}, rng);
    auto f = [&]() { return dot(w, relu(x)); };
    Tensor g = relu_backward(x, w);
    record("relu_input", check_grad(x, g, f));
  }

  // fc
  {
    Tensor x = random_tensor({5}, rng);
    FcParams p{random_tensor({4, 5}, rng, 0.5), random_tensor({4}, rng, 0.5)};
    const Tensor w = random_tensor({4}, rng);
    auto f = [&]() { return dot(w, fc_forward(x, p)); };
    FcGrads g = fc_backward(x, p, w);
    record("fc_input", check_grad(x, g.input, f));
    record("fc_weight", check_grad(p.weight, g.weight, f));
    record("fc_bias", check_grad(p.bias, g.bias, f));
  }

  // dropout with the mask held fixed
  {
    Tensor x = random_tensor({20}, rng);
    Rng mask_rng(derive_seed(seed, 0xD0));
    auto [out, ctx] = dropout(x, 0.5, Mode::train, mask_rng);
    const Tensor w = random_tensor({20}, rng);
    auto f = [&]() {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        s += w[i] * x[i] * ctx.mask[i];
      return s;
    };
    Tensor g = dropout_backward(ctx, w);
    record("dropout_fixed_mask", check_grad(x, g, f));
  }

  // softmax cross-entropy
  {
    Tensor logits = random_tensor({6}, rng);
    const std::size_t label = 2;
    auto f = [&]() { return softmax_xent(logits, label).loss; };
    Tensor g = softmax_xent(logits, label).grad_logits;
    record("softmax_xent", check_grad(logits, g, f));
  }

  // per-class logistic loss
  {
    Tensor logits = random_tensor({6}, rng);
    Tensor targets({6}, 0.0);
    targets[1] = targets[4] = 1.0;
    auto f = [&]() { return sigmoid_bce(logits, targets).loss; };
    Tensor g = sigmoid_bce(logits, targets).grad_logits;
    record("sigmoid_bce", check_grad(logits, g, f));
  }

  // end to end: conv/pool/fc trunk with a softmax head
  {
    NetworkSpec spec;
    spec.input_resolution = 32;
    spec.crop_resolution = 8;
    spec.input_channels = 2;
    spec.trunk = {LayerSpec::Conv(3, 3, 1, 1), LayerSpec::Relu(),
                  LayerSpec::MaxPool(), LayerSpec::Fc(6), LayerSpec::Relu()};
    spec.heads = {{"h", 4, LabelMode::single}};
    ParamStore params = init_params(spec, derive_seed(seed, 0xE2E), 0.3);
    Tensor x = random_tensor({2, 8, 8}, rng);
    const std::size_t label = 1;
    auto f = [&]() {
      Tensor logits =
          forward(spec, params, x, "h", Mode::eval, nullptr, nullptr);
      return softmax_xent(logits, label).loss;
    };
    ForwardCache cache;
    Tensor trunk_out =
        forward_trunk(spec, params, x, Mode::eval, nullptr, &cache);
    Tensor logits = forward_head(params, "h", trunk_out);
    GradStore grads = GradStore::zeros_like(params);
    backward(spec, params, "h", cache, softmax_xent(logits, label).grad_logits,
             grads);
    for (std::size_t i = 0; i < params.entries.size(); ++i) {
      auto& e = params.entries[i];
      record("net_" + e.name + "_w",
             check_grad(e.weight, grads.entries[i].weight, f));
      record("net_" + e.name + "_b",
             check_grad(e.bias, grads.entries[i].bias, f));
    }
  }

  return results;
}

}  // namespace dcn
