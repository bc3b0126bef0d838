#include "semdrive/policy_net.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

#include "kernels.hpp"

namespace semdrive {

NetArch NetArch::standard() { return NetArch{}; }

NetArch NetArch::reduced() {
  NetArch a;
  a.in_size = 8;
  a.conv1_filters = 2;
  a.conv1_kernel = 4;
  a.conv1_stride = 2;
  a.conv2_filters = 2;
  a.conv2_kernel = 2;
  a.conv2_stride = 1;
  a.hidden = 8;
  return a;
}

void NetArch::validate() const {
  const int fields[] = {in_channels,   in_size,      conv1_filters, conv1_kernel, conv1_stride,
                        conv2_filters, conv2_kernel, conv2_stride,  hidden,       actions};
  if (std::any_of(std::begin(fields), std::end(fields), [](int v) { return v < 1; })) {
    throw std::invalid_argument("network architecture: all dimensions must be >= 1");
  }
  if (conv1_kernel > in_size || conv2_kernel > conv1_out()) {
    throw std::invalid_argument("network architecture: kernel larger than its input");
  }
}

std::string NetArch::id() const {
  return "ac:in=" + std::to_string(in_channels) + "x" + std::to_string(in_size) +
         ",c1=" + std::to_string(conv1_filters) + "k" + std::to_string(conv1_kernel) + "s" +
         std::to_string(conv1_stride) + ",c2=" + std::to_string(conv2_filters) + "k" +
         std::to_string(conv2_kernel) + "s" + std::to_string(conv2_stride) +
         ",fc=" + std::to_string(hidden) + ",act=" + std::to_string(actions);
}

namespace {

class IdParser {
 public:
  explicit IdParser(std::string_view s) : s_(s) {}

  void expect(std::string_view token) {
    if (s_.substr(pos_, token.size()) != token) fail();
    pos_ += token.size();
  }

  int number() {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc{} || ptr == s_.data() + pos_) fail();
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  void finish() const {
    if (pos_ != s_.size()) fail();
  }

 private:
  [[noreturn]] void fail() const {
    throw std::invalid_argument("unrecognized network architecture id: " + std::string(s_));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

NetArch NetArch::from_id(std::string_view id) {
  IdParser p(id);
  NetArch a;
  p.expect("ac:in=");
  a.in_channels = p.number();
  p.expect("x");
  a.in_size = p.number();
  p.expect(",c1=");
  a.conv1_filters = p.number();
  p.expect("k");
  a.conv1_kernel = p.number();
  p.expect("s");
  a.conv1_stride = p.number();
  p.expect(",c2=");
  a.conv2_filters = p.number();
  p.expect("k");
  a.conv2_kernel = p.number();
  p.expect("s");
  a.conv2_stride = p.number();
  p.expect(",fc=");
  a.hidden = p.number();
  p.expect(",act=");
  a.actions = p.number();
  p.finish();
  a.validate();
  return a;
}

std::size_t LayeredArrays::value_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers) n += l.data.size();
  return n;
}

bool LayeredArrays::all_finite() const {
  return std::all_of(layers.begin(), layers.end(), [](const Layer& l) {
    return std::all_of(l.data.begin(), l.data.end(), [](float v) { return std::isfinite(v); });
  });
}

bool LayeredArrays::congruent_with(const LayeredArrays& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name != other.layers[i].name || layers[i].shape != other.layers[i].shape ||
        layers[i].data.size() != other.layers[i].data.size()) {
      return false;
    }
  }
  return true;
}

std::vector<Layer> zero_layers(const NetArch& a) {
  a.validate();
  auto make = [](std::string name, std::vector<int> shape) {
    const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                          [](std::size_t acc, int d) { return acc * d; });
    return Layer{std::move(name), std::move(shape), std::vector<float>(n, 0.0f)};
  };
  std::vector<Layer> layers;
  layers.reserve(kLayerCount);
  layers.push_back(make("conv1.w", {a.conv1_filters, a.in_channels, a.conv1_kernel, a.conv1_kernel}));
  layers.push_back(make("conv1.b", {a.conv1_filters}));
  layers.push_back(make("conv2.w", {a.conv2_filters, a.conv1_filters, a.conv2_kernel, a.conv2_kernel}));
  layers.push_back(make("conv2.b", {a.conv2_filters}));
  layers.push_back(make("fc.w", {a.hidden, a.flat_size()}));
  layers.push_back(make("fc.b", {a.hidden}));
  layers.push_back(make("pi.w", {a.actions, a.hidden}));
  layers.push_back(make("pi.b", {a.actions}));
  layers.push_back(make("v.w", {1, a.hidden}));
  layers.push_back(make("v.b", {1}));
  return layers;
}

NetworkParams zero_params(const NetArch& arch) {
  NetworkParams p;
  p.arch = arch;
  p.layers = zero_layers(arch);
  return p;
}

Gradients zero_gradients(const NetArch& arch) {
  Gradients g;
  g.arch = arch;
  g.layers = zero_layers(arch);
  return g;
}

NetworkParams init_params(std::uint64_t seed, const NetArch& arch) {
  NetworkParams p = zero_params(arch);
  std::mt19937_64 rng(seed);
  for (LayerIndex w : {kConv1W, kConv2W, kFcW, kPolicyW, kValueW}) {
    Layer& layer = p[w];
    const int fan_in = static_cast<int>(layer.data.size()) / layer.shape[0];
    const float bound = static_cast<float>(std::sqrt(6.0 / fan_in));
    std::uniform_real_distribution<float> dist(-bound, bound);
    for (float& v : layer.data) v = dist(rng);
  }
  return p;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<double> stack_to_input(const FrameStack& stack) {
  std::vector<double> input;
  input.reserve(static_cast<std::size_t>(FrameStack::kDepth) * stack.width() * stack.height());
  for (const SemanticFrame& f : stack.frames()) {
    for (float v : f.pixels) input.push_back(v);
  }
  return input;
}

namespace {

void check_finite(std::span<const double> values, const char* layer) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericalError(layer, std::string("non-finite value in layer ") + layer);
    }
  }
}

void relu(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

/// Unrolls every receptive field of a [C,S,S] input into column-major patch
/// rows: patches[(c*K + ky)*K + kx][oy*O + ox].
std::vector<double> im2col(std::span<const double> in, int channels, int size, int kernel,
                           int stride, int out_size) {
  const std::size_t plane = static_cast<std::size_t>(out_size) * out_size;
  std::vector<double> patches(static_cast<std::size_t>(channels) * kernel * kernel * plane);
  double* dst = patches.data();
  for (int c = 0; c < channels; ++c) {
    const double* src = in.data() + static_cast<std::size_t>(c) * size * size;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        for (int oy = 0; oy < out_size; ++oy) {
          const double* row = src + static_cast<std::size_t>(oy * stride + ky) * size + kx;
          for (int ox = 0; ox < out_size; ++ox) *dst++ = row[ox * stride];
        }
      }
    }
  }
  return patches;
}

/// Valid cross-correlation of a [C,S,S] input with [F,C,K,K] weights.
std::vector<double> conv_forward(std::span<const double> in, int channels, int size,
                                 const Layer& w, const Layer& b, int kernel, int stride,
                                 int out_size) {
  const int filters = w.shape[0];
  const std::size_t plane = static_cast<std::size_t>(out_size) * out_size;
  const std::size_t fan_in = static_cast<std::size_t>(channels) * kernel * kernel;
  const std::vector<double> patches = im2col(in, channels, size, kernel, stride, out_size);
  std::vector<double> out(static_cast<std::size_t>(filters) * plane);
  for (int f = 0; f < filters; ++f) {
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(f * plane), plane,
                static_cast<double>(b.data[f]));
  }
  detail::gemm_acc(filters, static_cast<int>(plane), static_cast<int>(fan_in), w.data.data(),
                   patches.data(), out.data());
  return out;
}

/// Accumulates weight/bias gradients of a conv layer and, when `d_in` is
/// non-empty, the gradient with respect to its input.
void conv_backward(std::span<const double> in, int channels, int size, const Layer& w,
                   int kernel, int stride, int out_size, std::span<const double> d_out,
                   std::span<double> dw, std::span<double> db, std::span<double> d_in) {
  const int filters = w.shape[0];
  const std::size_t plane = static_cast<std::size_t>(out_size) * out_size;
  const std::size_t fan_in = static_cast<std::size_t>(channels) * kernel * kernel;
  const std::vector<double> patches = im2col(in, channels, size, kernel, stride, out_size);
  std::vector<double> d_patches(d_in.empty() ? 0 : patches.size(), 0.0);

  for (int f = 0; f < filters; ++f) {
    const double* g = d_out.data() + f * plane;
    double bias_sum = 0.0;
    for (std::size_t p = 0; p < plane; ++p) bias_sum += g[p];
    db[f] += bias_sum;
  }
  detail::gemm_abt_acc(filters, static_cast<int>(fan_in), static_cast<int>(plane), d_out.data(),
                       patches.data(), dw.data());
  if (!d_patches.empty()) {
    detail::gemm_atb_acc(filters, static_cast<int>(fan_in), static_cast<int>(plane),
                         w.data.data(), d_out.data(), d_patches.data());
  }

  if (d_patches.empty()) return;
  const double* src = d_patches.data();
  for (int c = 0; c < channels; ++c) {
    double* dst = d_in.data() + static_cast<std::size_t>(c) * size * size;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        for (int oy = 0; oy < out_size; ++oy) {
          double* row = dst + static_cast<std::size_t>(oy * stride + ky) * size + kx;
          for (int ox = 0; ox < out_size; ++ox) row[ox * stride] += *src++;
        }
      }
    }
  }
}

/// y = W x + b for W of shape [rows, cols].
std::vector<double> dense_forward(std::span<const double> x, const Layer& w, const Layer& b) {
  const int rows = w.shape[0];
  const int cols = w.shape[1];
  std::vector<double> y(b.data.begin(), b.data.end());
  detail::gemv_acc(rows, cols, w.data.data(), x.data(), y.data());
  return y;
}

void dense_backward(std::span<const double> x, const Layer& w, std::span<const double> dy,
                    std::span<double> dw, std::span<double> db, std::span<double> dx) {
  const int rows = w.shape[0];
  const int cols = w.shape[1];
  for (int r = 0; r < rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    db[r] += g;
    double* dwr = dw.data() + static_cast<std::size_t>(r) * cols;
    const float* wr = w.data.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) {
      dwr[c] += g * x[c];
      dx[c] += g * wr[c];
    }
  }
}

}  // namespace

ForwardOutput forward(const NetworkParams& params, const FrameStack& stack) {
  const NetArch& a = params.arch;
  if (stack.width() != a.in_size || stack.height() != a.in_size) {
    throw std::invalid_argument("forward: frame stack is " + std::to_string(stack.width()) + "x" +
                                std::to_string(stack.height()) + ", network expects " +
                                std::to_string(a.in_size) + "x" + std::to_string(a.in_size));
  }
  return forward(params, stack_to_input(stack));
}

ForwardOutput forward(const NetworkParams& params, std::span<const double> input) {
  const NetArch& a = params.arch;
  if (input.size() != static_cast<std::size_t>(a.input_size())) {
    throw std::invalid_argument("forward: input has " + std::to_string(input.size()) +
                                " values, network expects " + std::to_string(a.input_size()));
  }
  for (double v : input) {
    if (!std::isfinite(v)) throw std::invalid_argument("forward: non-finite input value");
  }

  ForwardOutput out;
  ForwardCache& c = out.cache;
  c.input.assign(input.begin(), input.end());

  c.conv1 = conv_forward(c.input, a.in_channels, a.in_size, params[kConv1W], params[kConv1B],
                         a.conv1_kernel, a.conv1_stride, a.conv1_out());
  relu(c.conv1);
  check_finite(c.conv1, "conv1");

  c.conv2 = conv_forward(c.conv1, a.conv1_filters, a.conv1_out(), params[kConv2W],
                         params[kConv2B], a.conv2_kernel, a.conv2_stride, a.conv2_out());
  relu(c.conv2);
  check_finite(c.conv2, "conv2");

  c.hidden = dense_forward(c.conv2, params[kFcW], params[kFcB]);
  relu(c.hidden);
  check_finite(c.hidden, "fc");

  out.logits = dense_forward(c.hidden, params[kPolicyW], params[kPolicyB]);
  check_finite(out.logits, "pi");
  out.policy = softmax(out.logits);

  out.value = dense_forward(c.hidden, params[kValueW], params[kValueB])[0];
  if (!std::isfinite(out.value)) throw NumericalError("v", "non-finite value in layer v");
  return out;
}

LossResult loss_and_grad(const NetworkParams& params, const RolloutBatch& batch,
                         const LossWeights& weights) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("loss_and_grad: empty batch");
  if (batch.actions.size() != n || batch.advantages.size() != n || batch.returns.size() != n) {
    throw std::invalid_argument("loss_and_grad: batch columns have different lengths");
  }
  const NetArch& a = params.arch;

  std::vector<std::vector<double>> acc(kLayerCount);
  for (std::size_t i = 0; i < kLayerCount; ++i) acc[i].assign(params.layers[i].data.size(), 0.0);

  LossResult result;
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t t = 0; t < n; ++t) {
    const ForwardOutput fwd = forward(params, batch.states[t]);
    const ForwardCache& c = fwd.cache;
    const int act = action_index(batch.actions[t]);
    const double adv = batch.advantages[t];
    const double ret = batch.returns[t];

    const double m = *std::max_element(fwd.logits.begin(), fwd.logits.end());
    double z = 0.0;
    for (double l : fwd.logits) z += std::exp(l - m);
    const double log_z = std::log(z);
    std::vector<double> log_pi(fwd.logits.size());
    for (std::size_t j = 0; j < log_pi.size(); ++j) log_pi[j] = fwd.logits[j] - m - log_z;
    const double h = entropy(fwd.policy);
    const double td = ret - fwd.value;

    result.policy_loss += -log_pi[act] * adv * inv_n;
    result.value_loss += td * td * inv_n;
    result.entropy += h * inv_n;

    std::vector<double> d_logits(fwd.logits.size());
    for (std::size_t j = 0; j < d_logits.size(); ++j) {
      const double p = fwd.policy[j];
      const double pg = adv * (p - (static_cast<int>(j) == act ? 1.0 : 0.0));
      const double ent = p > 0.0 ? weights.entropy * p * (log_pi[j] + h) : 0.0;
      d_logits[j] = (pg + ent) * inv_n;
    }
    const double d_value = 2.0 * weights.value * (fwd.value - ret) * inv_n;

    std::vector<double> d_hidden(c.hidden.size(), 0.0);
    dense_backward(c.hidden, params[kPolicyW], d_logits, acc[kPolicyW], acc[kPolicyB], d_hidden);
    const double d_value_arr[1] = {d_value};
    dense_backward(c.hidden, params[kValueW], d_value_arr, acc[kValueW], acc[kValueB], d_hidden);
    for (std::size_t i = 0; i < d_hidden.size(); ++i) {
      if (c.hidden[i] <= 0.0) d_hidden[i] = 0.0;
    }

    std::vector<double> d_conv2(c.conv2.size(), 0.0);
    dense_backward(c.conv2, params[kFcW], d_hidden, acc[kFcW], acc[kFcB], d_conv2);
    for (std::size_t i = 0; i < d_conv2.size(); ++i) {
      if (c.conv2[i] <= 0.0) d_conv2[i] = 0.0;
    }

    std::vector<double> d_conv1(c.conv1.size(), 0.0);
    conv_backward(c.conv1, a.conv1_filters, a.conv1_out(), params[kConv2W], a.conv2_kernel,
                  a.conv2_stride, a.conv2_out(), d_conv2, acc[kConv2W], acc[kConv2B], d_conv1);
    for (std::size_t i = 0; i < d_conv1.size(); ++i) {
      if (c.conv1[i] <= 0.0) d_conv1[i] = 0.0;
    }

    conv_backward(c.input, a.in_channels, a.in_size, params[kConv1W], a.conv1_kernel,
                  a.conv1_stride, a.conv1_out(), d_conv1, acc[kConv1W], acc[kConv1B], {});
  }

  result.loss = result.policy_loss + weights.value * result.value_loss -
                weights.entropy * result.entropy;
  if (!std::isfinite(result.loss)) throw NumericalError("loss", "non-finite loss");

  result.grads = zero_gradients(a);
  for (std::size_t i = 0; i < kLayerCount; ++i) {
    check_finite(acc[i], params.layers[i].name.c_str());
    std::transform(acc[i].begin(), acc[i].end(), result.grads.layers[i].data.begin(),
                   [](double v) { return static_cast<float>(v); });
  }
  return result;
}

}  // namespace semdrive
