#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semdrive/render.hpp"
#include "semdrive/sim.hpp"

namespace semdrive {

/// Shared trunk conv -> conv -> dense, then a policy head and a value head.
/// All activations are ReLU except the heads.
struct NetArch {
  int in_channels = FrameStack::kDepth;
  int in_size = 64;
  int conv1_filters = 16;
  int conv1_kernel = 8;
  int conv1_stride = 4;
  int conv2_filters = 32;
  int conv2_kernel = 4;
  int conv2_stride = 2;
  int hidden = 256;
  int actions = kActionCount;

  /// 4x64x64 input, 16@8x8/4, 32@4x4/2, 256 hidden, 9 actions.
  static NetArch standard();
  /// 4x8x8 input, 2@4x4/2, 2@2x2/1, 8 hidden; used for gradient checking.
  static NetArch reduced();

  int conv1_out() const { return (in_size - conv1_kernel) / conv1_stride + 1; }
  int conv2_out() const { return (conv1_out() - conv2_kernel) / conv2_stride + 1; }
  int flat_size() const { return conv2_filters * conv2_out() * conv2_out(); }
  int input_size() const { return in_channels * in_size * in_size; }

  void validate() const;

  /// Compact string form stored in checkpoints, e.g.
  /// "ac:in=4x64,c1=16k8s4,c2=32k4s2,fc=256,act=9".
  std::string id() const;
  static NetArch from_id(std::string_view id);

  friend bool operator==(const NetArch&, const NetArch&) = default;
};

enum LayerIndex : std::size_t {
  kConv1W,
  kConv1B,
  kConv2W,
  kConv2B,
  kFcW,
  kFcB,
  kPolicyW,
  kPolicyB,
  kValueW,
  kValueB,
  kLayerCount
};

struct Layer {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;

  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Ordered named arrays shaped for `arch`: conv1.w [F1,C,K1,K1], conv1.b,
/// conv2.w [F2,F1,K2,K2], conv2.b, fc.w [H,flat], fc.b, pi.w [A,H], pi.b,
/// v.w [1,H], v.b.
struct LayeredArrays {
  NetArch arch;
  std::vector<Layer> layers;

  Layer& operator[](LayerIndex i) { return layers[i]; }
  const Layer& operator[](LayerIndex i) const { return layers[i]; }

  std::size_t value_count() const;
  bool all_finite() const;
  bool congruent_with(const LayeredArrays& other) const;

  friend bool operator==(const LayeredArrays&, const LayeredArrays&) = default;
};

struct NetworkParams : LayeredArrays {};
struct Gradients : LayeredArrays {};

std::vector<Layer> zero_layers(const NetArch& arch);
NetworkParams zero_params(const NetArch& arch);
Gradients zero_gradients(const NetArch& arch);

/// He-uniform weights (bound sqrt(6 / fan_in)), zero biases.
NetworkParams init_params(std::uint64_t seed, const NetArch& arch = NetArch::standard());

/// Raised when an activation, loss, or gradient stops being finite.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string layer, const std::string& what)
      : std::runtime_error(what), layer_(std::move(layer)) {}
  const std::string& layer() const { return layer_; }

 private:
  std::string layer_;
};

struct ForwardCache {
  std::vector<double> input;   // C x S x S
  std::vector<double> conv1;   // post-ReLU
  std::vector<double> conv2;   // post-ReLU
  std::vector<double> hidden;  // post-ReLU
};

struct ForwardOutput {
  std::vector<double> logits;
  std::vector<double> policy;
  double value = 0.0;
  ForwardCache cache;
};

/// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(std::span<const double> logits);

/// Shannon entropy in nats; zero-probability entries contribute nothing.
double entropy(std::span<const double> probs);

/// Flattens a stack into network input order (frame, row, col).
std::vector<double> stack_to_input(const FrameStack& stack);

/// Throws std::invalid_argument on shape mismatch or non-finite input.
ForwardOutput forward(const NetworkParams& params, const FrameStack& stack);
ForwardOutput forward(const NetworkParams& params, std::span<const double> input);

struct RolloutBatch {
  std::vector<FrameStack> states;
  std::vector<Action> actions;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return states.size(); }
};

struct LossWeights {
  double value = 0.5;
  double entropy = 0.01;
};

struct LossResult {
  double loss = 0.0;
  double policy_loss = 0.0;  // mean of -log pi(a|s) * A
  double value_loss = 0.0;   // mean of (R - V)^2, unweighted
  double entropy = 0.0;      // mean policy entropy
  Gradients grads;
};

/// Mean over the batch of
///   -log pi(a_t|s_t) A_t + c_v (R_t - V(s_t))^2 - c_e H(pi(.|s_t))
/// with exact gradients for every parameter. Advantages are constants.
LossResult loss_and_grad(const NetworkParams& params, const RolloutBatch& batch,
                         const LossWeights& weights);

}  // namespace semdrive
