#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

namespace ipp::nn {

/// Row-major dense tensor of doubles.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> dims, double fill = 0.0);
  std::size_t numel() const { return data.size(); }
};

double leaky_relu(double x, double alpha = 0.01);

/// 2x2 max pooling output side, ceil mode.
constexpr int pooled_side(int side) { return (side + 1) / 2; }

/// Layer layout of the Q-network: four 3x3 same-padded conv layers each followed by LeakyReLU and
/// 2x2 max pooling, a dense embedding of the scalar step input, and a two-layer dense head.
struct QNetArch {
  int input_size = 32;  // H = W
  int in_channels = 3;  // (M, V, P)
  std::array<int, 4> conv_channels{64, 128, 256, 256};
  int scalar_units = 8;
  int hidden_units = 1024;
  int num_actions = 2;
  double leaky_slope = 0.01;

  static QNetArch paper(int num_actions, int input_size = 32);
  static QNetArch desk(int num_actions, int input_size = 16);

  /// Spatial side after the four pools (windows clipped at an odd border).
  int final_side() const;
  int flatten_size() const;
  int head_input_size() const { return flatten_size() + scalar_units; }
  /// Stable hash of the layer list and channel ordering.
  std::string fingerprint() const;
};

struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<double> weight;  // [out][in][3][3]
  std::vector<double> bias;    // [out]
};

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weight;  // [out][in]
  std::vector<double> bias;    // [out]
};

/// Network weights. Also used as the gradient container (same shapes).
struct QNetworkParams {
  QNetArch arch;
  std::array<ConvLayer, 4> conv;
  DenseLayer scalar;
  DenseLayer hidden;
  DenseLayer output;

  /// Zero-initialized parameters for arch; throws on an incompatible input size.
  explicit QNetworkParams(const QNetArch& arch = {});

  /// He-uniform weights, zero biases.
  static QNetworkParams initialize(const QNetArch& arch, std::uint64_t seed);

  struct Group {
    std::string name;
    std::span<double> values;
  };
  std::vector<Group> groups();
  std::vector<std::span<const double>> groups() const;
  std::size_t parameter_count() const;
  void set_zero();
};

using Gradients = QNetworkParams;

/// Activations retained by a forward pass for backpropagation.
struct ForwardCache {
  std::array<Tensor, 4> conv_input;
  std::array<Tensor, 4> conv_pre;        // pre-activation
  std::array<std::vector<int>, 4> pool_argmax;  // flat index into conv_pre per pooled output
  std::vector<double> scalar_pre;
  std::vector<double> head_input;
  std::vector<double> hidden_pre;
  std::vector<double> hidden_out;
  double t_norm = 0.0;
};

/// planes: in_channels x input_size x input_size, channel-major.
std::vector<double> forward(const QNetworkParams& params, std::span<const double> planes, double t_norm,
                            ForwardCache* cache = nullptr);

/// Accumulates d(loss)/d(params) into grads given d(loss)/d(output).
void backward(const QNetworkParams& params, const ForwardCache& cache, std::span<const double> d_output,
              Gradients& grads);

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const QNetworkParams& params, AdamConfig config = {});

  /// Returns false (and counts a skip) when any gradient is non-finite.
  bool step(QNetworkParams& params, const Gradients& grads);
  long skipped() const { return skipped_; }
  long steps() const { return steps_; }

 private:
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long steps_ = 0;
  long skipped_ = 0;
};

nlohmann::json params_to_json(const QNetworkParams& params);
QNetworkParams params_from_json(const nlohmann::json& j);

}  // namespace ipp::nn
