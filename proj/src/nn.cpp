#include "ipp/nn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "ipp/grid.hpp"
#include "ipp/rng.hpp"

namespace ipp::nn {

Tensor::Tensor(std::vector<int> dims, double fill) : shape(std::move(dims)) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 1) {
      throw Error("Tensor: dimensions must be positive");
    }
    n *= static_cast<std::size_t>(d);
  }
  data.assign(n, fill);
}

double leaky_relu(double x, double alpha) { return x >= 0.0 ? x : alpha * x; }

QNetArch QNetArch::paper(int num_actions, int input_size) {
  QNetArch a;
  a.input_size = input_size;
  a.num_actions = num_actions;
  return a;
}

QNetArch QNetArch::desk(int num_actions, int input_size) {
  QNetArch a;
  a.input_size = input_size;
  a.conv_channels = {8, 16, 32, 32};
  a.num_actions = num_actions;
  return a;
}

int QNetArch::final_side() const {
  if (input_size < 1) {
    throw Error("QNetArch: input size must be positive");
  }
  int side = input_size;
  for (int l = 0; l < 4; ++l) {
    side = pooled_side(side);
  }
  return side;
}

int QNetArch::flatten_size() const {
  const int side = final_side();
  return side * side * conv_channels[3];
}

std::string QNetArch::fingerprint() const {
  std::ostringstream spec;
  spec << "in:" << in_channels << "x" << input_size << "x" << input_size << "|channels:M,V,P";
  int c = in_channels;
  for (int out : conv_channels) {
    spec << "|conv3x3same:" << c << "->" << out << "|leaky|maxpool2";
    c = out;
  }
  spec << "|flatten:" << flatten_size() << "|dense:1->" << scalar_units << "|leaky|concat|dense:"
       << head_input_size() << "->" << hidden_units << "|leaky|dense:" << hidden_units << "->" << num_actions
       << "|linear|slope:" << leaky_slope;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash_string(spec.str())));
  return buf;
}

namespace {

DenseLayer make_dense(int in, int out) {
  return {in, out, std::vector<double>(static_cast<std::size_t>(in) * out, 0.0),
          std::vector<double>(static_cast<std::size_t>(out), 0.0)};
}

}  // namespace

QNetworkParams::QNetworkParams(const QNetArch& a) : arch(a) {
  if (a.num_actions < 1 || a.in_channels < 1 || a.scalar_units < 1 || a.hidden_units < 1) {
    throw Error("QNetArch: layer sizes must be positive");
  }
  int c = a.in_channels;
  for (std::size_t l = 0; l < 4; ++l) {
    const int out = a.conv_channels[l];
    if (out < 1) {
      throw Error("QNetArch: conv channels must be positive");
    }
    conv[l] = {c, out, std::vector<double>(static_cast<std::size_t>(out) * c * 9, 0.0),
               std::vector<double>(static_cast<std::size_t>(out), 0.0)};
    c = out;
  }
  scalar = make_dense(1, a.scalar_units);
  hidden = make_dense(a.head_input_size(), a.hidden_units);
  output = make_dense(a.hidden_units, a.num_actions);
}

QNetworkParams QNetworkParams::initialize(const QNetArch& arch, std::uint64_t seed) {
  QNetworkParams p(arch);
  Rng rng(seed);
  auto fill = [&](std::vector<double>& w, int fan_in) {
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& x : w) {
      x = dist(rng);
    }
  };
  for (auto& layer : p.conv) {
    fill(layer.weight, layer.in_channels * 9);
  }
  fill(p.scalar.weight, p.scalar.in);
  fill(p.hidden.weight, p.hidden.in);
  fill(p.output.weight, p.output.in);
  return p;
}

std::vector<QNetworkParams::Group> QNetworkParams::groups() {
  std::vector<Group> g;
  for (std::size_t l = 0; l < 4; ++l) {
    g.push_back({"conv" + std::to_string(l) + ".weight", conv[l].weight});
    g.push_back({"conv" + std::to_string(l) + ".bias", conv[l].bias});
  }
  g.push_back({"scalar.weight", scalar.weight});
  g.push_back({"scalar.bias", scalar.bias});
  g.push_back({"hidden.weight", hidden.weight});
  g.push_back({"hidden.bias", hidden.bias});
  g.push_back({"output.weight", output.weight});
  g.push_back({"output.bias", output.bias});
  return g;
}

std::vector<std::span<const double>> QNetworkParams::groups() const {
  std::vector<std::span<const double>> out;
  for (auto& g : const_cast<QNetworkParams*>(this)->groups()) {
    out.emplace_back(g.values.data(), g.values.size());
  }
  return out;
}

std::size_t QNetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& g : groups()) {
    n += g.size();
  }
  return n;
}

void QNetworkParams::set_zero() {
  for (auto& g : groups()) {
    std::fill(g.values.begin(), g.values.end(), 0.0);
  }
}

namespace {

// Same-padded 3x3 convolution, stride 1. in: [C_in][S][S], out: [C_out][S][S].
void conv3x3(const ConvLayer& layer, const double* in, int side, double* out) {
  const int s = side;
  for (int o = 0; o < layer.out_channels; ++o) {
    double* out_o = out + static_cast<std::size_t>(o) * s * s;
    std::fill(out_o, out_o + s * s, layer.bias[o]);
    for (int i = 0; i < layer.in_channels; ++i) {
      const double* in_i = in + static_cast<std::size_t>(i) * s * s;
      const double* w = layer.weight.data() + (static_cast<std::size_t>(o) * layer.in_channels + i) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        const int y0 = std::max(0, -dy);
        const int y1 = std::min(s, s - dy);
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(s, s - dx);
          const double wv = w[ky * 3 + kx];
          for (int y = y0; y < y1; ++y) {
            double* orow = out_o + y * s;
            const double* irow = in_i + (y + dy) * s + dx;
            for (int x = x0; x < x1; ++x) {
              orow[x] += wv * irow[x];
            }
          }
        }
      }
    }
  }
}

void conv3x3_backward(const ConvLayer& layer, const double* in, int side, const double* d_pre, ConvLayer& grad,
                      double* d_in) {
  const int s = side;
  for (int o = 0; o < layer.out_channels; ++o) {
    const double* g_o = d_pre + static_cast<std::size_t>(o) * s * s;
    double bsum = 0.0;
    for (int k = 0; k < s * s; ++k) {
      bsum += g_o[k];
    }
    grad.bias[o] += bsum;
    for (int i = 0; i < layer.in_channels; ++i) {
      const double* in_i = in + static_cast<std::size_t>(i) * s * s;
      double* din_i = d_in != nullptr ? d_in + static_cast<std::size_t>(i) * s * s : nullptr;
      const std::size_t widx = (static_cast<std::size_t>(o) * layer.in_channels + i) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        const int y0 = std::max(0, -dy);
        const int y1 = std::min(s, s - dy);
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(s, s - dx);
          const double wv = layer.weight[widx + ky * 3 + kx];
          double wsum = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double* grow = g_o + y * s;
            const double* irow = in_i + (y + dy) * s + dx;
            for (int x = x0; x < x1; ++x) {
              wsum += grow[x] * irow[x];
            }
            if (din_i != nullptr) {
              double* drow = din_i + (y + dy) * s + dx;
              for (int x = x0; x < x1; ++x) {
                drow[x] += wv * grow[x];
              }
            }
          }
          grad.weight[widx + ky * 3 + kx] += wsum;
        }
      }
    }
  }
}

void dense(const DenseLayer& layer, const double* in, double* out) {
  for (int o = 0; o < layer.out; ++o) {
    const double* w = layer.weight.data() + static_cast<std::size_t>(o) * layer.in;
    double acc = layer.bias[o];
    for (int i = 0; i < layer.in; ++i) {
      acc += w[i] * in[i];
    }
    out[o] = acc;
  }
}

void dense_backward(const DenseLayer& layer, const double* in, const double* d_out, DenseLayer& grad, double* d_in) {
  if (d_in != nullptr) {
    std::fill(d_in, d_in + layer.in, 0.0);
  }
  for (int o = 0; o < layer.out; ++o) {
    const double g = d_out[o];
    grad.bias[o] += g;
    if (g == 0.0) {
      continue;
    }
    const double* w = layer.weight.data() + static_cast<std::size_t>(o) * layer.in;
    double* gw = grad.weight.data() + static_cast<std::size_t>(o) * layer.in;
    for (int i = 0; i < layer.in; ++i) {
      gw[i] += g * in[i];
    }
    if (d_in != nullptr) {
      for (int i = 0; i < layer.in; ++i) {
        d_in[i] += g * w[i];
      }
    }
  }
}

}  // namespace

std::vector<double> forward(const QNetworkParams& params, std::span<const double> planes, double t_norm,
                            ForwardCache* cache) {
  const QNetArch& a = params.arch;
  int side = a.input_size;
  if (planes.size() != static_cast<std::size_t>(a.in_channels) * side * side) {
    throw Error("forward: input planes do not match the network input size");
  }
  a.final_side();
  const double slope = a.leaky_slope;

  std::vector<double> x(planes.begin(), planes.end());
  for (std::size_t l = 0; l < 4; ++l) {
    const ConvLayer& layer = params.conv[l];
    std::vector<double> pre(static_cast<std::size_t>(layer.out_channels) * side * side);
    conv3x3(layer, x.data(), side, pre.data());
    const int half = pooled_side(side);
    std::vector<double> pooled(static_cast<std::size_t>(layer.out_channels) * half * half);
    std::vector<int> argmax(pooled.size());
    for (int c = 0; c < layer.out_channels; ++c) {
      for (int y = 0; y < half; ++y) {
        for (int xx = 0; xx < half; ++xx) {
          int best = (c * side + 2 * y) * side + 2 * xx;
          for (int oy = 0; oy < 2; ++oy) {
            for (int ox = 0; ox < 2; ++ox) {
              if (2 * y + oy >= side || 2 * xx + ox >= side) {
                continue;
              }
              const int idx = (c * side + 2 * y + oy) * side + 2 * xx + ox;
              if (pre[idx] > pre[best]) {
                best = idx;
              }
            }
          }
          const std::size_t out_idx = (static_cast<std::size_t>(c) * half + y) * half + xx;
          argmax[out_idx] = best;
          // LeakyReLU is monotone, so pooling the pre-activation picks the same element.
          pooled[out_idx] = leaky_relu(pre[best], slope);
        }
      }
    }
    if (cache != nullptr) {
      cache->conv_input[l] = Tensor({layer.in_channels, side, side});
      cache->conv_input[l].data = std::move(x);
      cache->conv_pre[l] = Tensor({layer.out_channels, side, side});
      cache->conv_pre[l].data = std::move(pre);
      cache->pool_argmax[l] = std::move(argmax);
    }
    x = std::move(pooled);
    side = half;
  }

  std::vector<double> head_in(static_cast<std::size_t>(a.head_input_size()));
  std::copy(x.begin(), x.end(), head_in.begin());
  std::vector<double> scalar_pre(static_cast<std::size_t>(a.scalar_units));
  dense(params.scalar, &t_norm, scalar_pre.data());
  for (int i = 0; i < a.scalar_units; ++i) {
    head_in[x.size() + static_cast<std::size_t>(i)] = leaky_relu(scalar_pre[i], slope);
  }
  std::vector<double> hidden_pre(static_cast<std::size_t>(a.hidden_units));
  dense(params.hidden, head_in.data(), hidden_pre.data());
  std::vector<double> hidden_out(hidden_pre.size());
  std::transform(hidden_pre.begin(), hidden_pre.end(), hidden_out.begin(),
                 [slope](double v) { return leaky_relu(v, slope); });
  std::vector<double> q(static_cast<std::size_t>(a.num_actions));
  dense(params.output, hidden_out.data(), q.data());

  if (cache != nullptr) {
    cache->scalar_pre = std::move(scalar_pre);
    cache->head_input = std::move(head_in);
    cache->hidden_pre = std::move(hidden_pre);
    cache->hidden_out = std::move(hidden_out);
    cache->t_norm = t_norm;
  }
  return q;
}

void backward(const QNetworkParams& params, const ForwardCache& cache, std::span<const double> d_output,
              Gradients& grads) {
  const QNetArch& a = params.arch;
  if (d_output.size() != static_cast<std::size_t>(a.num_actions)) {
    throw Error("backward: upstream gradient has wrong length");
  }
  const double slope = a.leaky_slope;
  auto d_leaky = [slope](double pre) { return pre >= 0.0 ? 1.0 : slope; };

  std::vector<double> d_hidden_out(static_cast<std::size_t>(a.hidden_units));
  dense_backward(params.output, cache.hidden_out.data(), d_output.data(), grads.output, d_hidden_out.data());
  for (std::size_t i = 0; i < d_hidden_out.size(); ++i) {
    d_hidden_out[i] *= d_leaky(cache.hidden_pre[i]);
  }
  std::vector<double> d_head(static_cast<std::size_t>(a.head_input_size()));
  dense_backward(params.hidden, cache.head_input.data(), d_hidden_out.data(), grads.hidden, d_head.data());

  const std::size_t flat = static_cast<std::size_t>(a.flatten_size());
  std::vector<double> d_scalar(static_cast<std::size_t>(a.scalar_units));
  for (std::size_t i = 0; i < d_scalar.size(); ++i) {
    d_scalar[i] = d_head[flat + i] * d_leaky(cache.scalar_pre[i]);
  }
  dense_backward(params.scalar, &cache.t_norm, d_scalar.data(), grads.scalar, nullptr);

  std::vector<double> d_pooled(d_head.begin(), d_head.begin() + static_cast<std::ptrdiff_t>(flat));
  for (int l = 3; l >= 0; --l) {
    const ConvLayer& layer = params.conv[l];
    const Tensor& pre = cache.conv_pre[l];
    const int side = pre.shape[1];
    std::vector<double> d_pre(pre.numel(), 0.0);
    const auto& argmax = cache.pool_argmax[l];
    for (std::size_t k = 0; k < argmax.size(); ++k) {
      const int idx = argmax[k];
      d_pre[idx] += d_pooled[k] * d_leaky(pre.data[idx]);
    }
    std::vector<double> d_in;
    if (l > 0) {
      d_in.assign(cache.conv_input[l].numel(), 0.0);
    }
    conv3x3_backward(layer, cache.conv_input[l].data.data(), side, d_pre.data(), grads.conv[l],
                     l > 0 ? d_in.data() : nullptr);
    d_pooled = std::move(d_in);
  }
}

Adam::Adam(const QNetworkParams& params, AdamConfig config) : config_(config) {
  for (const auto& g : params.groups()) {
    m_.emplace_back(g.size(), 0.0);
    v_.emplace_back(g.size(), 0.0);
  }
}

bool Adam::step(QNetworkParams& params, const Gradients& grads) {
  const auto g = grads.groups();
  for (const auto& group : g) {
    for (double x : group) {
      if (!std::isfinite(x)) {
        ++skipped_;
        return false;
      }
    }
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  auto p = params.groups();
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p[k].values.size(); ++i) {
      const double gi = g[k][i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gi;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * gi * gi;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[k].values[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
  return true;
}

nlohmann::json params_to_json(const QNetworkParams& params) {
  const QNetArch& a = params.arch;
  nlohmann::json arch{{"input_size", a.input_size},
                      {"in_channels", a.in_channels},
                      {"conv_channels", a.conv_channels},
                      {"scalar_units", a.scalar_units},
                      {"hidden_units", a.hidden_units},
                      {"num_actions", a.num_actions},
                      {"leaky_slope", a.leaky_slope}};
  nlohmann::json weights;
  auto& mutable_params = const_cast<QNetworkParams&>(params);
  for (const auto& g : mutable_params.groups()) {
    weights[g.name] = std::vector<double>(g.values.begin(), g.values.end());
  }
  return {{"arch", arch}, {"fingerprint", a.fingerprint()}, {"channel_order", "M,V,P"}, {"weights", weights}};
}

QNetworkParams params_from_json(const nlohmann::json& j) {
  const auto& ja = j.at("arch");
  QNetArch a;
  a.input_size = ja.at("input_size").get<int>();
  a.in_channels = ja.at("in_channels").get<int>();
  a.conv_channels = ja.at("conv_channels").get<std::array<int, 4>>();
  a.scalar_units = ja.at("scalar_units").get<int>();
  a.hidden_units = ja.at("hidden_units").get<int>();
  a.num_actions = ja.at("num_actions").get<int>();
  a.leaky_slope = ja.at("leaky_slope").get<double>();
  if (j.at("fingerprint").get<std::string>() != a.fingerprint() ||
      j.value("channel_order", std::string()) != "M,V,P") {
    throw Error("checkpoint architecture fingerprint mismatch");
  }
  QNetworkParams p(a);
  const auto& weights = j.at("weights");
  for (auto& g : p.groups()) {
    const auto values = weights.at(g.name).get<std::vector<double>>();
    if (values.size() != g.values.size()) {
      throw Error("checkpoint: parameter group " + g.name + " has wrong size");
    }
    std::copy(values.begin(), values.end(), g.values.begin());
  }
  return p;
}

}  // namespace ipp::nn
