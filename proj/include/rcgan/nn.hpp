#pragma once

// Minimal dense networks: forward pass with cached activations, exact
// reverse-mode gradients, Adam, a finite-difference gradient checker and a
// text serialization. Rows of a batch are samples; a layer computes
// act(X Wᵀ + b) with W stored out x in.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rcgan/data.hpp"
#include "rcgan/error.hpp"
#include "rcgan/rng.hpp"
#include "rcgan/text.hpp"

namespace rcgan::nn {

enum class Activation { identity, relu, sigmoid, block_softmax };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::block_softmax: return "block_softmax";
  }
  return "?";
}

inline Activation parse_activation(std::string_view s) {
  if (s == "identity") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "block_softmax") return Activation::block_softmax;
  throw Error(Errc::corrupt_file, "unknown activation '" + std::string(s) + "'");
}

// Contiguous output columns normalized together by a softmax. Under
// block_softmax every column outside a block gets a sigmoid.
struct SoftmaxBlock {
  std::size_t begin = 0;
  std::size_t width = 0;
  bool operator==(const SoftmaxBlock&) const = default;
};

// Softmax blocks mirroring a schema's one-hot layout.
inline std::vector<SoftmaxBlock> softmax_blocks(const Schema& schema) {
  std::vector<SoftmaxBlock> blocks;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema.column(c).is_categorical()) blocks.push_back({schema.offset(c), schema.column(c).categories.size()});
  }
  return blocks;
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct DenseLayer {
  Matrix weights;  // out x in
  Vector biases;   // out
  Activation activation = Activation::identity;
  std::vector<SoftmaxBlock> blocks;

  std::size_t in() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t out() const { return static_cast<std::size_t>(weights.rows()); }

  bool operator==(const DenseLayer& o) const {
    return weights == o.weights && biases == o.biases && activation == o.activation && blocks == o.blocks;
  }
};

struct LayerSpec {
  std::size_t out = 0;
  Activation activation = Activation::identity;
  std::vector<SoftmaxBlock> blocks = {};
};

class Network {
 public:
  Network() = default;

  // Layers chained from `input_width`; weights uniform in
  // ±sqrt(6/(fan_in+fan_out)), biases zero.
  Network(std::size_t input_width, const std::vector<LayerSpec>& specs, Rng& rng) {
    std::size_t in = input_width;
    for (const auto& s : specs) {
      DenseLayer l;
      const double bound = std::sqrt(6.0 / static_cast<double>(in + s.out));
      l.weights.resize(static_cast<Eigen::Index>(s.out), static_cast<Eigen::Index>(in));
      for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = rng.uniform(-bound, bound);
      }
      l.biases = Vector::Zero(static_cast<Eigen::Index>(s.out));
      l.activation = s.activation;
      l.blocks = s.blocks;
      layers_.push_back(std::move(l));
      in = s.out;
    }
    check();
  }

  explicit Network(std::vector<DenseLayer> layers) : layers_(std::move(layers)) { check(); }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }

  // Mutable access invalidates every outstanding forward cache.
  DenseLayer& mutable_layer(std::size_t i) {
    ++version_;
    return layers_.at(i);
  }

  std::size_t input_width() const { return layers_.empty() ? 0 : layers_.front().in(); }
  std::size_t output_width() const { return layers_.empty() ? 0 : layers_.back().out(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.biases.size());
    return n;
  }

  std::uint64_t version() const { return version_; }
  void touch() { ++version_; }

  bool operator==(const Network& o) const { return layers_ == o.layers_; }

 private:
  void check() const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      if (static_cast<std::size_t>(l.biases.size()) != l.out()) {
        throw Error(Errc::structural, "layer " + std::to_string(i) + ": bias size does not match output width");
      }
      if (i > 0 && layers_[i - 1].out() != l.in()) {
        throw Error(Errc::structural, "layer " + std::to_string(i) + ": input width " + std::to_string(l.in()) +
                                          " does not chain with previous output " +
                                          std::to_string(layers_[i - 1].out()));
      }
      std::size_t end = 0;
      for (const auto& b : l.blocks) {
        if (l.activation != Activation::block_softmax) {
          throw Error(Errc::structural, "softmax blocks on a non-softmax layer");
        }
        if (b.width == 0 || b.begin < end || b.begin + b.width > l.out()) {
          throw Error(Errc::structural, "layer " + std::to_string(i) + ": invalid softmax block layout");
        }
        end = b.begin + b.width;
      }
    }
  }

  std::vector<DenseLayer> layers_;
  std::uint64_t version_ = 0;
};

// Per-layer inputs and post-activation outputs of one forward pass.
struct ForwardCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> outputs;
  std::uint64_t version = 0;
  const Network* owner = nullptr;

  bool valid_for(const Network& net) const {
    return owner == &net && version == net.version() && outputs.size() == net.layers().size();
  }
  const Matrix& output() const { return outputs.back(); }
};

inline void apply_activation(const DenseLayer& l, Matrix& z) {
  switch (l.activation) {
    case Activation::identity: break;
    case Activation::relu: z = z.cwiseMax(0.0); break;
    case Activation::sigmoid: z = z.unaryExpr([](double x) { return sigmoid(x); }); break;
    case Activation::block_softmax: {
      std::vector<bool> in_block(l.out(), false);
      for (const auto& b : l.blocks) {
        for (std::size_t k = 0; k < b.width; ++k) in_block[b.begin + k] = true;
      }
      for (std::size_t c = 0; c < l.out(); ++c) {
        if (!in_block[c]) {
          auto col = z.col(static_cast<Eigen::Index>(c));
          col = col.unaryExpr([](double x) { return sigmoid(x); });
        }
      }
      for (const auto& b : l.blocks) {
        auto block = z.middleCols(static_cast<Eigen::Index>(b.begin), static_cast<Eigen::Index>(b.width));
        for (Eigen::Index r = 0; r < block.rows(); ++r) {
          auto row = block.row(r);
          const double m = row.maxCoeff();
          row = (row.array() - m).exp().matrix();
          row /= row.sum();
        }
      }
      break;
    }
  }
}

// dL/dz from dL/dy, using the layer's post-activation output y.
inline Matrix activation_backward(const DenseLayer& l, const Matrix& y, const Matrix& dy) {
  switch (l.activation) {
    case Activation::identity: return dy;
    case Activation::relu: return (y.array() > 0.0).select(dy, 0.0);
    case Activation::sigmoid: return (dy.array() * y.array() * (1.0 - y.array())).matrix();
    case Activation::block_softmax: {
      Matrix dz = (dy.array() * y.array() * (1.0 - y.array())).matrix();
      for (const auto& b : l.blocks) {
        const auto off = static_cast<Eigen::Index>(b.begin);
        const auto w = static_cast<Eigen::Index>(b.width);
        const auto yb = y.middleCols(off, w).array();
        const auto gb = dy.middleCols(off, w).array();
        const Vector dot = (yb * gb).rowwise().sum();
        dz.middleCols(off, w) = (yb * (gb.colwise() - dot.array())).matrix();
      }
      return dz;
    }
  }
  return dy;
}

inline Matrix forward(const Network& net, const Matrix& batch, ForwardCache* cache = nullptr) {
  if (net.layers().empty()) throw Error(Errc::structural, "forward on an empty network");
  if (static_cast<std::size_t>(batch.cols()) != net.input_width()) {
    throw Error(Errc::structural, "batch width " + std::to_string(batch.cols()) + " does not match network input " +
                                      std::to_string(net.input_width()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->outputs.clear();
    cache->owner = &net;
    cache->version = net.version();
  }
  Matrix x = batch;
  for (const auto& l : net.layers()) {
    Matrix z = x * l.weights.transpose();
    z.rowwise() += l.biases.transpose();
    apply_activation(l, z);
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->outputs.push_back(z);
    }
    x = std::move(z);
  }
  return x;
}

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static Gradients zeros_like(const Network& net) {
    Gradients g;
    for (const auto& l : net.layers()) {
      g.weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
      g.biases.push_back(Vector::Zero(l.biases.size()));
    }
    return g;
  }

  Gradients& operator+=(const Gradients& o) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      weights[i] += o.weights[i];
      biases[i] += o.biases[i];
    }
    return *this;
  }
};

struct BackwardResult {
  Gradients params;
  Matrix input;  // dL/d(batch)
};

// Exact gradients of the cached forward pass given dL/d(output).
inline BackwardResult backward(const Network& net, const ForwardCache& cache, const Matrix& upstream) {
  if (!cache.valid_for(net)) {
    throw Error(Errc::usage, "backward needs a forward cache from the current parameters of this network");
  }
  const auto& out = cache.output();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols()) {
    throw Error(Errc::structural, "upstream gradient shape does not match the network output");
  }
  const std::size_t n = net.layers().size();
  BackwardResult res;
  res.params.weights.resize(n);
  res.params.biases.resize(n);
  Matrix grad = upstream;
  for (std::size_t i = n; i-- > 0;) {
    const auto& l = net.layer(i);
    const Matrix dz = activation_backward(l, cache.outputs[i], grad);
    res.params.weights[i] = dz.transpose() * cache.inputs[i];
    res.params.biases[i] = dz.colwise().sum().transpose();
    grad = dz * l.weights;
  }
  res.input = std::move(grad);
  return res;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool operator==(const AdamConfig&) const = default;
};

struct OptimizerState {
  AdamConfig config;
  Gradients m;
  Gradients v;
  std::uint64_t step = 0;

  OptimizerState() = default;
  OptimizerState(const Network& net, AdamConfig cfg)
      : config(cfg), m(Gradients::zeros_like(net)), v(Gradients::zeros_like(net)) {}
};

// Bias-corrected Adam update in place. The name of the offending layer is
// reported when a gradient is not finite; parameters are left untouched then.
inline void adam_step(Network& net, const Gradients& g, OptimizerState& st, std::string_view net_name = "network") {
  const std::size_t n = net.layers().size();
  if (g.weights.size() != n || st.m.weights.size() != n) {
    throw Error(Errc::structural, "gradient/optimizer state does not match the network");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (g.weights[i].rows() != net.layer(i).weights.rows() || g.weights[i].cols() != net.layer(i).weights.cols() ||
        g.biases[i].size() != net.layer(i).biases.size()) {
      throw Error(Errc::structural, "gradient shape mismatch at layer " + std::to_string(i));
    }
    if (!g.weights[i].allFinite() || !g.biases[i].allFinite()) {
      throw Error(Errc::training, "non-finite gradient in " + std::string(net_name) + " layer " + std::to_string(i));
    }
  }
  const auto& c = st.config;
  ++st.step;
  const double t = static_cast<double>(st.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  const auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
    param.array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
  };
  for (std::size_t i = 0; i < n; ++i) {
    auto& l = net.mutable_layer(i);
    update(l.weights, st.m.weights[i], st.v.weights[i], g.weights[i]);
    update(l.biases, st.m.biases[i], st.v.biases[i], g.biases[i]);
  }
}

// ---------------------------------------------------------------------------
// Gradient checking

// Scalar loss over the network output; writes dL/d(output) into `grad`.
using LossFn = std::function<double(const Matrix& output, Matrix& grad)>;

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

// Visits every parameter as a mutable reference, in layer order (weights
// row-major, then biases).
template <class F>
void for_each_parameter(Network& net, F&& f) {
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    auto& l = net.mutable_layer(i);
    for (Eigen::Index k = 0; k < l.weights.size(); ++k) f(i, l.weights.data()[k]);
    for (Eigen::Index k = 0; k < l.biases.size(); ++k) f(i, l.biases.data()[k]);
  }
}

template <class F>
void for_each_gradient(const Gradients& g, F&& f) {
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    for (Eigen::Index k = 0; k < g.weights[i].size(); ++k) f(g.weights[i].data()[k]);
    for (Eigen::Index k = 0; k < g.biases[i].size(); ++k) f(g.biases[i].data()[k]);
  }
}

// Central differences with step h against backward(); returns the max
// relative error |a - n| / max(|a|, |n|, 1e-8) over all parameters.
inline double grad_check(const Network& net, const LossFn& loss, const Matrix& batch, double h = 1e-4) {
  Network probe = net;
  ForwardCache cache;
  const Matrix out = forward(probe, batch, &cache);
  Matrix dout = Matrix::Zero(out.rows(), out.cols());
  loss(out, dout);
  const auto analytic = backward(probe, cache, dout).params;

  std::vector<double> a;
  for_each_gradient(analytic, [&](double g) { a.push_back(g); });

  Matrix scratch;
  const auto eval = [&](const Network& n) {
    const Matrix o = forward(n, batch);
    scratch = Matrix::Zero(o.rows(), o.cols());
    return loss(o, scratch);
  };

  double worst = 0.0;
  std::size_t idx = 0;
  // Copy the parameter addresses first; mutable_layer() only bumps the version.
  std::vector<double*> params;
  for_each_parameter(probe, [&](std::size_t, double& p) { params.push_back(&p); });
  for (double* p : params) {
    const double saved = *p;
    *p = saved + h;
    probe.touch();
    const double up = eval(probe);
    *p = saved - h;
    probe.touch();
    const double down = eval(probe);
    *p = saved;
    probe.touch();
    worst = std::max(worst, relative_error(a[idx++], (up - down) / (2.0 * h)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Serialization (key=value records; parameters at shortest round-trip
// precision so a save/load cycle is exact).

inline void write_network(text::KvWriter& w, const Network& net) {
  w.put("layers", static_cast<std::uint64_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    w.put("in", static_cast<std::uint64_t>(l.in()));
    w.put("out", static_cast<std::uint64_t>(l.out()));
    w.put("activation", activation_name(l.activation));
    w.put("blocks", static_cast<std::uint64_t>(l.blocks.size()));
    for (const auto& b : l.blocks) {
      w.put("block", std::to_string(b.begin) + " " + std::to_string(b.width));
    }
    w.put_doubles("weights", l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    w.put_doubles("biases", l.biases.data(), static_cast<std::size_t>(l.biases.size()));
  }
}

inline Network read_network(text::KvReader& r) {
  const auto n = r.next_uint("layers");
  std::vector<DenseLayer> layers;
  for (std::uint64_t i = 0; i < n; ++i) {
    DenseLayer l;
    const auto in = r.next_uint("in");
    const auto out = r.next_uint("out");
    l.activation = parse_activation(r.next("activation"));
    const auto nb = r.next_uint("blocks");
    for (std::uint64_t b = 0; b < nb; ++b) {
      const auto& v = r.next("block");
      const auto sp = v.find(' ');
      auto begin = text::parse_uint(std::string_view(v).substr(0, sp));
      auto width = sp == std::string::npos ? std::nullopt : text::parse_uint(std::string_view(v).substr(sp + 1));
      if (!begin || !width) throw Error(Errc::corrupt_file, r.what() + ": bad softmax block");
      l.blocks.push_back({*begin, *width});
    }
    const auto w = r.next_doubles("weights", in * out);
    const auto b = r.next_doubles("biases", out);
    l.weights = Eigen::Map<const Matrix>(w.data(), static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    l.biases = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(out));
    layers.push_back(std::move(l));
  }
  try {
    return Network(std::move(layers));
  } catch (const Error& e) {
    throw Error(Errc::corrupt_file, r.what() + ": " + e.what());
  }
}

}  // namespace rcgan::nn
