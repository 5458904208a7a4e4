#pragma once

// Causal framewise count classifiers (GRU, TCN) and the SCW1 weight format.
//
// SCW1 layout (little-endian):
//   "SCW1" | version u32 = 1 | kind u8 (0 GRU, 1 TCN) | input_dim u32 | n_classes u32
//   tensor_count u32
//   per tensor: name_len u16 | name | ndim u8 | dims u32[ndim] | f32 data, row-major
//
// Canonical tensor names, in canonical order:
//   GRU, per layer l:  gru.l{l}.{W_z,U_z,b_z,W_r,U_r,b_r,W_h,U_h,b_h}
//                      W_* (hidden, in), U_* (hidden, hidden), b_* (hidden)
//   TCN:               tcn.in.weight (bottleneck, input_dim), tcn.in.bias (bottleneck)
//                      per stack s, block b:  tcn.s{s}.b{b}.
//                        conv1.weight (hidden, bottleneck), conv1.bias (hidden),
//                        prelu1.weight (1), norm1.gamma (hidden), norm1.beta (hidden),
//                        dw.weight (hidden, kernel), dw.bias (hidden),
//                        prelu2.weight (1), norm2.gamma (hidden), norm2.beta (hidden),
//                        conv2.weight (bottleneck, hidden), conv2.bias (bottleneck)
//   both:              head.weight (n_classes, width), head.bias (n_classes)
//
// dw.weight[c][j] multiplies the input d * (kernel - 1 - j) frames in the past.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sccount/binary_io.hpp"
#include "sccount/errors.hpp"

namespace sccount {

enum class ModelKind : std::uint8_t { gru = 0, tcn = 1 };

struct ModelSpec {
  ModelKind kind = ModelKind::gru;
  std::size_t input_dim = 802;
  std::size_t n_classes = 5;
  // GRU
  std::size_t gru_layers = 3;
  std::size_t gru_hidden = 401;
  // TCN
  std::size_t tcn_stacks = 3;
  std::size_t tcn_layers = 3;
  std::size_t tcn_kernel = 3;
  std::size_t tcn_bottleneck = 128;
  std::size_t tcn_hidden = 256;

  static ModelSpec defaults(ModelKind kind, std::size_t input_dim, std::size_t n_classes = 5) {
    ModelSpec s;
    s.kind = kind;
    s.input_dim = input_dim;
    s.n_classes = n_classes;
    s.gru_hidden = input_dim / 2;
    return s;
  }

  std::size_t dilation(std::size_t layer) const { return std::size_t{1} << layer; }

  std::size_t receptive_field() const {
    std::size_t rf = 1;
    for (std::size_t s = 0; s < tcn_stacks; ++s)
      for (std::size_t l = 0; l < tcn_layers; ++l) rf += dilation(l) * (tcn_kernel - 1);
    return rf;
  }
};

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t numel() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
};

struct TensorShape {
  std::string name;
  std::vector<std::uint32_t> dims;
};

inline std::vector<TensorShape> canonical_layout(const ModelSpec& s) {
  auto u = [](std::size_t v) { return static_cast<std::uint32_t>(v); };
  std::vector<TensorShape> out;
  std::size_t width = 0;
  if (s.kind == ModelKind::gru) {
    const auto h = u(s.gru_hidden);
    for (std::size_t l = 0; l < s.gru_layers; ++l) {
      const auto in = u(l == 0 ? s.input_dim : s.gru_hidden);
      const std::string p = "gru.l" + std::to_string(l) + ".";
      for (const char* g : {"z", "r", "h"}) {
        out.push_back({p + "W_" + g, {h, in}});
        out.push_back({p + "U_" + g, {h, h}});
        out.push_back({p + "b_" + g, {h}});
      }
    }
    width = s.gru_hidden;
  } else {
    const auto bn = u(s.tcn_bottleneck);
    const auto hd = u(s.tcn_hidden);
    out.push_back({"tcn.in.weight", {bn, u(s.input_dim)}});
    out.push_back({"tcn.in.bias", {bn}});
    for (std::size_t st = 0; st < s.tcn_stacks; ++st)
      for (std::size_t b = 0; b < s.tcn_layers; ++b) {
        const std::string p = "tcn.s" + std::to_string(st) + ".b" + std::to_string(b) + ".";
        out.push_back({p + "conv1.weight", {hd, bn}});
        out.push_back({p + "conv1.bias", {hd}});
        out.push_back({p + "prelu1.weight", {1}});
        out.push_back({p + "norm1.gamma", {hd}});
        out.push_back({p + "norm1.beta", {hd}});
        out.push_back({p + "dw.weight", {hd, u(s.tcn_kernel)}});
        out.push_back({p + "dw.bias", {hd}});
        out.push_back({p + "prelu2.weight", {1}});
        out.push_back({p + "norm2.gamma", {hd}});
        out.push_back({p + "norm2.beta", {hd}});
        out.push_back({p + "conv2.weight", {bn, hd}});
        out.push_back({p + "conv2.bias", {bn}});
      }
    width = s.tcn_bottleneck;
  }
  out.push_back({"head.weight", {u(s.n_classes), u(width)}});
  out.push_back({"head.bias", {u(s.n_classes)}});
  return out;
}

class CountModel {
 public:
  CountModel() = default;
  CountModel(ModelSpec spec, std::map<std::string, Tensor> tensors)
      : spec_(spec), tensors_(std::move(tensors)) {
    validate();
  }

  // Random weights with a Xavier-like scale; used for fixtures and benches.
  static CountModel random(const ModelSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::map<std::string, Tensor> t;
    for (const auto& shape : canonical_layout(spec)) {
      Tensor x{shape.dims, {}};
      x.data.resize(x.numel());
      const bool gain = shape.name.ends_with("gamma");
      const bool prelu = shape.name.find("prelu") != std::string::npos;
      const double fan_in = shape.dims.size() > 1 ? static_cast<double>(shape.dims[1]) : 1.0;
      std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
      const float scale = static_cast<float>(1.0 / std::sqrt(fan_in));
      for (auto& v : x.data) {
        if (gain) v = 1.0f + 0.1f * dist(rng);
        else if (prelu) v = 0.25f;
        else v = scale * dist(rng);
      }
      t.emplace(shape.name, std::move(x));
    }
    return CountModel(spec, std::move(t));
  }

  const ModelSpec& spec() const { return spec_; }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  const Tensor& tensor(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw FormatError("model: missing tensor " + name);
    return it->second;
  }
  std::span<const float> data(const std::string& name) const { return tensor(name).data; }

 private:
  void validate() const {
    for (const auto& shape : canonical_layout(spec_)) {
      auto it = tensors_.find(shape.name);
      if (it == tensors_.end()) throw FormatError("model: missing tensor " + shape.name);
      if (it->second.dims != shape.dims) {
        std::string got;
        for (auto d : it->second.dims) got += (got.empty() ? "" : "x") + std::to_string(d);
        std::string want;
        for (auto d : shape.dims) want += (want.empty() ? "" : "x") + std::to_string(d);
        throw FormatError("model: shape mismatch for " + shape.name + ": got " + got + ", expected " + want);
      }
      if (it->second.data.size() != it->second.numel())
        throw FormatError("model: data size mismatch for " + shape.name);
      for (float v : it->second.data)
        if (!std::isfinite(v)) throw FormatError("model: non-finite value in " + shape.name);
    }
  }

  ModelSpec spec_;
  std::map<std::string, Tensor> tensors_;
};

inline void save_weights(std::ostream& os, const CountModel& model) {
  const auto& s = model.spec();
  os.write("SCW1", 4);
  detail::write_pod<std::uint32_t>(os, 1);
  detail::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(s.kind));
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.input_dim));
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.n_classes));
  const auto layout = canonical_layout(s);
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(layout.size()));
  for (const auto& shape : layout) {
    const auto& t = model.tensor(shape.name);
    detail::write_pod<std::uint16_t>(os, static_cast<std::uint16_t>(shape.name.size()));
    os.write(shape.name.data(), static_cast<std::streamsize>(shape.name.size()));
    detail::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) detail::write_pod<std::uint32_t>(os, d);
    os.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
}

inline void save_weights(const std::string& path, const CountModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write weight file " + path);
  save_weights(os, model);
}

inline CountModel load_weights(std::istream& is) {
  char magic[4] = {};
  if (!is.read(magic, 4)) throw FormatError("weight file: truncated header");
  if (std::memcmp(magic, "SCW1", 4) != 0) throw FormatError("weight file: bad magic");
  const auto version = detail::read_pod<std::uint32_t>(is, "version");
  if (version != 1) throw FormatError("weight file: unsupported version " + std::to_string(version));
  const auto kind = detail::read_pod<std::uint8_t>(is, "kind");
  if (kind > 1) throw FormatError("weight file: unknown model kind " + std::to_string(kind));
  const auto input_dim = detail::read_pod<std::uint32_t>(is, "input_dim");
  const auto n_classes = detail::read_pod<std::uint32_t>(is, "n_classes");
  if (input_dim == 0 || n_classes == 0) throw FormatError("weight file: zero dimension in header");
  const ModelSpec spec = ModelSpec::defaults(static_cast<ModelKind>(kind), input_dim, n_classes);

  const auto count = detail::read_pod<std::uint32_t>(is, "tensor count");
  std::map<std::string, Tensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = detail::read_pod<std::uint16_t>(is, "name length");
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw FormatError("weight file: truncated tensor name");
    Tensor t;
    const auto ndim = detail::read_pod<std::uint8_t>(is, "ndim");
    for (std::uint8_t d = 0; d < ndim; ++d) t.dims.push_back(detail::read_pod<std::uint32_t>(is, "dims"));
    t.data.resize(t.numel());
    if (!is.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * sizeof(float))))
      throw FormatError("weight file: truncated data for " + name);
    if (!tensors.emplace(name, std::move(t)).second) throw FormatError("weight file: duplicate tensor " + name);
  }
  return CountModel(spec, std::move(tensors));
}

inline CountModel load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open weight file " + path);
  return load_weights(is);
}

// ---------------------------------------------------------------------------
// Shared numerics

namespace detail {

// y = W x + b, W row-major (rows, cols).
inline void affine(std::span<const float> w, std::span<const float> b, std::span<const float> x,
                   std::span<float> y) {
  const std::size_t rows = y.size();
  const std::size_t cols = x.size();
  for (std::size_t r = 0; r < rows; ++r) {
    const float* wr = w.data() + r * cols;
    float acc = b.empty() ? 0.0f : b[r];
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

inline float sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }

}  // namespace detail

inline std::vector<float> softmax(std::span<const float> logits) {
  detail::require(!logits.empty(), "softmax: empty input");
  const float mx = *std::max_element(logits.begin(), logits.end());
  std::vector<float> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (auto& v : p) v = static_cast<float>(v / sum);
  return p;
}

// Most likely class; ties go to the smallest index.
inline int argmax_count(std::span<const float> probs) {
  detail::require(!probs.empty(), "argmax_count: empty probabilities");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return static_cast<int>(best);
}

// ---------------------------------------------------------------------------
// GRU

class GruStream {
 public:
  explicit GruStream(const CountModel& model) : model_(&model) {
    const auto& s = model.spec();
    detail::require(s.kind == ModelKind::gru, "GruStream: model is not a GRU");
    hidden_.assign(s.gru_layers, std::vector<float>(s.gru_hidden, 0.0f));
    z_.resize(s.gru_hidden);
    r_.resize(s.gru_hidden);
    c_.resize(s.gru_hidden);
    tmp_.resize(s.gru_hidden);
    rh_.resize(s.gru_hidden);
    logits_.resize(s.n_classes);
    for (std::size_t l = 0; l < s.gru_layers; ++l) {
      const std::string p = "gru.l" + std::to_string(l) + ".";
      Layer layer;
      for (int g = 0; g < 3; ++g) {
        const std::string n = std::string(1, "zrh"[g]);
        layer.W[g] = model.data(p + "W_" + n);
        layer.U[g] = model.data(p + "U_" + n);
        layer.b[g] = model.data(p + "b_" + n);
      }
      layers_.push_back(layer);
    }
  }

  void reset() {
    for (auto& h : hidden_) std::fill(h.begin(), h.end(), 0.0f);
  }

  const std::vector<std::vector<float>>& hidden() const { return hidden_; }

  // One frame in, class probabilities out.
  std::vector<float> step(std::span<const float> x) {
    const auto& s = model_->spec();
    detail::require(x.size() == s.input_dim, "GruStream: input dimension mismatch");
    std::span<const float> in = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      auto& h = hidden_[l];
      const auto& L = layers_[l];
      gate(L, 0, in, h, z_);
      gate(L, 1, in, h, r_);
      for (std::size_t i = 0; i < h.size(); ++i) {
        z_[i] = detail::sigmoid(z_[i]);
        rh_[i] = detail::sigmoid(r_[i]) * h[i];
      }
      gate(L, 2, in, rh_, c_);
      for (std::size_t i = 0; i < h.size(); ++i) h[i] = (1.0f - z_[i]) * h[i] + z_[i] * std::tanh(c_[i]);
      in = h;
    }
    detail::affine(model_->data("head.weight"), model_->data("head.bias"), in, logits_);
    return softmax(logits_);
  }

 private:
  struct Layer {
    std::span<const float> W[3], U[3], b[3];
  };

  // out = W_g x + U_g h + b_g
  void gate(const Layer& L, int g, std::span<const float> x, std::span<const float> h, std::vector<float>& out) {
    detail::affine(L.W[g], L.b[g], x, out);
    detail::affine(L.U[g], {}, h, tmp_);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += tmp_[i];
  }

  const CountModel* model_;
  std::vector<Layer> layers_;
  std::vector<std::vector<float>> hidden_;
  std::vector<float> z_, r_, c_, tmp_, rh_, logits_;
};

// ---------------------------------------------------------------------------
// TCN

namespace detail {

inline constexpr float kNormEps = 1e-5f;

inline void prelu(std::span<float> x, float slope) {
  for (auto& v : x) v = v >= 0.0f ? v : slope * v;
}

// Normalises one frame across channels, then applies per-channel gain/bias.
inline void channel_norm(std::span<float> x, std::span<const float> gamma, std::span<const float> beta) {
  double mean = 0.0;
  for (float v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (float v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  const auto inv = static_cast<float>(1.0 / std::sqrt(var + kNormEps));
  const auto m = static_cast<float>(mean);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = gamma[i] * (x[i] - m) * inv + beta[i];
}

}  // namespace detail

// Streaming TCN: each residual block keeps the last (kernel - 1) * dilation
// inputs of its depthwise convolution, zero at stream start.
class TcnStream {
 public:
  explicit TcnStream(const CountModel& model) : model_(&model) {
    const auto& s = model.spec();
    detail::require(s.kind == ModelKind::tcn, "TcnStream: model is not a TCN");
    for (std::size_t st = 0; st < s.tcn_stacks; ++st)
      for (std::size_t b = 0; b < s.tcn_layers; ++b) {
        const std::string p = "tcn.s" + std::to_string(st) + ".b" + std::to_string(b) + ".";
        Block blk;
        blk.dilation = s.dilation(b);
        blk.conv1_w = model.data(p + "conv1.weight");
        blk.conv1_b = model.data(p + "conv1.bias");
        blk.prelu1 = model.data(p + "prelu1.weight")[0];
        blk.norm1_g = model.data(p + "norm1.gamma");
        blk.norm1_b = model.data(p + "norm1.beta");
        blk.dw_w = model.data(p + "dw.weight");
        blk.dw_b = model.data(p + "dw.bias");
        blk.prelu2 = model.data(p + "prelu2.weight")[0];
        blk.norm2_g = model.data(p + "norm2.gamma");
        blk.norm2_b = model.data(p + "norm2.beta");
        blk.conv2_w = model.data(p + "conv2.weight");
        blk.conv2_b = model.data(p + "conv2.bias");
        blk.history_len = (s.tcn_kernel - 1) * blk.dilation;
        blk.history.assign(blk.history_len * s.tcn_hidden, 0.0f);
        blocks_.push_back(std::move(blk));
      }
    h_.resize(s.tcn_bottleneck);
    u_.resize(s.tcn_hidden);
    v_.resize(s.tcn_hidden);
    out_.resize(s.tcn_bottleneck);
    logits_.resize(s.n_classes);
  }

  void reset() {
    for (auto& b : blocks_) {
      std::fill(b.history.begin(), b.history.end(), 0.0f);
      b.head = 0;
    }
  }

  std::vector<float> step(std::span<const float> x) {
    const auto& s = model_->spec();
    detail::require(x.size() == s.input_dim, "TcnStream: input dimension mismatch");
    const std::size_t hd = s.tcn_hidden;
    const std::size_t K = s.tcn_kernel;
    detail::affine(model_->data("tcn.in.weight"), model_->data("tcn.in.bias"), x, h_);
    for (auto& b : blocks_) {
      detail::affine(b.conv1_w, b.conv1_b, h_, u_);
      detail::prelu(u_, b.prelu1);
      detail::channel_norm(u_, b.norm1_g, b.norm1_b);
      // Causal dilated depthwise conv: tap j sees the input d*(K-1-j) frames back.
      for (std::size_t c = 0; c < hd; ++c) {
        float acc = b.dw_b[c] + b.dw_w[c * K + (K - 1)] * u_[c];
        for (std::size_t j = 0; j + 1 < K; ++j) {
          const std::size_t back = b.dilation * (K - 1 - j);
          acc += b.dw_w[c * K + j] * b.past(back, c, hd);
        }
        v_[c] = acc;
      }
      b.push(u_, hd);
      detail::prelu(v_, b.prelu2);
      detail::channel_norm(v_, b.norm2_g, b.norm2_b);
      detail::affine(b.conv2_w, b.conv2_b, v_, out_);
      for (std::size_t i = 0; i < h_.size(); ++i) h_[i] += out_[i];
    }
    detail::affine(model_->data("head.weight"), model_->data("head.bias"), h_, logits_);
    return softmax(logits_);
  }

 private:
  struct Block {
    std::size_t dilation = 1;
    std::span<const float> conv1_w, conv1_b, norm1_g, norm1_b, dw_w, dw_b, norm2_g, norm2_b, conv2_w, conv2_b;
    float prelu1 = 0.25f, prelu2 = 0.25f;
    std::size_t history_len = 0;
    std::vector<float> history;  // ring of history_len frames x hidden
    std::size_t head = 0;        // slot of the next write

    // Input `back` frames before the current one (1 <= back <= history_len).
    float past(std::size_t back, std::size_t c, std::size_t hd) const {
      const std::size_t slot = (head + history_len - back) % history_len;
      return history[slot * hd + c];
    }
    void push(std::span<const float> u, std::size_t hd) {
      if (history_len == 0) return;
      std::copy(u.begin(), u.end(), history.begin() + static_cast<std::ptrdiff_t>(head * hd));
      head = (head + 1) % history_len;
    }
  };

  const CountModel* model_;
  std::vector<Block> blocks_;
  std::vector<float> h_, u_, v_, out_, logits_;
};

// Whole-sequence TCN evaluation with explicit zero padding per layer. Kept
// separate from TcnStream so the two can be checked against each other.
inline std::vector<std::vector<float>> tcn_forward_sequence(const CountModel& model,
                                                            const std::vector<std::vector<float>>& frames) {
  const auto& s = model.spec();
  detail::require(s.kind == ModelKind::tcn, "tcn_forward_sequence: model is not a TCN");
  const std::size_t T = frames.size();
  const std::size_t K = s.tcn_kernel;
  std::vector<std::vector<float>> h(T, std::vector<float>(s.tcn_bottleneck));
  for (std::size_t t = 0; t < T; ++t) {
    detail::require(frames[t].size() == s.input_dim, "tcn_forward_sequence: input dimension mismatch");
    detail::affine(model.data("tcn.in.weight"), model.data("tcn.in.bias"), frames[t], h[t]);
  }
  std::vector<std::vector<float>> u(T, std::vector<float>(s.tcn_hidden));
  std::vector<float> v(s.tcn_hidden), out(s.tcn_bottleneck);
  for (std::size_t st = 0; st < s.tcn_stacks; ++st)
    for (std::size_t b = 0; b < s.tcn_layers; ++b) {
      const std::string p = "tcn.s" + std::to_string(st) + ".b" + std::to_string(b) + ".";
      const std::size_t d = s.dilation(b);
      const float a1 = model.data(p + "prelu1.weight")[0];
      const float a2 = model.data(p + "prelu2.weight")[0];
      const auto dw = model.data(p + "dw.weight");
      const auto dwb = model.data(p + "dw.bias");
      for (std::size_t t = 0; t < T; ++t) {
        detail::affine(model.data(p + "conv1.weight"), model.data(p + "conv1.bias"), h[t], u[t]);
        detail::prelu(u[t], a1);
        detail::channel_norm(u[t], model.data(p + "norm1.gamma"), model.data(p + "norm1.beta"));
      }
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t c = 0; c < s.tcn_hidden; ++c) {
          float acc = dwb[c] + dw[c * K + (K - 1)] * u[t][c];
          for (std::size_t j = 0; j + 1 < K; ++j) {
            const std::size_t back = d * (K - 1 - j);
            acc += dw[c * K + j] * (t >= back ? u[t - back][c] : 0.0f);
          }
          v[c] = acc;
        }
        detail::prelu(v, a2);
        detail::channel_norm(v, model.data(p + "norm2.gamma"), model.data(p + "norm2.beta"));
        detail::affine(model.data(p + "conv2.weight"), model.data(p + "conv2.bias"), v, out);
        for (std::size_t i = 0; i < out.size(); ++i) h[t][i] += out[i];
      }
    }
  std::vector<std::vector<float>> probs(T);
  std::vector<float> logits(s.n_classes);
  for (std::size_t t = 0; t < T; ++t) {
    detail::affine(model.data("head.weight"), model.data("head.bias"), h[t], logits);
    probs[t] = softmax(logits);
  }
  return probs;
}

// Runs either architecture over a sequence, one frame at a time.
class CountEstimator {
 public:
  explicit CountEstimator(const CountModel& model) : model_(&model) {
    if (model.spec().kind == ModelKind::gru) gru_.emplace(model);
    else tcn_.emplace(model);
  }
  std::vector<float> step(std::span<const float> x) { return gru_ ? gru_->step(x) : tcn_->step(x); }
  const CountModel& model() const { return *model_; }

 private:
  const CountModel* model_;
  std::optional<GruStream> gru_;
  std::optional<TcnStream> tcn_;
};

}  // namespace sccount
