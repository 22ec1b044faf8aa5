#ifndef UAD_DECODER_FILM_HPP
#define UAD_DECODER_FILM_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "uad/core/error.hpp"
#include "uad/core/grid.hpp"
#include "uad/core/linalg.hpp"

namespace uad::decoder {

/// 1×1 convolution followed by feature-wise modulation conditioned on an
/// embedding e: z' = γ(e) ⊙ (W x + b) + β(e), with γ and β affine in e.
struct FilmLayerParams {
  Eigen::MatrixXd conv_weight;   // C_out×C_in
  Vec conv_bias;                 // C_out
  Eigen::MatrixXd gamma_weight;  // C_out×e
  Vec gamma_bias;                // C_out
  Eigen::MatrixXd beta_weight;   // C_out×e
  Vec beta_bias;                 // C_out

  [[nodiscard]] int in_dim() const { return static_cast<int>(conv_weight.cols()); }
  [[nodiscard]] int out_dim() const { return static_cast<int>(conv_weight.rows()); }
};

inline const std::vector<int> kLayerPlan{256, 64, 1};

/// Stack of FiLM layers; ReLU between layers, the last layer emits one logit.
struct FilmDecoder {
  std::vector<FilmLayerParams> layers;
  int input_dim = 0;
  int embed_dim = 0;

  [[nodiscard]] std::vector<int> plan() const {
    std::vector<int> p;
    for (const auto& l : layers) p.push_back(l.out_dim());
    return p;
  }
};

/// Named views over every parameter array, in a fixed order. Works for both
/// parameters and same-shaped gradient holders.
inline std::vector<std::pair<std::string, std::span<double>>> parameters(FilmDecoder& d) {
  std::vector<std::pair<std::string, std::span<double>>> out;
  auto add = [&](const std::string& name, double* p, Eigen::Index n) {
    out.emplace_back(name, std::span<double>(p, static_cast<std::size_t>(n)));
  };
  for (std::size_t i = 0; i < d.layers.size(); ++i) {
    auto& l = d.layers[i];
    const std::string pre = "layer" + std::to_string(i) + ".";
    add(pre + "conv_weight", l.conv_weight.data(), l.conv_weight.size());
    add(pre + "conv_bias", l.conv_bias.data(), l.conv_bias.size());
    add(pre + "gamma_weight", l.gamma_weight.data(), l.gamma_weight.size());
    add(pre + "gamma_bias", l.gamma_bias.data(), l.gamma_bias.size());
    add(pre + "beta_weight", l.beta_weight.data(), l.beta_weight.size());
    add(pre + "beta_bias", l.beta_bias.data(), l.beta_bias.size());
  }
  return out;
}

inline void validate(const FilmDecoder& d) {
  if (d.layers.empty()) throw Error("decoder", "decoder has no layers");
  int in = d.input_dim;
  for (const auto& l : d.layers) {
    if (l.in_dim() != in) throw Error("decoder", "layer input dim does not chain");
    const auto c = l.out_dim();
    if (l.conv_bias.size() != c || l.gamma_weight.rows() != c || l.gamma_bias.size() != c ||
        l.beta_weight.rows() != c || l.beta_bias.size() != c || l.gamma_weight.cols() != d.embed_dim ||
        l.beta_weight.cols() != d.embed_dim)
      throw Error("decoder", "inconsistent FiLM layer shapes");
    in = c;
  }
  if (in != 1) throw Error("decoder", "last layer must have one output channel");
}

enum class FilmInit {
  kIdentity,     // γ(e) = 1, β(e) = 0 for every e
  kLiteralOnes,  // every FiLM linear weight 1, bias 0
};

/// Conv weights He-normal (seeded), conv biases 0, FiLM maps per `init`.
inline FilmDecoder make_decoder(int input_dim, int embed_dim, std::uint64_t seed,
                                FilmInit init = FilmInit::kIdentity,
                                const std::vector<int>& plan = kLayerPlan) {
  if (input_dim < 1 || embed_dim < 1 || plan.empty()) throw Error("decoder", "bad decoder dimensions");
  FilmDecoder d;
  d.input_dim = input_dim;
  d.embed_dim = embed_dim;
  std::mt19937_64 rng(seed);
  int in = input_dim;
  for (int out : plan) {
    FilmLayerParams l;
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / in));
    l.conv_weight = Eigen::MatrixXd::NullaryExpr(out, in, [&] { return he(rng); });
    l.conv_bias = Vec::Zero(out);
    const double w = init == FilmInit::kIdentity ? 0.0 : 1.0;
    l.gamma_weight = Eigen::MatrixXd::Constant(out, embed_dim, w);
    l.gamma_bias = Vec::Constant(out, init == FilmInit::kIdentity ? 1.0 : 0.0);
    l.beta_weight = Eigen::MatrixXd::Constant(out, embed_dim, w);
    l.beta_bias = Vec::Zero(out);
    d.layers.push_back(std::move(l));
    in = out;
  }
  validate(d);
  return d;
}

/// Gradient holder shaped like `d`, zero-filled.
inline FilmDecoder zeros_like(const FilmDecoder& d) {
  FilmDecoder g = d;
  for (auto& [name, s] : parameters(g)) std::fill(s.begin(), s.end(), 0.0);
  return g;
}

/// Intermediates of one forward pass over P pixels.
struct ForwardCache {
  std::vector<RowMatrix> inputs;     // x_l, P×C_in
  std::vector<RowMatrix> convolved;  // W x + b, P×C_out
  std::vector<RowMatrix> modulated;  // γ ⊙ (W x + b) + β, P×C_out
  std::vector<Vec> gamma, beta;
  Vec logits;                        // P
};

/// Pixels as rows: H×W×d grid -> (H·W)×d.
template <typename T>
RowMatrix pixels_as_rows(const Grid<T>& g) {
  RowMatrix x(static_cast<Eigen::Index>(g.pixels()), g.channels);
  for (std::size_t i = 0; i < g.data.size(); ++i) x.data()[i] = static_cast<double>(g.data[i]);
  return x;
}

/// Forward pass into `c`, reusing its buffers when the shapes already match.
inline void film_forward(const FilmDecoder& d, const RowMatrix& x, const Vec& e, ForwardCache& c) {
  if (x.cols() != d.input_dim) throw Error("decoder", "feature dim does not match decoder input");
  if (e.size() != d.embed_dim) throw Error("decoder", "embedding dim does not match decoder");
  const std::size_t n = d.layers.size();
  c.inputs.resize(n);
  c.convolved.resize(n);
  c.modulated.resize(n);
  c.gamma.resize(n);
  c.beta.resize(n);
  c.inputs[0] = x;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = d.layers[i];
    c.gamma[i] = l.gamma_weight * e + l.gamma_bias;
    c.beta[i] = l.beta_weight * e + l.beta_bias;
    auto& z = c.convolved[i];
    z.resize(x.rows(), l.conv_weight.rows());
    z.noalias() = c.inputs[i] * l.conv_weight.transpose();
    z.rowwise() += l.conv_bias.transpose();
    auto& zm = c.modulated[i];
    zm.resize(z.rows(), z.cols());
    zm.array() = (z.array().rowwise() * c.gamma[i].transpose().array()).rowwise() + c.beta[i].transpose().array();
    if (i + 1 < n) {
      c.inputs[i + 1].resize(zm.rows(), zm.cols());
      c.inputs[i + 1].array() = zm.array().max(0.0);
    }
  }
  c.logits = c.modulated.back().col(0);
}

inline ForwardCache film_forward(const FilmDecoder& d, const RowMatrix& x, const Vec& e) {
  ForwardCache c;
  film_forward(d, x, e, c);
  return c;
}

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

struct Prediction {
  Map logits;
  Map probabilities;
};

template <typename T>
Prediction film_forward(const FilmDecoder& d, const Grid<T>& features, const Vec& e) {
  const ForwardCache c = film_forward(d, pixels_as_rows(features), e);
  Prediction p{Map(features.height, features.width), Map(features.height, features.width)};
  for (std::size_t i = 0; i < p.logits.pixels(); ++i) {
    p.logits[i] = c.logits[static_cast<Eigen::Index>(i)];
    p.probabilities[i] = sigmoid(p.logits[i]);
  }
  return p;
}

/// Mean binary cross-entropy between sigmoid(logits) and targets, in the
/// overflow-free form max(l,0) - l·t + log(1 + exp(-|l|)).
inline double bce_loss(std::span<const double> logits, std::span<const double> targets) {
  if (logits.size() != targets.size()) throw Error("decoder", "logit/target size mismatch");
  if (logits.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double l = logits[i];
    s += std::max(l, 0.0) - l * targets[i] + std::log1p(std::exp(-std::abs(l)));
  }
  return s / static_cast<double>(logits.size());
}

/// d(mean BCE)/d(logit) scaled by `weight`.
inline Vec bce_grad(const Vec& logits, std::span<const double> targets, double weight = 1.0) {
  Vec g(logits.size());
  const double scale = weight / static_cast<double>(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    g[i] = (sigmoid(logits[i]) - targets[static_cast<std::size_t>(i)]) * scale;
  return g;
}

/// Reusable per-layer buffers for backward().
struct BackwardScratch {
  std::vector<RowMatrix> upstream, dmod, dz;
};

/// Accumulates into `grads` the gradient of a loss whose derivative with
/// respect to the logits is `dlogits`.
inline void backward(const FilmDecoder& d, const ForwardCache& c, const Vec& e, const Vec& dlogits,
                     FilmDecoder& grads, BackwardScratch& s) {
  const std::size_t n = d.layers.size();
  s.upstream.resize(n);
  s.dmod.resize(n);
  s.dz.resize(n);
  s.upstream[n - 1] = dlogits;  // P×1
  for (std::size_t i = n; i-- > 0;) {
    const auto& l = d.layers[i];
    auto& g = grads.layers[i];
    const auto& up = s.upstream[i];
    auto& dmod = s.dmod[i];
    auto& dz = s.dz[i];
    dmod.resize(up.rows(), up.cols());
    if (i + 1 < n)
      dmod.array() = (c.modulated[i].array() > 0.0).select(up.array(), 0.0);  // ReLU
    else
      dmod = up;
    const Vec dgamma = (dmod.array() * c.convolved[i].array()).colwise().sum().transpose();
    const Vec dbeta = dmod.colwise().sum().transpose();
    g.gamma_weight.noalias() += dgamma * e.transpose();
    g.gamma_bias += dgamma;
    g.beta_weight.noalias() += dbeta * e.transpose();
    g.beta_bias += dbeta;
    dz.resize(dmod.rows(), dmod.cols());
    dz.array() = dmod.array().rowwise() * c.gamma[i].transpose().array();
    g.conv_weight.noalias() += dz.transpose() * c.inputs[i];
    g.conv_bias += dz.colwise().sum().transpose();
    if (i > 0) {
      s.upstream[i - 1].resize(dz.rows(), l.conv_weight.cols());
      s.upstream[i - 1].noalias() = dz * l.conv_weight;
    }
  }
}

inline void backward(const FilmDecoder& d, const ForwardCache& c, const Vec& e, const Vec& dlogits,
                     FilmDecoder& grads) {
  BackwardScratch s;
  backward(d, c, e, dlogits, grads, s);
}

/// Workspace for repeated loss_and_gradients() calls.
struct Workspace {
  ForwardCache cache;
  BackwardScratch scratch;
};

/// Loss and parameter gradients for a single image.
inline double loss_and_gradients(const FilmDecoder& d, const RowMatrix& x, const Vec& e,
                                 std::span<const double> target, FilmDecoder& grads, double weight,
                                 Workspace& ws) {
  film_forward(d, x, e, ws.cache);
  const auto& logits = ws.cache.logits;
  const double loss = bce_loss({logits.data(), static_cast<std::size_t>(logits.size())}, target);
  backward(d, ws.cache, e, bce_grad(logits, target, weight), grads, ws.scratch);
  return loss;
}

inline double loss_and_gradients(const FilmDecoder& d, const RowMatrix& x, const Vec& e,
                                 std::span<const double> target, FilmDecoder& grads,
                                 double weight = 1.0) {
  Workspace ws;
  return loss_and_gradients(d, x, e, target, grads, weight, ws);
}

}  // namespace uad::decoder

#endif  // UAD_DECODER_FILM_HPP
