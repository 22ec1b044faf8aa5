#ifndef UAD_DECODER_ADAM_HPP
#define UAD_DECODER_ADAM_HPP

#include <cmath>
#include <span>
#include <vector>

#include "uad/core/error.hpp"

namespace uad::decoder {

/// Bias-corrected Adam over a list of flat parameter arrays.
struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> m, v;
};

inline void adam_step(AdamState& s, const std::vector<std::span<double>>& params,
                      const std::vector<std::span<const double>>& grads) {
  if (params.size() != grads.size()) throw Error("adam", "parameter/gradient count mismatch");
  if (s.m.empty()) {
    for (const auto& p : params) {
      s.m.emplace_back(p.size(), 0.0);
      s.v.emplace_back(p.size(), 0.0);
    }
  }
  if (s.m.size() != params.size()) throw Error("adam", "optimizer state does not match parameters");
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t j = 0; j < params.size(); ++j) {
    auto& m = s.m[j];
    auto& v = s.v[j];
    if (params[j].size() != grads[j].size() || m.size() != params[j].size())
      throw Error("adam", "parameter/gradient shape mismatch");
    for (std::size_t i = 0; i < params[j].size(); ++i) {
      const double g = grads[j][i];
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g * g;
      params[j][i] -= s.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.eps);
    }
  }
}

}  // namespace uad::decoder

#endif  // UAD_DECODER_ADAM_HPP
