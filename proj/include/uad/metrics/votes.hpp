#ifndef UAD_METRICS_VOTES_HPP
#define UAD_METRICS_VOTES_HPP

#include <vector>

#include "uad/core/error.hpp"
#include "uad/core/grid.hpp"

namespace uad::metrics {

/// Binary masks drawn by independent annotators for one (image, text) query.
struct VoteStack {
  std::vector<Mask> annotations;
};

struct VoteConfig {
  int annotators = 7;
  int more_than = 3;  // a pixel needs strictly more positive votes than this
};

inline Mask aggregate_votes(const VoteStack& stack, const VoteConfig& cfg = {}) {
  if (static_cast<int>(stack.annotations.size()) != cfg.annotators)
    throw Error("votes", "expected " + std::to_string(cfg.annotators) + " annotations, got " +
                             std::to_string(stack.annotations.size()));
  const Mask& first = stack.annotations.front();
  for (const auto& m : stack.annotations)
    if (!m.same_shape(first)) throw Error("votes", "annotation masks differ in shape");
  Mask out(first.height, first.width);
  for (std::size_t i = 0; i < out.pixels(); ++i) {
    int votes = 0;
    for (const auto& m : stack.annotations) votes += m[i] ? 1 : 0;
    out[i] = votes > cfg.more_than ? 1 : 0;
  }
  return out;
}

}  // namespace uad::metrics

#endif  // UAD_METRICS_VOTES_HPP
