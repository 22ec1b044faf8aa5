#ifndef UAD_DECODER_TRAIN_HPP
#define UAD_DECODER_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "uad/core/log.hpp"
#include "uad/core/seed.hpp"
#include "uad/decoder/adam.hpp"
#include "uad/decoder/film.hpp"

namespace uad::decoder {

struct TrainConfig {
  int epochs = 30;
  int batch = 8;
  double lr = 0.001;
  std::uint64_t seed = 0;
  FilmInit init = FilmInit::kIdentity;
  std::vector<int> plan = kLayerPlan;
};

/// One training example. Features are shared between items of the same image.
struct TrainItem {
  std::shared_ptr<const RowMatrix> features;  // P×d
  Vec embedding;
  std::vector<double> target;  // P, in [0,1]
};

struct TrainResult {
  FilmDecoder decoder;
  std::vector<double> epoch_loss;  // mean item loss per epoch
};

/// Mini-batch Adam on mean-pixel BCE. Batch loss is the mean of per-item
/// means; items within a batch are accumulated in ascending order.
/// `on_epoch(epoch, decoder)` runs after every epoch (for checkpoints).
inline TrainResult train(const std::vector<TrainItem>& items, const TrainConfig& cfg,
                         const FilmDecoder* init = nullptr, const Logger& log = null_logger(),
                         const std::function<void(int, const FilmDecoder&)>& on_epoch = {}) {
  if (items.empty()) throw Error("train", "empty training set");
  if (cfg.batch < 1 || cfg.epochs < 0) throw Error("train", "bad epoch/batch configuration");
  const int d = static_cast<int>(items.front().features->cols());
  const int e = static_cast<int>(items.front().embedding.size());
  for (const auto& it : items)
    if (it.features->cols() != d || it.embedding.size() != e ||
        static_cast<Eigen::Index>(it.target.size()) != it.features->rows())
      throw Error("train", "inconsistent training item shapes");

  TrainResult out;
  out.decoder = init ? *init : make_decoder(d, e, derive_seed(cfg.seed, "decoder/init"), cfg.init, cfg.plan);
  validate(out.decoder);
  AdamState adam;
  adam.lr = cfg.lr;

  std::mt19937_64 rng(derive_seed(cfg.seed, "decoder/shuffle"));
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Workspace ws;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));
      std::sort(batch.begin(), batch.end());
      const double weight = 1.0 / static_cast<double>(batch.size());
      FilmDecoder grads = zeros_like(out.decoder);
      double batch_loss = 0.0;
      for (std::size_t idx : batch) {
        const auto& it = items[idx];
        batch_loss += loss_and_gradients(out.decoder, *it.features, it.embedding, it.target, grads, weight, ws);
      }
      if (!std::isfinite(batch_loss)) {
        nlohmann::json dump{{"event", "nan_loss"}, {"epoch", epoch}, {"items", batch}};
        log(dump);
        throw Error("nan_loss", "non-finite loss at epoch " + std::to_string(epoch) + ": " + dump.dump());
      }
      epoch_sum += batch_loss;
      std::vector<std::span<double>> p;
      std::vector<std::span<const double>> g;
      for (auto& [n, s] : parameters(out.decoder)) p.push_back(s);
      for (auto& [n, s] : parameters(grads)) g.emplace_back(s.data(), s.size());
      adam_step(adam, p, g);
    }
    out.epoch_loss.push_back(epoch_sum / static_cast<double>(items.size()));
    log({{"event", "epoch"}, {"epoch", epoch + 1}, {"loss", out.epoch_loss.back()}});
    if (on_epoch) on_epoch(epoch + 1, out.decoder);
  }
  return out;
}

/// Sigmoid affordance map for one image and instruction embedding.
template <typename T>
Map predict(const FilmDecoder& d, const Grid<T>& features, const Vec& embedding) {
  return film_forward(d, features, embedding).probabilities;
}

}  // namespace uad::decoder

#endif  // UAD_DECODER_TRAIN_HPP
