#ifndef FEM_TRAIN_HPP
#define FEM_TRAIN_HPP

#include <cmath>
#include <vector>

#include "fem/common.hpp"
#include "fem/losses.hpp"
#include "fem/model.hpp"
#include "fem/optimizer.hpp"
#include "fem/rng.hpp"

namespace fem::model {

struct TrainConfig {
  int epochs = 20;
  Index batch_size = 128;
  loss::LossWeights lambdas;
  nn::OptimizerConfig opt;
  uint64_t seed = 0;
  bool shuffle = true;

  // SGD for the KAN, AdamW with exponential lr decay for the MLP.
  static TrainConfig defaults(Variant v) {
    TrainConfig c;
    c.opt = v == Variant::Kan ? nn::OptimizerConfig::sgd(1e-2)
                              : nn::OptimizerConfig::adamw(1e-3, 1e-2, 0.8);
    return c;
  }
};

// Mini-batch descent of the joint loss; source rows are mapped, target rows
// are the ground truth. Returns one averaged LossBreakdown per epoch.
template <class S>
std::vector<loss::LossBreakdown> train(FemModel<S>& model, const Mat<S>& source,
                                       const Mat<S>& target, const TrainConfig& cfg) {
  check_shape(source.rows() == target.rows() && source.cols() == target.cols(),
              "train: source/target shape mismatch");
  check_shape(source.cols() == model.embedding_dim, "train: pair dim != model embedding dim");
  if (source.rows() == 0) throw ValueError("train: dataset is empty");
  if (cfg.batch_size < 2) throw ValueError("train: batch_size must be >= 2");

  std::vector<loss::LossBreakdown> history;
  if (cfg.epochs <= 0) return history;

  const Index n = source.rows();
  nn::Optimizer<S> opt(cfg.opt);
  auto params = model.parameters();
  Rng shuffle_rng(derive_seed(cfg.seed, "train.shuffle"));
  model.set_training(true);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<Index> order(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    if (cfg.shuffle) order = shuffle_rng.permutation(n);

    loss::LossBreakdown epoch_sum;
    long batches = 0;
    for (Index start = 0; start < n; start += cfg.batch_size) {
      const Index bs = std::min(cfg.batch_size, n - start);
      if (bs < 2) continue;  // batch statistics need at least two rows
      Mat<S> xb(bs, source.cols()), yb(bs, source.cols());
      for (Index i = 0; i < bs; ++i) {
        xb.row(i) = source.row(order[static_cast<size_t>(start + i)]);
        yb.row(i) = target.row(order[static_cast<size_t>(start + i)]);
      }
      model.zero_grad();
      Mat<S> mapped = model.forward(xb);
      Mat<S> grad;
      const auto b = loss::joint_loss_backward(yb, mapped, cfg.lambdas, grad);
      if (!std::isfinite(b.total))
        throw DivergedError("train: loss diverged at epoch " + std::to_string(epoch));
      model.backward(grad);
      opt.step(params);
      epoch_sum.mse += b.mse;
      epoch_sum.pd += b.pd;
      epoch_sum.ced += b.ced;
      epoch_sum.total += b.total;
      ++batches;
    }
    opt.epoch_lr_decay();
    if (batches > 0) {
      epoch_sum.mse /= batches;
      epoch_sum.pd /= batches;
      epoch_sum.ced /= batches;
      epoch_sum.total /= batches;
    }
    history.push_back(epoch_sum);
  }
  model.set_training(false);
  return history;
}

}  // namespace fem::model

#endif
