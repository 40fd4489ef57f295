#ifndef FEM_MODEL_HPP
#define FEM_MODEL_HPP

#include <string>
#include <vector>

#include "fem/activations.hpp"
#include "fem/batchnorm.hpp"
#include "fem/common.hpp"
#include "fem/kan.hpp"
#include "fem/linear.hpp"
#include "fem/optimizer.hpp"
#include "fem/rng.hpp"

namespace fem::model {

enum class Variant { Mlp, Kan };

inline const std::vector<Index>& default_widths() {
  static const std::vector<Index> w{512, 1024, 3072, 512};
  return w;
}

// Mapping network M(.). The MLP variant stacks Linear->BatchNorm->GELU blocks
// with a plain linear head; the KAN variant uses spline layers over the same
// width sequence and no batchnorm.
template <class S>
struct FemModel {
  Variant variant = Variant::Mlp;
  Index embedding_dim = 0;
  std::vector<Index> widths;

  struct MlpBlock {
    nn::LinearLayer<S> linear;
    nn::BatchNorm1d<S> bn;
  };
  std::vector<MlpBlock> blocks;
  nn::LinearLayer<S> head;
  kan::KanNetwork<S> kan_net;

  bool training = false;

  // forward caches (train mode)
  std::vector<Mat<S>> block_inputs;      // input to each block's linear
  std::vector<Mat<S>> block_preact;      // batchnorm output, pre-GELU
  Mat<S> head_input;

  static FemModel build(Variant variant, const std::vector<Index>& widths,
                        const kan::SplineGrid& grid, uint64_t seed) {
    if (widths.size() < 2) throw ValueError("fem_build: need at least two widths");
    for (Index w : widths)
      if (w <= 0) throw ValueError("fem_build: widths must be positive");
    if (widths.front() != widths.back())
      throw ValueError("fem_build: input and output dims must both equal the embedding dim");
    FemModel m;
    m.variant = variant;
    m.widths = widths;
    m.embedding_dim = widths.front();
    if (variant == Variant::Kan) {
      m.kan_net = kan::KanNetwork<S>::init(widths, grid, seed);
      return m;
    }
    Rng rng(derive_seed(seed, "mlp.init"));
    for (size_t i = 0; i + 2 < widths.size(); ++i) {
      MlpBlock b;
      b.linear = nn::LinearLayer<S>::kaiming(widths[i], widths[i + 1], rng);
      b.bn = nn::BatchNorm1d<S>::make(widths[i + 1]);
      m.blocks.push_back(std::move(b));
    }
    m.head = nn::LinearLayer<S>::kaiming(widths[widths.size() - 2], widths.back(), rng);
    return m;
  }

  void set_training(bool on) { training = on; }

  Mat<S> forward(const Mat<S>& x) {
    check_shape(x.cols() == embedding_dim,
                "fem forward: input dim " + std::to_string(x.cols()) + ", model expects " +
                    std::to_string(embedding_dim));
    if (variant == Variant::Kan) return kan_net.forward(x, training);
    Mat<S> h = x;
    if (training) {
      block_inputs.resize(blocks.size());
      block_preact.resize(blocks.size());
    }
    for (size_t i = 0; i < blocks.size(); ++i) {
      if (training) block_inputs[i] = h;
      h = blocks[i].linear.forward(h);
      h = blocks[i].bn.forward(h, training);
      if (training) block_preact[i] = h;
      h = nn::gelu(h);
    }
    if (training) head_input = h;
    return head.forward(h);
  }

  // Deterministic eval-mode pass; leaves no caches behind.
  Mat<S> map(const Mat<S>& x) const {
    check_shape(x.cols() == embedding_dim,
                "map_embedding: input dim " + std::to_string(x.cols()) + ", model expects " +
                    std::to_string(embedding_dim));
    if (variant == Variant::Kan) return kan_net.forward(x);
    Mat<S> h = x;
    for (const auto& b : blocks) {
      h = b.linear.forward(h);
      h = b.bn.evaluate(h);
      h = nn::gelu(h);
    }
    return head.forward(h);
  }

  Mat<S> backward(const Mat<S>& grad_out) {
    if (!training) throw ValueError("fem backward: model not in training mode");
    if (variant == Variant::Kan) return kan_net.backward(grad_out);
    Mat<S> g = head.backward(head_input, grad_out);
    for (size_t i = blocks.size(); i-- > 0;) {
      g = nn::gelu_backward(block_preact[i], g);
      g = blocks[i].bn.backward(g);
      g = blocks[i].linear.backward(block_inputs[i], g);
    }
    return g;
  }

  void zero_grad() {
    if (variant == Variant::Kan) {
      kan_net.zero_grad();
      return;
    }
    for (auto& b : blocks) {
      b.linear.zero_grad();
      b.bn.zero_grad();
    }
    head.zero_grad();
  }

  std::vector<nn::ParamView<S>> parameters() {
    if (variant == Variant::Kan) return kan_net.parameters();
    std::vector<nn::ParamView<S>> out;
    for (size_t i = 0; i < blocks.size(); ++i) {
      const std::string p = "mlp.block" + std::to_string(i);
      out.push_back(nn::make_param(p + ".weight", blocks[i].linear.weight,
                                   blocks[i].linear.grad_weight));
      out.push_back(nn::make_param(p + ".bias", blocks[i].linear.bias, blocks[i].linear.grad_bias));
      out.push_back(nn::make_param(p + ".bn.gamma", blocks[i].bn.gamma, blocks[i].bn.grad_gamma));
      out.push_back(nn::make_param(p + ".bn.beta", blocks[i].bn.beta, blocks[i].bn.grad_beta));
    }
    out.push_back(nn::make_param("mlp.head.weight", head.weight, head.grad_weight));
    out.push_back(nn::make_param("mlp.head.bias", head.bias, head.grad_bias));
    return out;
  }

  size_t parameter_count() {
    size_t n = 0;
    for (const auto& p : parameters()) n += static_cast<size_t>(p.size);
    return n;
  }

  // Everything a saved model needs: parameters plus batchnorm running stats.
  // Views for the stats carry a null grad pointer.
  std::vector<nn::ParamView<S>> state_tensors() {
    auto out = parameters();
    if (variant == Variant::Kan) return out;
    for (size_t i = 0; i < blocks.size(); ++i) {
      const std::string p = "mlp.block" + std::to_string(i) + ".bn.";
      auto& bn = blocks[i].bn;
      out.push_back(
          nn::ParamView<S>{p + "running_mean", bn.running_mean.data(), nullptr,
                           bn.running_mean.size()});
      out.push_back(nn::ParamView<S>{p + "running_var", bn.running_var.data(), nullptr,
                                     bn.running_var.size()});
    }
    return out;
  }

  uint64_t checksum() const {
    if (variant == Variant::Kan) return kan_net.checksum();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& b : blocks) {
      h = param_checksum(b.linear.weight, h);
      h = param_checksum(b.linear.bias, h);
      h = param_checksum(b.bn.gamma, h);
      h = param_checksum(b.bn.beta, h);
      h = param_checksum(b.bn.running_mean, h);
      h = param_checksum(b.bn.running_var, h);
    }
    h = param_checksum(head.weight, h);
    h = param_checksum(head.bias, h);
    return h;
  }
};

}  // namespace fem::model

#endif
