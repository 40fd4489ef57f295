#ifndef FEM_OPTIMIZER_HPP
#define FEM_OPTIMIZER_HPP

#include <cmath>
#include <string>
#include <vector>

#include "fem/common.hpp"

namespace fem::nn {

// Flat view over one named parameter tensor and its gradient.
template <class S>
struct ParamView {
  std::string name;
  S* value = nullptr;
  S* grad = nullptr;
  Index size = 0;
};

template <class S, int R, int C, int O>
ParamView<S> make_param(std::string name, Eigen::Matrix<S, R, C, O>& value,
                        Eigen::Matrix<S, R, C, O>& grad) {
  return ParamView<S>{std::move(name), value.data(), grad.data(), value.size()};
}

enum class OptKind { Sgd, AdamW };

struct OptimizerConfig {
  OptKind kind = OptKind::Sgd;
  double lr = 1e-2;
  double weight_decay = 0.0;
  double lr_decay_gamma = 1.0;  // applied once per epoch
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerConfig sgd(double lr) { return OptimizerConfig{OptKind::Sgd, lr, 0.0, 1.0}; }
  static OptimizerConfig adamw(double lr, double weight_decay = 1e-2, double gamma = 0.8) {
    OptimizerConfig c;
    c.kind = OptKind::AdamW;
    c.lr = lr;
    c.weight_decay = weight_decay;
    c.lr_decay_gamma = gamma;
    return c;
  }
};

template <class S>
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg), lr_(cfg.lr) {}

  const OptimizerConfig& config() const { return cfg_; }
  double lr() const { return lr_; }
  long step_count() const { return step_; }

  void step(std::vector<ParamView<S>>& params) {
    for (auto& p : params) {
      for (Index i = 0; i < p.size; ++i) {
        if (!std::isfinite(static_cast<double>(p.grad[i])))
          throw DivergedError("optimizer_step: non-finite gradient in parameter '" + p.name + "'");
      }
    }
    if (cfg_.kind == OptKind::Sgd) {
      for (auto& p : params)
        for (Index i = 0; i < p.size; ++i)
          p.value[i] -= static_cast<S>(lr_ * static_cast<double>(p.grad[i]));
      ++step_;
      return;
    }

    // AdamW: decoupled weight decay, bias-corrected moments.
    if (m_.empty()) {
      for (auto& p : params) {
        m_.emplace_back(VecD::Zero(p.size));
        v_.emplace_back(VecD::Zero(p.size));
      }
    }
    check_shape(m_.size() == params.size(), "optimizer_step: parameter list changed size");
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (size_t k = 0; k < params.size(); ++k) {
      auto& p = params[k];
      check_shape(m_[k].size() == p.size,
                  "optimizer_step: moment buffer shape mismatch for '" + p.name + "'");
      for (Index i = 0; i < p.size; ++i) {
        const double g = static_cast<double>(p.grad[i]);
        double pv = static_cast<double>(p.value[i]);
        pv -= lr_ * cfg_.weight_decay * pv;
        m_[k](i) = cfg_.beta1 * m_[k](i) + (1.0 - cfg_.beta1) * g;
        v_[k](i) = cfg_.beta2 * v_[k](i) + (1.0 - cfg_.beta2) * g * g;
        const double mhat = m_[k](i) / bc1;
        const double vhat = v_[k](i) / bc2;
        pv -= lr_ * mhat / (std::sqrt(vhat) + cfg_.eps);
        p.value[i] = static_cast<S>(pv);
      }
    }
  }

  void epoch_lr_decay() { lr_ *= cfg_.lr_decay_gamma; }

 private:
  OptimizerConfig cfg_;
  double lr_;
  long step_ = 0;
  std::vector<VecD> m_, v_;
};

}  // namespace fem::nn

#endif
