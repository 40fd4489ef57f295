#ifndef FEM_BATCHNORM_HPP
#define FEM_BATCHNORM_HPP

#include <cmath>
#include <string>

#include "fem/common.hpp"

namespace fem::nn {

// 1D batch normalization over a [batch x features] matrix. Batch statistics
// accumulate in double regardless of the working scalar.
template <class S>
struct BatchNorm1d {
  Mat<S> gamma, beta;                  // features x 1
  Mat<S> running_mean, running_var;    // features x 1
  Mat<S> grad_gamma, grad_beta;
  S eps = static_cast<S>(1e-5);
  S momentum = static_cast<S>(0.1);

  // forward cache (train mode)
  Mat<S> xhat;
  Vec<S> inv_std;

  Index features() const { return gamma.rows(); }

  static BatchNorm1d make(Index features) {
    BatchNorm1d bn;
    bn.gamma = Mat<S>::Ones(features, 1);
    bn.beta = Mat<S>::Zero(features, 1);
    bn.running_mean = Mat<S>::Zero(features, 1);
    bn.running_var = Mat<S>::Ones(features, 1);
    bn.grad_gamma = Mat<S>::Zero(features, 1);
    bn.grad_beta = Mat<S>::Zero(features, 1);
    return bn;
  }

  void zero_grad() {
    grad_gamma.setZero();
    grad_beta.setZero();
  }

  // Eval mode: running statistics only.
  Mat<S> evaluate(const Mat<S>& x) const {
    check_shape(x.cols() == features(),
                "batchnorm_forward: input has " + std::to_string(x.cols()) +
                    " features, layer expects " + std::to_string(features()));
    const Index b = x.rows();
    const Index f = x.cols();
    Mat<S> y(b, f);
    for (Index j = 0; j < f; ++j) {
      const S is = S(1) / std::sqrt(running_var(j, 0) + eps);
      for (Index i = 0; i < b; ++i)
        y(i, j) = gamma(j, 0) * (x(i, j) - running_mean(j, 0)) * is + beta(j, 0);
    }
    return y;
  }

  Mat<S> forward(const Mat<S>& x, bool training) {
    if (!training) return evaluate(x);
    check_shape(x.cols() == features(),
                "batchnorm_forward: input has " + std::to_string(x.cols()) +
                    " features, layer expects " + std::to_string(features()));
    const Index b = x.rows();
    const Index f = x.cols();
    if (b < 2)
      throw ValueError("batchnorm_forward: train mode needs batch >= 2, got " + std::to_string(b));

    xhat.resize(b, f);
    inv_std.resize(f);
    Mat<S> y(b, f);
    const double n = static_cast<double>(b);
    for (Index j = 0; j < f; ++j) {
      double sum = 0.0, sq = 0.0;
      for (Index i = 0; i < b; ++i) sum += static_cast<double>(x(i, j));
      const double mean = sum / n;
      for (Index i = 0; i < b; ++i) {
        const double d = static_cast<double>(x(i, j)) - mean;
        sq += d * d;
      }
      const double var = sq / n;             // biased, used for normalization
      const double var_unbiased = sq / (n - 1.0);
      const double is = 1.0 / std::sqrt(var + static_cast<double>(eps));
      inv_std(j) = static_cast<S>(is);
      for (Index i = 0; i < b; ++i) {
        const double xh = (static_cast<double>(x(i, j)) - mean) * is;
        xhat(i, j) = static_cast<S>(xh);
        y(i, j) = static_cast<S>(static_cast<double>(gamma(j, 0)) * xh +
                                 static_cast<double>(beta(j, 0)));
      }
      running_mean(j, 0) = static_cast<S>((1.0 - momentum) * running_mean(j, 0) + momentum * mean);
      running_var(j, 0) =
          static_cast<S>((1.0 - momentum) * running_var(j, 0) + momentum * var_unbiased);
    }
    return y;
  }

  // Train-mode backward through the batch statistics; uses the forward cache.
  Mat<S> backward(const Mat<S>& grad_out) {
    check_shape(grad_out.rows() == xhat.rows() && grad_out.cols() == xhat.cols(),
                "batchnorm_backward: grad shape mismatch");
    const Index b = grad_out.rows();
    const Index f = grad_out.cols();
    const double n = static_cast<double>(b);
    Mat<S> grad_in(b, f);
    for (Index j = 0; j < f; ++j) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (Index i = 0; i < b; ++i) {
        sum_dy += static_cast<double>(grad_out(i, j));
        sum_dy_xhat += static_cast<double>(grad_out(i, j)) * static_cast<double>(xhat(i, j));
      }
      grad_gamma(j, 0) += static_cast<S>(sum_dy_xhat);
      grad_beta(j, 0) += static_cast<S>(sum_dy);
      const double g = static_cast<double>(gamma(j, 0));
      const double is = static_cast<double>(inv_std(j));
      for (Index i = 0; i < b; ++i) {
        const double dy = static_cast<double>(grad_out(i, j));
        const double xh = static_cast<double>(xhat(i, j));
        grad_in(i, j) =
            static_cast<S>(g * is * (dy - sum_dy / n - xh * sum_dy_xhat / n));
      }
    }
    return grad_in;
  }
};

}  // namespace fem::nn

#endif
