#ifndef FEM_LINEAR_HPP
#define FEM_LINEAR_HPP

#include <cmath>
#include <string>

#include "fem/common.hpp"
#include "fem/rng.hpp"

namespace fem::nn {

template <class S>
struct LinearLayer {
  Mat<S> weight;       // out x in
  Mat<S> bias;         // out x 1
  Mat<S> grad_weight;
  Mat<S> grad_bias;

  Index in_features() const { return weight.cols(); }
  Index out_features() const { return weight.rows(); }

  static LinearLayer zeros(Index in, Index out) {
    LinearLayer l;
    l.weight = Mat<S>::Zero(out, in);
    l.bias = Mat<S>::Zero(out, 1);
    l.grad_weight = Mat<S>::Zero(out, in);
    l.grad_bias = Mat<S>::Zero(out, 1);
    return l;
  }

  // Kaiming-uniform weights, zero bias.
  static LinearLayer kaiming(Index in, Index out, Rng& rng) {
    LinearLayer l = zeros(in, out);
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    rng.fill_uniform(l.weight, -bound, bound);
    return l;
  }

  void zero_grad() {
    grad_weight.setZero();
    grad_bias.setZero();
  }

  Mat<S> forward(const Mat<S>& x) const {
    check_shape(x.cols() == in_features(),
                "linear_forward: input has " + std::to_string(x.cols()) +
                    " cols, layer expects " + std::to_string(in_features()));
    Mat<S> out = x * weight.transpose();
    out.rowwise() += bias.transpose().row(0);
    return out;
  }

  // Accumulates parameter grads, returns grad wrt input.
  Mat<S> backward(const Mat<S>& x, const Mat<S>& grad_out) {
    check_shape(x.cols() == in_features(),
                "linear_backward: input has " + std::to_string(x.cols()) +
                    " cols, layer expects " + std::to_string(in_features()));
    check_shape(grad_out.cols() == out_features() && grad_out.rows() == x.rows(),
                "linear_backward: grad_out is " + std::to_string(grad_out.rows()) + "x" +
                    std::to_string(grad_out.cols()) + ", expected " + std::to_string(x.rows()) +
                    "x" + std::to_string(out_features()));
    grad_weight += grad_out.transpose() * x;
    grad_bias += grad_out.colwise().sum().transpose();
    return grad_out * weight;
  }
};

}  // namespace fem::nn

#endif
