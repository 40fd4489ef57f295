#ifndef FEM_ACTIVATIONS_HPP
#define FEM_ACTIVATIONS_HPP

#include <cmath>

#include "fem/common.hpp"

namespace fem::nn {

// tanh-approximation GELU
template <class S>
S gelu(S x) {
  const S c = static_cast<S>(0.7978845608028654);  // sqrt(2/pi)
  const S inner = c * (x + static_cast<S>(0.044715) * x * x * x);
  return static_cast<S>(0.5) * x * (S(1) + std::tanh(inner));
}

template <class S>
S gelu_grad(S x) {
  const S c = static_cast<S>(0.7978845608028654);
  const S x2 = x * x;
  const S inner = c * (x + static_cast<S>(0.044715) * x * x2);
  const S t = std::tanh(inner);
  const S sech2 = S(1) - t * t;
  return static_cast<S>(0.5) * (S(1) + t) +
         static_cast<S>(0.5) * x * sech2 * c * (S(1) + S(3) * static_cast<S>(0.044715) * x2);
}

template <class S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

template <class S>
S silu(S x) {
  return x * sigmoid(x);
}

template <class S>
S silu_grad(S x) {
  const S s = sigmoid(x);
  return s * (S(1) + x * (S(1) - s));
}

template <class S>
Mat<S> gelu(const Mat<S>& x) {
  return x.unaryExpr([](S v) { return gelu(v); });
}

template <class S>
Mat<S> gelu_backward(const Mat<S>& x, const Mat<S>& grad_out) {
  check_shape(x.rows() == grad_out.rows() && x.cols() == grad_out.cols(),
              "gelu_backward: grad shape mismatch");
  return grad_out.cwiseProduct(x.unaryExpr([](S v) { return gelu_grad(v); }));
}

template <class S>
Mat<S> silu(const Mat<S>& x) {
  return x.unaryExpr([](S v) { return silu(v); });
}

template <class S>
Mat<S> silu_backward(const Mat<S>& x, const Mat<S>& grad_out) {
  check_shape(x.rows() == grad_out.rows() && x.cols() == grad_out.cols(),
              "silu_backward: grad shape mismatch");
  return grad_out.cwiseProduct(x.unaryExpr([](S v) { return silu_grad(v); }));
}

}  // namespace fem::nn

#endif
