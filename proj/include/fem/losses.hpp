#ifndef FEM_LOSSES_HPP
#define FEM_LOSSES_HPP

#include <cmath>
#include <string>

#include "fem/common.hpp"

namespace fem::loss {

namespace detail {

template <class S>
void check_pair(const Mat<S>& e, const Mat<S>& eh, const char* what) {
  check_shape(e.rows() == eh.rows() && e.cols() == eh.cols(),
              std::string(what) + ": shapes " + std::to_string(e.rows()) + "x" +
                  std::to_string(e.cols()) + " vs " + std::to_string(eh.rows()) + "x" +
                  std::to_string(eh.cols()));
}

// per-row helpers, double accumulation
template <class S>
double row_sq_dist(const Mat<S>& e, const Mat<S>& eh, Index r) {
  double s = 0.0;
  for (Index j = 0; j < e.cols(); ++j) {
    const double d = static_cast<double>(e(r, j)) - static_cast<double>(eh(r, j));
    s += d * d;
  }
  return s;
}

template <class S>
void row_dots(const Mat<S>& e, const Mat<S>& eh, Index r, double& dot, double& ne, double& neh) {
  dot = ne = neh = 0.0;
  for (Index j = 0; j < e.cols(); ++j) {
    const double a = static_cast<double>(e(r, j));
    const double b = static_cast<double>(eh(r, j));
    dot += a * b;
    ne += a * a;
    neh += b * b;
  }
  ne = std::sqrt(ne);
  neh = std::sqrt(neh);
}

}  // namespace detail

// mean squared error over the vector dimension
template <class S>
double loss_mse(const Mat<S>& e, const Mat<S>& eh) {
  detail::check_pair(e, eh, "loss_mse");
  double s = 0.0;
  for (Index r = 0; r < e.rows(); ++r) s += detail::row_sq_dist(e, eh, r);
  return s / static_cast<double>(e.size());
}

// euclidean distance (p = 2), averaged over rows
template <class S>
double loss_pd(const Mat<S>& e, const Mat<S>& eh) {
  detail::check_pair(e, eh, "loss_pd");
  double s = 0.0;
  for (Index r = 0; r < e.rows(); ++r) s += std::sqrt(detail::row_sq_dist(e, eh, r));
  return s / static_cast<double>(e.rows());
}

// 1 - cos(e, eh), averaged over rows
template <class S>
double loss_ced(const Mat<S>& e, const Mat<S>& eh) {
  detail::check_pair(e, eh, "loss_ced");
  double s = 0.0;
  for (Index r = 0; r < e.rows(); ++r) {
    double dot, ne, neh;
    detail::row_dots(e, eh, r, dot, ne, neh);
    if (ne == 0.0 || neh == 0.0)
      throw ValueError("loss_ced: cosine undefined for zero vector (row " + std::to_string(r) + ")");
    s += 1.0 - dot / (ne * neh);
  }
  return s / static_cast<double>(e.rows());
}

struct LossWeights {
  double mse = 1.0;
  double pd = 0.5;
  double ced = 10.0;
};

struct LossBreakdown {
  double mse = 0.0;
  double pd = 0.0;
  double ced = 0.0;
  double total = 0.0;
};

template <class S>
LossBreakdown joint_loss(const Mat<S>& e, const Mat<S>& eh, const LossWeights& w) {
  detail::check_pair(e, eh, "joint_loss");
  LossBreakdown b;
  b.mse = loss_mse(e, eh);
  b.pd = loss_pd(e, eh);
  b.ced = loss_ced(e, eh);
  b.total = w.mse * b.mse + w.pd * b.pd + w.ced * b.ced;
  return b;
}

// Breakdown plus gradient of the weighted total wrt eh.
template <class S>
LossBreakdown joint_loss_backward(const Mat<S>& e, const Mat<S>& eh, const LossWeights& w,
                                  Mat<S>& grad_eh) {
  detail::check_pair(e, eh, "joint_loss");
  const Index n = e.rows();
  const Index dim = e.cols();
  grad_eh.resize(n, dim);
  LossBreakdown b;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Index r = 0; r < n; ++r) {
    const double sq = detail::row_sq_dist(e, eh, r);
    const double dist = std::sqrt(sq);
    double dot, ne, neh;
    detail::row_dots(e, eh, r, dot, ne, neh);
    if (ne == 0.0 || neh == 0.0)
      throw ValueError("joint_loss: cosine undefined for zero vector (row " + std::to_string(r) + ")");
    const double cosv = dot / (ne * neh);
    b.mse += sq / static_cast<double>(dim);
    b.pd += dist;
    b.ced += 1.0 - cosv;
    for (Index j = 0; j < dim; ++j) {
      const double ev = static_cast<double>(e(r, j));
      const double ehv = static_cast<double>(eh(r, j));
      const double diff = ehv - ev;
      double g = w.mse * 2.0 * diff / static_cast<double>(dim);
      if (dist > 0.0) g += w.pd * diff / dist;
      g += w.ced * (cosv * ehv / (neh * neh) - ev / (ne * neh));
      grad_eh(r, j) = static_cast<S>(g * inv_n);
    }
  }
  b.mse *= inv_n;
  b.pd *= inv_n;
  b.ced *= inv_n;
  b.total = w.mse * b.mse + w.pd * b.pd + w.ced * b.ced;
  return b;
}

}  // namespace fem::loss

#endif
