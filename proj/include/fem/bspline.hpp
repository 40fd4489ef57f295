#ifndef FEM_BSPLINE_HPP
#define FEM_BSPLINE_HPP

#include <array>
#include <span>
#include <string>
#include <vector>

#include "fem/common.hpp"

namespace fem::kan {

// Uniform knot grid over [lo, hi], extended by `order` intervals on each side
// so inputs slightly outside the range still see a smooth basis. G + k basis
// functions of order k live on G + 2k + 1 knots.
struct SplineGrid {
  int grid_size = 5;  // G: intervals inside [lo, hi]
  int order = 3;      // k: spline order (polynomial degree)
  double lo = -1.0;
  double hi = 1.0;
  std::vector<double> knots;

  static SplineGrid uniform(int grid_size = 5, int order = 3, double lo = -1.0, double hi = 1.0) {
    if (grid_size < 1) throw ValueError("SplineGrid: grid_size must be >= 1");
    if (order < 0) throw ValueError("SplineGrid: order must be >= 0");
    if (!(lo < hi)) throw ValueError("SplineGrid: need lo < hi");
    SplineGrid g;
    g.grid_size = grid_size;
    g.order = order;
    g.lo = lo;
    g.hi = hi;
    const double h = (hi - lo) / grid_size;
    const int n = grid_size + 2 * order + 1;
    g.knots.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) g.knots[static_cast<size_t>(i)] = lo + (i - order) * h;
    return g;
  }

  int num_bases() const { return grid_size + order; }
  int num_knots() const { return static_cast<int>(knots.size()); }
};

namespace detail {
inline constexpr int kMaxKnots = 96;
}

// Cox-de Boor recursion. `out` receives the G+k order-k basis values at x;
// if `dout` is non-empty it receives the derivatives (difference of order k-1
// bases scaled by k over the knot span).
template <class S>
void bspline_basis(const SplineGrid& grid, S x, std::span<S> out, std::span<S> dout = {}) {
  const int k = grid.order;
  const int nk = grid.num_knots();
  const int nb = grid.num_bases();
  if (nk > detail::kMaxKnots)
    throw ValueError("bspline_basis: grid too large (" + std::to_string(nk) + " knots)");
  check_shape(static_cast<int>(out.size()) == nb, "bspline_basis: output span size mismatch");
  if (!dout.empty())
    check_shape(static_cast<int>(dout.size()) == nb, "bspline_basis: deriv span size mismatch");

  std::array<S, detail::kMaxKnots> cur{};
  std::array<S, detail::kMaxKnots> prev{};
  std::array<S, detail::kMaxKnots> order_km1{};
  const auto& t = grid.knots;
  auto knot = [&](int i) { return static_cast<S>(t[static_cast<size_t>(i)]); };

  for (int i = 0; i < nk - 1; ++i) cur[static_cast<size_t>(i)] = (x >= knot(i) && x < knot(i + 1)) ? S(1) : S(0);

  if (k == 0 && !dout.empty())
    for (int i = 0; i < nb; ++i) dout[static_cast<size_t>(i)] = S(0);

  for (int j = 1; j <= k; ++j) {
    if (j == k && !dout.empty())
      for (int i = 0; i < nk - k; ++i) order_km1[static_cast<size_t>(i)] = cur[static_cast<size_t>(i)];
    prev = cur;
    for (int i = 0; i < nk - j - 1; ++i) {
      const S left = (x - knot(i)) / (knot(i + j) - knot(i)) * prev[static_cast<size_t>(i)];
      const S right = (knot(i + j + 1) - x) / (knot(i + j + 1) - knot(i + 1)) *
                      prev[static_cast<size_t>(i + 1)];
      cur[static_cast<size_t>(i)] = left + right;
    }
  }

  for (int i = 0; i < nb; ++i) out[static_cast<size_t>(i)] = cur[static_cast<size_t>(i)];

  if (!dout.empty() && k > 0) {
    for (int i = 0; i < nb; ++i) {
      const S a = order_km1[static_cast<size_t>(i)] / (knot(i + k) - knot(i));
      const S b = order_km1[static_cast<size_t>(i + 1)] / (knot(i + k + 1) - knot(i + 1));
      dout[static_cast<size_t>(i)] = static_cast<S>(k) * (a - b);
    }
  }
}

// Basis values for a whole batch, laid out [batch x (in * num_bases)] with the
// per-input blocks contiguous; this is what the KAN layer GEMM consumes.
template <class S>
Mat<S> basis_matrix(const SplineGrid& grid, const Mat<S>& x, Mat<S>* deriv = nullptr) {
  const Index nb = grid.num_bases();
  Mat<S> b(x.rows(), x.cols() * nb);
  if (deriv) deriv->resize(x.rows(), x.cols() * nb);
  std::vector<S> tmp(static_cast<size_t>(nb)), dtmp(static_cast<size_t>(nb));
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < x.cols(); ++c) {
      bspline_basis<S>(grid, x(r, c), std::span<S>(tmp),
                       deriv ? std::span<S>(dtmp) : std::span<S>());
      for (Index t = 0; t < nb; ++t) {
        b(r, c * nb + t) = tmp[static_cast<size_t>(t)];
        if (deriv) (*deriv)(r, c * nb + t) = dtmp[static_cast<size_t>(t)];
      }
    }
  }
  return b;
}

}  // namespace fem::kan

#endif
