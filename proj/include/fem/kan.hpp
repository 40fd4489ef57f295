#ifndef FEM_KAN_HPP
#define FEM_KAN_HPP

#include <string>
#include <vector>

#include "fem/activations.hpp"
#include "fem/bspline.hpp"
#include "fem/common.hpp"
#include "fem/optimizer.hpp"
#include "fem/rng.hpp"

namespace fem::kan {

template <class S>
struct KanCache {
  Mat<S> x;
  Mat<S> silu_x;
  Mat<S> basis;        // batch x (in * nb)
  Mat<S> basis_deriv;  // same layout
};

// One KAN layer: every edge (j,i) carries a learnable univariate function,
// a silu base path plus a B-spline expansion shared across the layer's grid.
template <class S>
struct KanLayer {
  Index in = 0, out = 0;
  SplineGrid grid;
  Mat<S> base_weight;    // out x in
  Mat<S> spline_weight;  // out x (in * nb), per-input blocks contiguous
  Mat<S> grad_base_weight;
  Mat<S> grad_spline_weight;

  static KanLayer init(Index in, Index out, const SplineGrid& grid, Rng& rng) {
    KanLayer l;
    l.in = in;
    l.out = out;
    l.grid = grid;
    const Index nb = grid.num_bases();
    l.base_weight.resize(out, in);
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    rng.fill_uniform(l.base_weight, -bound, bound);
    l.spline_weight.resize(out, in * nb);
    const double noise = 0.1 / static_cast<double>(grid.grid_size);
    rng.fill_uniform(l.spline_weight, -0.5 * noise, 0.5 * noise);
    l.grad_base_weight = Mat<S>::Zero(out, in);
    l.grad_spline_weight = Mat<S>::Zero(out, in * nb);
    return l;
  }

  void zero_grad() {
    grad_base_weight.setZero();
    grad_spline_weight.setZero();
  }

  // out[b,j] = sum_i base[j,i]*silu(x[b,i]) + sum_{i,t} spline[j,i,t]*B_t(x[b,i])
  Mat<S> forward(const Mat<S>& x, KanCache<S>* cache = nullptr) const {
    check_shape(x.cols() == in, "kan_layer_forward: input has " + std::to_string(x.cols()) +
                                    " cols, layer expects " + std::to_string(in));
    Mat<S> sx = nn::silu(x);
    Mat<S> db;
    Mat<S> b = basis_matrix(grid, x, cache ? &db : nullptr);
    Mat<S> y = sx * base_weight.transpose() + b * spline_weight.transpose();
    if (cache) {
      cache->x = x;
      cache->silu_x = std::move(sx);
      cache->basis = std::move(b);
      cache->basis_deriv = std::move(db);
    }
    return y;
  }

  Mat<S> backward(const KanCache<S>& cache, const Mat<S>& grad_out) {
    check_shape(grad_out.cols() == out && grad_out.rows() == cache.x.rows(),
                "kan_layer_backward: grad_out shape mismatch");
    grad_base_weight += grad_out.transpose() * cache.silu_x;
    grad_spline_weight += grad_out.transpose() * cache.basis;

    Mat<S> grad_in = (grad_out * base_weight)
                         .cwiseProduct(cache.x.unaryExpr([](S v) { return nn::silu_grad(v); }));
    const Index nb = grid.num_bases();
    Mat<S> spline_chain = (grad_out * spline_weight).cwiseProduct(cache.basis_deriv);
    for (Index i = 0; i < in; ++i)
      grad_in.col(i) += spline_chain.middleCols(i * nb, nb).rowwise().sum();
    return grad_in;
  }

  std::vector<nn::ParamView<S>> parameters(const std::string& prefix) {
    return {nn::make_param(prefix + ".base_weight", base_weight, grad_base_weight),
            nn::make_param(prefix + ".spline_weight", spline_weight, grad_spline_weight)};
  }
};

template <class S>
struct KanNetwork {
  std::vector<Index> widths;
  SplineGrid grid;
  std::vector<KanLayer<S>> layers;
  std::vector<KanCache<S>> caches;

  static KanNetwork init(const std::vector<Index>& widths, const SplineGrid& grid, uint64_t seed) {
    if (widths.size() < 2) throw ValueError("kan_init: need at least two widths");
    KanNetwork net;
    net.widths = widths;
    net.grid = grid;
    Rng rng(derive_seed(seed, "kan.init"));
    for (size_t i = 0; i + 1 < widths.size(); ++i)
      net.layers.push_back(KanLayer<S>::init(widths[i], widths[i + 1], grid, rng));
    return net;
  }

  Mat<S> forward(const Mat<S>& x, bool keep_cache) {
    if (keep_cache) caches.resize(layers.size());
    Mat<S> h = x;
    for (size_t i = 0; i < layers.size(); ++i)
      h = layers[i].forward(h, keep_cache ? &caches[i] : nullptr);
    return h;
  }

  Mat<S> forward(const Mat<S>& x) const {
    Mat<S> h = x;
    for (const auto& l : layers) h = l.forward(h);
    return h;
  }

  Mat<S> backward(const Mat<S>& grad_out) {
    check_shape(caches.size() == layers.size(), "kan backward: no cached forward pass");
    Mat<S> g = grad_out;
    for (size_t i = layers.size(); i-- > 0;) g = layers[i].backward(caches[i], g);
    return g;
  }

  void zero_grad() {
    for (auto& l : layers) l.zero_grad();
  }

  std::vector<nn::ParamView<S>> parameters() {
    std::vector<nn::ParamView<S>> out;
    for (size_t i = 0; i < layers.size(); ++i) {
      auto p = layers[i].parameters("kan.layer" + std::to_string(i));
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

  uint64_t checksum() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& l : layers) {
      h = param_checksum(l.base_weight, h);
      h = param_checksum(l.spline_weight, h);
    }
    return h;
  }
};

}  // namespace fem::kan

#endif
