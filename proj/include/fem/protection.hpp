#ifndef FEM_PROTECTION_HPP
#define FEM_PROTECTION_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fem/common.hpp"
#include "fem/rng.hpp"

namespace fem::prot {

// User-specific PolyProtect secret: window coefficients and exponents.
struct PolyProtectParams {
  std::vector<int32_t> coeffs;  // nonzero integers in [-50, 50]
  std::vector<int32_t> exps;    // permutation of 1..m
  int overlap = 4;

  int m() const { return static_cast<int>(coeffs.size()); }
};

inline PolyProtectParams polyprotect_gen(uint64_t seed, int m = 5, int overlap = 4) {
  if (m < 1) throw ValueError("polyprotect_gen: m must be >= 1");
  if (overlap < 0 || overlap >= m) throw ValueError("polyprotect_gen: overlap must be in [0, m-1]");
  PolyProtectParams p;
  p.overlap = overlap;
  p.coeffs.resize(static_cast<size_t>(m));
  p.exps.resize(static_cast<size_t>(m));
  Rng rng(derive_seed(seed, "polyprotect.params"));
  for (auto& c : p.coeffs) {
    // uniform over the 100 nonzero integers in [-50, 50]
    const auto v = rng.uniform_int(-50, 49);
    c = static_cast<int32_t>(v >= 0 ? v + 1 : v);
  }
  for (int i = 0; i < m; ++i) p.exps[static_cast<size_t>(i)] = i + 1;
  for (int i = m - 1; i > 0; --i) {
    const auto j = rng.uniform_int(0, i);
    std::swap(p.exps[static_cast<size_t>(i)], p.exps[static_cast<size_t>(j)]);
  }
  return p;
}

namespace detail {
inline double ipow(double base, int32_t e) {
  double r = 1.0;
  for (int32_t i = 0; i < e; ++i) r *= base;
  return r;
}
}  // namespace detail

// Sliding power sums: windows of m consecutive values with step m - overlap,
// each mapped to sum_k c_k * v_k^{e_k}.
inline VecF polyprotect(const VecF& v, const PolyProtectParams& p) {
  const Index n = v.size();
  const int m = p.m();
  check_shape(static_cast<int>(p.exps.size()) == m, "polyprotect: |C| != |E|");
  if (n < m)
    throw ShapeError("polyprotect: input dim " + std::to_string(n) + " < window size " +
                     std::to_string(m));
  const Index step = m - p.overlap;
  const Index windows = (n - m) / step + 1;
  VecF out(windows);
  for (Index w = 0; w < windows; ++w) {
    double acc = 0.0;
    for (int k = 0; k < m; ++k)
      acc += static_cast<double>(p.coeffs[static_cast<size_t>(k)]) *
             detail::ipow(static_cast<double>(v(w * step + k)), p.exps[static_cast<size_t>(k)]);
    out(w) = static_cast<float>(acc);
  }
  return out;
}

// Modified Gram-Schmidt over rows, double precision internally. Throws if a
// row collapses under projection.
template <class S>
Mat<S> gram_schmidt_rows(const Mat<S>& m) {
  MatD q = m.template cast<double>();
  const Index rows = q.rows();
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < i; ++j) q.row(i) -= q.row(j).dot(q.row(i)) * q.row(j);
    const double norm = q.row(i).norm();
    if (norm < 1e-10)
      throw DegenerateMatrixError("gram_schmidt_rows: row " + std::to_string(i) +
                                  " is linearly dependent");
    q.row(i) /= norm;
  }
  return q.template cast<S>();
}

struct MlpHashParams {
  uint64_t seed = 0;
  std::vector<Index> widths{512};  // one hidden layer of 512 by default
  double tau = 0.0;
};

// Precomputed orthonormalized projection stack for one parameter set.
class MlpHasher {
 public:
  MlpHasher(const MlpHashParams& params, Index input_dim) : params_(params) {
    Index in = input_dim;
    for (size_t l = 0; l < params.widths.size(); ++l) {
      const Index w = params.widths[l];
      if (w <= 0) throw ValueError("mlphash: layer widths must be positive");
      if (in > w)
        throw ShapeError("mlphash: cannot orthonormalize " + std::to_string(in) +
                         " rows of length " + std::to_string(w));
      MatF m(in, w);
      Rng rng(derive_seed(params.seed, "mlphash.layer", static_cast<uint64_t>(l)));
      rng.fill_uniform(m, 0.0, 1.0);
      mats_.push_back(gram_schmidt_rows(m));
      in = w;
    }
  }

  const MlpHashParams& params() const { return params_; }

  VecF apply(const VecF& v) const {
    check_shape(v.size() == mats_.front().rows(), "mlphash: input dim mismatch");
    VecF h = v;
    for (const auto& m : mats_) {
      VecF next = (h.transpose() * m).transpose();
      for (Index i = 0; i < next.size(); ++i)
        if (next(i) < 0.0f) next(i) = 0.0f;
      h = std::move(next);
    }
    for (Index i = 0; i < h.size(); ++i)
      h(i) = static_cast<double>(h(i)) <= params_.tau ? 0.0f : 1.0f;
    return h;
  }

 private:
  MlpHashParams params_;
  std::vector<MatF> mats_;
};

inline VecF mlphash(const VecF& v, const MlpHashParams& params) {
  return MlpHasher(params, v.size()).apply(v);
}

inline VecF pad_to_dim(const VecF& v, Index target = 512) {
  if (v.size() > target)
    throw ShapeError("pad_to_dim: input dim " + std::to_string(v.size()) + " exceeds target " +
                     std::to_string(target));
  VecF out = VecF::Zero(target);
  out.head(v.size()) = v;
  return out;
}

}  // namespace fem::prot

#endif
