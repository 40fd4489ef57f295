#ifndef FEM_LEAKAGE_HPP
#define FEM_LEAKAGE_HPP

#include <cmath>
#include <string>

#include "fem/common.hpp"

namespace fem::leak {

enum class RoundMode { HalfUp, Floor };

// Prefix leakage: the adversary sees the first fraction of each template,
// the rest is zero-filled so downstream shapes are unchanged.
struct LeakageSpec {
  double fraction = 1.0;
  Index total_dim = 512;
  RoundMode round = RoundMode::HalfUp;

  Index kept() const {
    if (!(fraction > 0.0 && fraction <= 1.0))
      throw ValueError("leak: fraction must be in (0, 1], got " + std::to_string(fraction));
    const double raw = fraction * static_cast<double>(total_dim);
    const Index k = round == RoundMode::HalfUp ? static_cast<Index>(std::floor(raw + 0.5))
                                               : static_cast<Index>(std::floor(raw));
    return std::max<Index>(k, 1);
  }
};

template <class S>
Vec<S> leak(const Vec<S>& v, const LeakageSpec& spec) {
  check_shape(v.size() == spec.total_dim, "leak: input dim " + std::to_string(v.size()) +
                                              " != spec dim " + std::to_string(spec.total_dim));
  const Index k = spec.kept();
  Vec<S> out = Vec<S>::Zero(v.size());
  out.head(k) = v.head(k);
  return out;
}

template <class S>
Mat<S> leak_rows(const Mat<S>& m, const LeakageSpec& spec) {
  check_shape(m.cols() == spec.total_dim, "leak: input dim " + std::to_string(m.cols()) +
                                              " != spec dim " + std::to_string(spec.total_dim));
  const Index k = spec.kept();
  Mat<S> out = Mat<S>::Zero(m.rows(), m.cols());
  out.leftCols(k) = m.leftCols(k);
  return out;
}

}  // namespace fem::leak

#endif
