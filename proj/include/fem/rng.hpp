#ifndef FEM_RNG_HPP
#define FEM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

#include "fem/common.hpp"

namespace fem {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One root seed per run; every consumer derives its own stream by name so
// modules cannot perturb each other's draws.
inline uint64_t derive_seed(uint64_t root, std::string_view stream) {
  return splitmix64(root ^ fnv1a64(stream.data(), stream.size()));
}

inline uint64_t derive_seed(uint64_t root, std::string_view stream, uint64_t index) {
  return splitmix64(derive_seed(root, stream) ^ splitmix64(index ^ 0xa5a5a5a5a5a5a5a5ULL));
}

// mt19937_64 plus hand-rolled distributions; std:: distributions are not
// bit-stable across library versions, the engine is.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds, rejection sampled to stay unbiased
  int64_t uniform_int(int64_t lo, int64_t hi) {
    const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t u;
    do {
      u = engine_();
    } while (u >= limit);
    return lo + static_cast<int64_t>(u % range);
  }

  // Box-Muller with the usual spare
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  template <class S>
  void fill_uniform(Mat<S>& m, double lo, double hi) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) m(i, j) = static_cast<S>(uniform(lo, hi));
  }

  template <class S>
  void fill_normal(Mat<S>& m, double stddev = 1.0) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) m(i, j) = static_cast<S>(stddev * normal());
  }

  std::vector<Index> permutation(Index n) {
    std::vector<Index> p(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
    for (Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<size_t>(uniform_int(0, i));
      std::swap(p[static_cast<size_t>(i)], p[j]);
    }
    return p;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fem

#endif
