#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <set>
#include <string>

#include "fem/protection.hpp"
#include "golden_values.hpp"

using namespace fem;

namespace {

VecF probe16() {
  VecF v(16);
  for (Index i = 0; i < 16; ++i) v(i) = 0.1f * static_cast<float>(i - 8) + 0.03f;
  return v;
}

std::string bits(const VecF& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) s += v(i) == 0.0f ? '0' : '1';
  return s;
}

}  // namespace

TEST_CASE("polyprotect_gen: ranges and determinism") {
  const auto a = prot::polyprotect_gen(42);
  const auto b = prot::polyprotect_gen(42);
  CHECK(a.coeffs == b.coeffs);
  CHECK(a.exps == b.exps);
  CHECK(a.m() == 5);
  CHECK(a.overlap == 4);

  for (uint64_t seed = 0; seed < 2000; ++seed) {
    const auto p = prot::polyprotect_gen(seed);
    std::set<int32_t> es(p.exps.begin(), p.exps.end());
    REQUIRE(es == std::set<int32_t>{1, 2, 3, 4, 5});
    for (const int32_t c : p.coeffs) {
      REQUIRE(c != 0);
      REQUIRE(c >= -50);
      REQUIRE(c <= 50);
    }
  }

  CHECK_THROWS_AS((void)prot::polyprotect_gen(1, 0), ValueError);
  CHECK_THROWS_AS((void)prot::polyprotect_gen(1, 5, 5), ValueError);

  if (golden::kFrozen) {
    for (int i = 0; i < 5; ++i) {
      CHECK(a.coeffs[static_cast<size_t>(i)] == golden::kPolyCoeffsSeed42[i]);
      CHECK(a.exps[static_cast<size_t>(i)] == golden::kPolyExpsSeed42[i]);
    }
  }
}

TEST_CASE("polyprotect_gen: coefficients cover both signs over many draws") {
  int neg = 0, pos = 0;
  for (uint64_t seed = 0; seed < 400; ++seed)
    for (const int32_t c : prot::polyprotect_gen(seed).coeffs) (c < 0 ? neg : pos)++;
  CHECK(neg > 400);
  CHECK(pos > 400);
}

TEST_CASE("polyprotect: window power sum hand case") {
  prot::PolyProtectParams p;
  p.coeffs = {2, -3, 4, -1, 5};
  p.exps = {1, 2, 3, 4, 5};
  p.overlap = 4;
  VecF v = VecF::Constant(5, 0.5f);
  const VecF out = prot::polyprotect(v, p);
  REQUIRE(out.size() == 1);
  CHECK(out(0) == doctest::Approx(0.84375).epsilon(1e-9));
}

TEST_CASE("polyprotect: 512 dims with m=5 overlap=4 give 508") {
  const auto p = prot::polyprotect_gen(3);
  VecF v(512);
  for (Index i = 0; i < 512; ++i) v(i) = std::sin(0.1 * static_cast<double>(i));
  const VecF out = prot::polyprotect(v, p);
  CHECK(out.size() == 508);

  // each window evaluates Eq. 6 directly
  for (Index w : {Index(0), Index(100), Index(507)}) {
    double want = 0.0;
    for (int k = 0; k < 5; ++k)
      want += p.coeffs[static_cast<size_t>(k)] *
              std::pow(static_cast<double>(v(w + k)), p.exps[static_cast<size_t>(k)]);
    CHECK(static_cast<double>(out(w)) == doctest::Approx(want).epsilon(1e-9).scale(1e-9));
  }
}

TEST_CASE("polyprotect: zero input maps to zero output") {
  const auto p = prot::polyprotect_gen(9);
  const VecF out = prot::polyprotect(VecF::Zero(64), p);
  CHECK(out.size() == 60);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("polyprotect: input shorter than the window raises") {
  const auto p = prot::polyprotect_gen(1);
  CHECK_THROWS_AS((void)prot::polyprotect(VecF::Zero(4), p), ShapeError);
}

TEST_CASE("polyprotect: scale covariance identity on a single window") {
  const auto p = prot::polyprotect_gen(17);
  VecF v(5);
  v << 0.3f, -0.2f, 0.7f, 0.1f, -0.5f;
  const double alpha = 1.7;
  const VecF scaled = prot::polyprotect(VecF(v * static_cast<float>(alpha)), p);
  double want = 0.0;
  for (int k = 0; k < 5; ++k)
    want += p.coeffs[static_cast<size_t>(k)] *
            std::pow(alpha, p.exps[static_cast<size_t>(k)]) *
            std::pow(static_cast<double>(v(k)), p.exps[static_cast<size_t>(k)]);
  CHECK(static_cast<double>(scaled(0)) == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("gram_schmidt_rows: hand case and idempotence") {
  MatF m(2, 2);
  m << 1, 0, 1, 1;
  const MatF q = prot::gram_schmidt_rows(m);
  CHECK(q(0, 0) == doctest::Approx(1.0));
  CHECK(q(0, 1) == doctest::Approx(0.0));
  CHECK(q(1, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(q(1, 1) == doctest::Approx(1.0));

  const MatF q2 = prot::gram_schmidt_rows(q);
  CHECK((q2 - q).cwiseAbs().maxCoeff() <= 1e-6f);
}

TEST_CASE("gram_schmidt_rows: 512x512 uniform matrix is orthonormal to 1e-6") {
  Rng rng(2024);
  MatF m(512, 512);
  rng.fill_uniform(m, 0.0, 1.0);
  const MatF q = prot::gram_schmidt_rows(m);
  const MatD g = q.cast<double>() * q.cast<double>().transpose();
  const MatD err = g - MatD::Identity(512, 512);
  CHECK(err.cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("gram_schmidt_rows: dependent rows raise DegenerateMatrixError") {
  MatF m(2, 2);
  m << 1, 2, 2, 4;
  CHECK_THROWS_AS((void)prot::gram_schmidt_rows(m), DegenerateMatrixError);
}

TEST_CASE("mlphash: output is strictly binary, zero maps to zero") {
  prot::MlpHashParams p;
  p.seed = 7;
  p.widths = {16};
  const VecF h = prot::mlphash(probe16(), p);
  REQUIRE(h.size() == 16);
  for (Index i = 0; i < 16; ++i) CHECK((h(i) == 0.0f || h(i) == 1.0f));

  const VecF z = prot::mlphash(VecF::Zero(16), p);
  CHECK(z.cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("mlphash: deterministic per seed, golden bitstring") {
  prot::MlpHashParams p;
  p.seed = 7;
  p.widths = {16};
  const auto a = bits(prot::mlphash(probe16(), p));
  const auto b = bits(prot::mlphash(probe16(), p));
  CHECK(a == b);
  if (golden::kFrozen) CHECK(a == golden::kMlpHashBitsSeed7);
}

TEST_CASE("mlphash: many-to-one under small scaling") {
  prot::MlpHashParams p;
  p.seed = 11;
  p.widths = {16};
  const VecF v = probe16();
  const VecF w = v * 1.0001f;
  CHECK(bits(prot::mlphash(v, p)) == bits(prot::mlphash(w, p)));
}

TEST_CASE("mlphash: seed changes the hash almost always") {
  int changed = 0;
  Rng rng(5);
  for (uint64_t trial = 0; trial < 100; ++trial) {
    MatF m(1, 16);
    rng.fill_normal(m);
    const VecF v = m.row(0).transpose();
    prot::MlpHashParams a{trial * 2 + 1, {16}, 0.0};
    prot::MlpHashParams b{trial * 2 + 2, {16}, 0.0};
    if (bits(prot::mlphash(v, a)) != bits(prot::mlphash(v, b))) ++changed;
  }
  CHECK(changed >= 99);
}

TEST_CASE("mlphash: widening layer raises ShapeError") {
  prot::MlpHashParams p;
  p.widths = {8};
  CHECK_THROWS_AS((void)prot::mlphash(probe16(), p), ShapeError);
}

TEST_CASE("pad_to_dim: appends zeros, rejects oversize") {
  VecF v(3);
  v << 1, 2, 3;
  const VecF out = prot::pad_to_dim(v, 6);
  REQUIRE(out.size() == 6);
  CHECK(out(2) == 3.0f);
  CHECK(out(3) == 0.0f);
  CHECK(out(5) == 0.0f);
  CHECK(prot::pad_to_dim(out, 6) == out);
  CHECK_THROWS_AS((void)prot::pad_to_dim(out, 5), ShapeError);
}

TEST_CASE("golden print: protection" * doctest::skip()) {
  if (!std::getenv("FEM_PRINT_GOLDEN")) return;
  const auto p = prot::polyprotect_gen(42);
  std::printf("kPolyCoeffsSeed42 = {%d, %d, %d, %d, %d}\n", p.coeffs[0], p.coeffs[1], p.coeffs[2],
              p.coeffs[3], p.coeffs[4]);
  std::printf("kPolyExpsSeed42 = {%d, %d, %d, %d, %d}\n", p.exps[0], p.exps[1], p.exps[2],
              p.exps[3], p.exps[4]);
  prot::MlpHashParams mh;
  mh.seed = 7;
  mh.widths = {16};
  std::printf("kMlpHashBitsSeed7 = \"%s\"\n", bits(prot::mlphash(probe16(), mh)).c_str());
}
