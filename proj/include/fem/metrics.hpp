#ifndef FEM_METRICS_HPP
#define FEM_METRICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "fem/common.hpp"
#include "fem/rng.hpp"

namespace fem::eval {

template <class DerivedA, class DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  check_shape(a.size() == b.size(), "cosine: dim mismatch " + std::to_string(a.size()) + " vs " +
                                        std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double x = static_cast<double>(a(i));
    const double y = static_cast<double>(b(i));
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw ValueError("cosine: zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct VerificationThreshold {
  double value = 1.0;
  double far_target = 0.01;
  double achieved_far = 0.0;
  size_t calibration_size = 0;
};

// Smallest observed score t with fraction(scores > t) <= far.
inline VerificationThreshold calibrate_threshold(std::vector<double> scores, double far) {
  if (scores.empty()) throw ValueError("calibrate_threshold: no impostor scores");
  if (!(far > 0.0 && far <= 0.5))
    throw ValueError("calibrate_threshold: far must be in (0, 0.5], got " + std::to_string(far));
  std::sort(scores.begin(), scores.end());
  const auto n = scores.size();
  VerificationThreshold t;
  t.far_target = far;
  t.calibration_size = n;
  for (size_t i = 0; i < n; ++i) {
    if (i + 1 < n && scores[i + 1] == scores[i]) continue;  // same candidate value
    const size_t above = n - (i + 1);
    const double achieved = static_cast<double>(above) / static_cast<double>(n);
    if (achieved <= far) {
      t.value = scores[i];
      t.achieved_far = achieved;
      return t;
    }
  }
  t.value = scores.back();
  t.achieved_far = 0.0;
  return t;
}

// One unit-norm template per identity (mean of its enrolled samples).
struct Enrollment {
  std::vector<uint32_t> ids;
  MatF templates;
  std::unordered_map<uint32_t, Index> index;

  Index row_of(uint32_t label) const {
    const auto it = index.find(label);
    if (it == index.end())
      throw ValueError("enrollment: unknown identity label " + std::to_string(label));
    return it->second;
  }
};

inline Enrollment enroll_mean(const MatF& embeddings, const std::vector<uint32_t>& labels) {
  check_shape(static_cast<size_t>(embeddings.rows()) == labels.size(),
              "enroll_mean: label count mismatch");
  if (labels.empty()) throw ValueError("enroll_mean: empty enrollment set");
  Enrollment e;
  std::unordered_map<uint32_t, Index> counts;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (!e.index.count(labels[i])) {
      e.index[labels[i]] = static_cast<Index>(e.ids.size());
      e.ids.push_back(labels[i]);
    }
  }
  MatD sums = MatD::Zero(static_cast<Index>(e.ids.size()), embeddings.cols());
  for (size_t i = 0; i < labels.size(); ++i)
    sums.row(e.index[labels[i]]) += embeddings.row(static_cast<Index>(i)).cast<double>();
  e.templates.resize(sums.rows(), sums.cols());
  for (Index r = 0; r < sums.rows(); ++r) {
    const double n = sums.row(r).norm();
    if (n == 0.0)
      throw ValueError("enroll_mean: identity " + std::to_string(e.ids[static_cast<size_t>(r)]) +
                       " has zero mean embedding");
    e.templates.row(r) = (sums.row(r) / n).cast<float>();
  }
  return e;
}

// Probe-vs-own-template cosine, one attempt per probe.
inline std::vector<double> genuine_scores(const MatF& probes, const std::vector<uint32_t>& labels,
                                          const Enrollment& enrolled) {
  check_shape(static_cast<size_t>(probes.rows()) == labels.size(),
              "genuine_scores: label count mismatch");
  std::vector<double> out;
  out.reserve(labels.size());
  for (size_t i = 0; i < labels.size(); ++i)
    out.push_back(cosine(probes.row(static_cast<Index>(i)),
                         enrolled.templates.row(enrolled.row_of(labels[i]))));
  return out;
}

// Cross-identity pairs sampled uniformly with a fixed seed.
inline std::vector<double> impostor_scores(const MatF& samples, const std::vector<uint32_t>& labels,
                                           const Enrollment& enrolled, size_t count,
                                           uint64_t seed) {
  check_shape(static_cast<size_t>(samples.rows()) == labels.size(),
              "impostor_scores: label count mismatch");
  if (enrolled.ids.size() < 2) throw ValueError("impostor_scores: need at least two identities");
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(count);
  const auto n_ids = static_cast<int64_t>(enrolled.ids.size());
  while (out.size() < count) {
    const auto i = static_cast<Index>(rng.uniform_int(0, samples.rows() - 1));
    const auto j = static_cast<size_t>(rng.uniform_int(0, n_ids - 1));
    if (enrolled.ids[j] == labels[static_cast<size_t>(i)]) continue;
    out.push_back(cosine(samples.row(i), enrolled.templates.row(static_cast<Index>(j))));
  }
  return out;
}

inline constexpr int kHistogramBins = 50;

struct MetricsReport {
  double asr = 0.0;
  size_t successes = 0;
  size_t attempts = 0;
  double per_identity_any_rate = 0.0;
  double mean_cosine = 0.0;
  double median_cosine = 0.0;
  std::array<uint64_t, kHistogramBins> histogram{};  // uniform bins over [-1, 1]
  double mmd = 0.0;
  double threshold = 0.0;
  std::vector<double> scores;         // per probe
  std::vector<uint8_t> success_flags;  // per probe
};

// Similarity statistics plus, when a threshold is given, ASR accounting.
inline MetricsReport evaluate(const MatF& probes, const std::vector<uint32_t>& labels,
                              const Enrollment& enrolled,
                              const VerificationThreshold* threshold = nullptr) {
  MetricsReport r;
  r.scores = genuine_scores(probes, labels, enrolled);
  r.attempts = r.scores.size();
  double sum = 0.0;
  std::unordered_map<uint32_t, bool> id_success;
  for (size_t i = 0; i < r.scores.size(); ++i) {
    const double c = r.scores[i];
    sum += c;
    int bin = static_cast<int>(std::floor((c + 1.0) / 2.0 * kHistogramBins));
    bin = std::clamp(bin, 0, kHistogramBins - 1);
    r.histogram[static_cast<size_t>(bin)]++;
    if (threshold) {
      const bool ok = c >= threshold->value;
      r.success_flags.push_back(ok ? 1 : 0);
      auto [it, fresh] = id_success.try_emplace(labels[i], ok);
      if (!fresh) it->second = it->second || ok;
      if (ok) ++r.successes;
    }
  }
  if (!r.scores.empty()) {
    r.mean_cosine = sum / static_cast<double>(r.scores.size());
    std::vector<double> sorted = r.scores;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    r.median_cosine = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
  if (threshold) {
    r.threshold = threshold->value;
    r.asr = r.attempts ? static_cast<double>(r.successes) / static_cast<double>(r.attempts) : 0.0;
    if (!id_success.empty()) {
      size_t any = 0;
      for (const auto& [id, ok] : id_success) any += ok ? 1 : 0;
      r.per_identity_any_rate = static_cast<double>(any) / static_cast<double>(id_success.size());
    }
  }
  return r;
}

inline MetricsReport asr(const MatF& probes, const std::vector<uint32_t>& labels,
                         const Enrollment& enrolled, const VerificationThreshold& threshold) {
  return evaluate(probes, labels, enrolled, &threshold);
}

inline MetricsReport similarity_report(const MatF& probes, const std::vector<uint32_t>& labels,
                                       const Enrollment& enrolled) {
  return evaluate(probes, labels, enrolled, nullptr);
}

namespace detail {
template <class S>
double sq_dist(const Mat<S>& a, Index i, const Mat<S>& b, Index j) {
  double s = 0.0;
  for (Index c = 0; c < a.cols(); ++c) {
    const double d = static_cast<double>(a(i, c)) - static_cast<double>(b(j, c));
    s += d * d;
  }
  return s;
}
}  // namespace detail

// RBF-kernel MMD^2, bandwidth = median pairwise distance over the pooled
// sample. Biased (V-statistic) by default so identical sets give exactly 0.
template <class S>
double mmd(const Mat<S>& x, const Mat<S>& y, bool biased = true) {
  check_shape(x.cols() == y.cols(), "mmd: dim mismatch");
  const Index n = x.rows(), m = y.rows();
  if (n < 2 || m < 2) throw ValueError("mmd: need at least two samples per set");

  std::vector<double> dists;
  dists.reserve(static_cast<size_t>((n + m) * (n + m - 1) / 2));
  auto at = [&](Index i) -> std::pair<const Mat<S>*, Index> {
    return i < n ? std::pair{&x, i} : std::pair{&y, i - n};
  };
  for (Index i = 0; i < n + m; ++i)
    for (Index j = i + 1; j < n + m; ++j) {
      const auto [ma, ia] = at(i);
      const auto [mb, ib] = at(j);
      dists.push_back(std::sqrt(detail::sq_dist(*ma, ia, *mb, ib)));
    }
  std::sort(dists.begin(), dists.end());
  const size_t nd = dists.size();
  double bw = nd % 2 ? dists[nd / 2] : 0.5 * (dists[nd / 2 - 1] + dists[nd / 2]);
  if (bw <= 0.0) bw = 1.0;
  const double gamma = 1.0 / (2.0 * bw * bw);

  auto kernel_sum = [&](const Mat<S>& a, const Mat<S>& b, bool skip_diag) {
    double s = 0.0;
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < b.rows(); ++j) {
        if (skip_diag && i == j) continue;
        s += std::exp(-gamma * detail::sq_dist(a, i, b, j));
      }
    return s;
  };

  double total;
  if (biased) {
    total = kernel_sum(x, x, false) / (static_cast<double>(n) * n) +
            kernel_sum(y, y, false) / (static_cast<double>(m) * m) -
            2.0 * kernel_sum(x, y, false) / (static_cast<double>(n) * m);
  } else {
    total = kernel_sum(x, x, true) / (static_cast<double>(n) * (n - 1)) +
            kernel_sum(y, y, true) / (static_cast<double>(m) * (m - 1)) -
            2.0 * kernel_sum(x, y, false) / (static_cast<double>(n) * m);
  }
  return std::max(total, 0.0);
}

}  // namespace fem::eval

#endif
