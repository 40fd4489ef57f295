#ifndef FEM_SYNTH_HPP
#define FEM_SYNTH_HPP

#include <cmath>
#include <string>

#include "fem/common.hpp"
#include "fem/dataset.hpp"
#include "fem/rng.hpp"

namespace fem::synth {

// Frozen random two-layer tanh encoder with unit-norm outputs. Two of these
// with different seeds stand in for the target and source recognition models;
// the same latent fed to both plays the role of one face seen by two systems.
struct EncoderSpec {
  uint64_t seed = 0;
  Index latent_dim = 64;
  Index out_dim = 512;
  MatF w1;  // out x latent
  MatF w2;  // out x out
};

inline VecF encode(const EncoderSpec& enc, const VecF& z) {
  check_shape(z.size() == enc.latent_dim, "encode: latent dim mismatch");
  VecF h = enc.w1 * z;
  for (Index i = 0; i < h.size(); ++i) h(i) = static_cast<float>(std::tanh(h(i)));
  VecF y = enc.w2 * h;
  const double n = std::sqrt(y.template cast<double>().squaredNorm());
  if (n == 0.0) throw DegenerateMatrixError("encode: zero-norm embedding");
  return (y.template cast<double>() / n).template cast<float>();
}

inline MatF encode(const EncoderSpec& enc, const MatF& z_rows) {
  MatF out(z_rows.rows(), enc.out_dim);
  for (Index r = 0; r < z_rows.rows(); ++r)
    out.row(r) = encode(enc, VecF(z_rows.row(r).transpose())).transpose();
  return out;
}

inline EncoderSpec encoder_new(uint64_t seed, Index latent_dim = 64, Index out_dim = 512) {
  if (latent_dim <= 0 || out_dim <= 0) throw ValueError("encoder_new: dims must be positive");
  EncoderSpec enc;
  enc.seed = seed;
  enc.latent_dim = latent_dim;
  enc.out_dim = out_dim;
  Rng rng(derive_seed(seed, "encoder.weights"));
  enc.w1.resize(out_dim, latent_dim);
  rng.fill_normal(enc.w1, 1.0 / std::sqrt(static_cast<double>(latent_dim)));
  enc.w2.resize(out_dim, out_dim);
  rng.fill_normal(enc.w2, 1.0 / std::sqrt(static_cast<double>(out_dim)));

  // Rank sanity: eigenvalues of the Gram matrix of a sampled embedding batch.
  Rng probe(derive_seed(seed, "encoder.rankcheck"));
  const Index k = std::min<Index>(latent_dim, 64);
  MatF z(k, latent_dim);
  probe.fill_normal(z, 1.0);
  MatF e = encode(enc, z);
  MatD gram = (e * e.transpose()).cast<double>();
  Eigen::SelfAdjointEigenSolver<MatD> es(gram);
  if (es.eigenvalues().minCoeff() <= 1e-3)
    throw DegenerateMatrixError("encoder_new: sampled Gram matrix nearly singular (seed " +
                                std::to_string(seed) + ")");
  return enc;
}

// Per identity: one base latent, `samples_per_id` noisy copies, each pushed
// through both encoders. Identity streams are derived independently so the
// result does not depend on generation order, and `first_id` selects a
// disjoint identity range (held-out subjects) under the same seed/encoders.
inline data::PairedDataset build_paired_dataset(const EncoderSpec& target_enc,
                                                const EncoderSpec& source_enc, Index n_ids,
                                                Index samples_per_id, double sigma, uint64_t seed,
                                                Index first_id = 0) {
  check_shape(target_enc.latent_dim == source_enc.latent_dim,
              "build_paired_dataset: encoders disagree on latent dim");
  check_shape(target_enc.out_dim == source_enc.out_dim,
              "build_paired_dataset: encoders disagree on output dim");
  if (n_ids < 0 || samples_per_id < 0 || first_id < 0)
    throw ValueError("build_paired_dataset: negative counts");
  data::PairedDataset ds;
  const Index n = n_ids * samples_per_id;
  const Index dim = target_enc.out_dim;
  ds.labels.resize(static_cast<size_t>(n));
  ds.source.resize(n, dim);
  ds.target.resize(n, dim);
  const Index latent = target_enc.latent_dim;
  for (Index i = 0; i < n_ids; ++i) {
    const Index id = first_id + i;
    Rng rng(derive_seed(seed, "synth.identity", static_cast<uint64_t>(id)));
    VecF base(latent);
    for (Index j = 0; j < latent; ++j) base(j) = static_cast<float>(rng.normal());
    for (Index s = 0; s < samples_per_id; ++s) {
      VecF z = base;
      for (Index j = 0; j < latent; ++j) z(j) += static_cast<float>(sigma * rng.normal());
      const Index row = i * samples_per_id + s;
      ds.labels[static_cast<size_t>(row)] = static_cast<uint32_t>(id);
      ds.target.row(row) = encode(target_enc, z).transpose();
      ds.source.row(row) = encode(source_enc, z).transpose();
    }
  }
  return ds;
}

}  // namespace fem::synth

#endif
