#ifndef FEM_DATASET_HPP
#define FEM_DATASET_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fem/common.hpp"
#include "fem/protection.hpp"

namespace fem::data {

enum class Scheme : uint8_t { None = 0, PolyProtect = 1, MlpHash = 2 };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::None: return "none";
    case Scheme::PolyProtect: return "polyprotect";
    case Scheme::MlpHash: return "mlphash";
  }
  throw ValueError("unknown protection scheme tag");
}

// Everything needed to reproduce (or invert-test) a protection transform.
struct ProtectionMeta {
  Scheme scheme = Scheme::None;
  std::vector<std::pair<uint32_t, prot::PolyProtectParams>> poly;  // per identity
  prot::MlpHashParams mlphash;

  const prot::PolyProtectParams& poly_for(uint32_t label) const {
    for (const auto& [id, p] : poly)
      if (id == label) return p;
    throw ValueError("no polyprotect params recorded for identity " + std::to_string(label));
  }
};

// Labeled embeddings, one row per sample.
struct Dataset {
  std::vector<uint32_t> labels;
  MatF embeddings;
  ProtectionMeta prot;

  Index dim() const { return embeddings.cols(); }
  Index size() const { return embeddings.rows(); }
};

// Row-aligned embeddings of the same subjects under two encoders.
struct PairedDataset {
  std::vector<uint32_t> labels;
  MatF source;
  MatF target;
  ProtectionMeta prot;

  Index dim() const { return target.cols(); }
  Index size() const { return target.rows(); }
};

}  // namespace fem::data

#endif
