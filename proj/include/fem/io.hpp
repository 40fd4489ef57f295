#ifndef FEM_IO_HPP
#define FEM_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fem/dataset.hpp"
#include "fem/model.hpp"

namespace fem::io {

// Binary containers. Shared framing: 4-byte magic, u16 format version, payload,
// u64 FNV-1a checksum over every preceding byte. All integers and floats are
// little-endian; round-trips are bit-exact.
//
//   EMBD  labeled embeddings      (count u32, dim u16, labels, one f32 block)
//   EMBP  paired embeddings       (same header, source block then target block)
//   FEMW  mapping-network weights (variant, dims, KAN grid, raw f32 tensors)

inline constexpr uint16_t kFormatVersion = 1;

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<uint8_t>& bytes);

// First four bytes, or "" if the file is shorter than that.
std::string peek_magic(const std::string& path);

std::vector<uint8_t> encode_dataset(const data::Dataset& ds);
std::vector<uint8_t> encode_paired(const data::PairedDataset& ds);
std::vector<uint8_t> encode_model(model::FemModel<float>& m);

data::Dataset decode_dataset(const std::vector<uint8_t>& bytes);
data::PairedDataset decode_paired(const std::vector<uint8_t>& bytes);
model::FemModel<float> decode_model(const std::vector<uint8_t>& bytes);

void save_dataset(const std::string& path, const data::Dataset& ds);
void save_paired(const std::string& path, const data::PairedDataset& ds);
void save_model(const std::string& path, model::FemModel<float>& m);

data::Dataset load_dataset(const std::string& path);
data::PairedDataset load_paired(const std::string& path);
model::FemModel<float> load_model(const std::string& path);

}  // namespace fem::io

#endif
