#include "fem/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace fem::io {

namespace {

void put_u16(std::vector<uint8_t>& b, uint16_t v) {
  b.push_back(static_cast<uint8_t>(v & 0xff));
  b.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<uint8_t>& b, uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f32(std::vector<uint8_t>& b, float v) { put_u32(b, std::bit_cast<uint32_t>(v)); }
void put_f64(std::vector<uint8_t>& b, double v) { put_u64(b, std::bit_cast<uint64_t>(v)); }

void put_magic(std::vector<uint8_t>& b, const char* magic) {
  b.insert(b.end(), magic, magic + 4);
}

void put_matrix(std::vector<uint8_t>& b, const MatF& m) {
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) put_f32(b, m(r, c));
}

void seal(std::vector<uint8_t>& b) { put_u64(b, fnv1a64(b.data(), b.size())); }

// Bounds-checked little-endian reader over a decoded file body.
class Cursor {
 public:
  Cursor(const std::vector<uint8_t>& bytes, size_t limit, std::string what)
      : bytes_(bytes), limit_(limit), what_(std::move(what)) {}

  uint16_t u16() {
    need(2);
    const uint16_t v = static_cast<uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }

  uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }

  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  void matrix(MatF& m) {
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) m(r, c) = f32();
  }

  size_t pos() const { return pos_; }

  void done() const {
    if (pos_ != limit_)
      throw FormatError(what_ + ": " + std::to_string(limit_ - pos_) +
                        " unexpected trailing payload bytes");
  }

 private:
  void need(size_t n) {
    if (pos_ + n > limit_)
      throw FormatError(what_ + ": truncated file (payload ends at byte " +
                        std::to_string(limit_) + ", need " + std::to_string(pos_ + n) + ")");
  }

  const std::vector<uint8_t>& bytes_;
  size_t pos_ = 0;
  size_t limit_;
  std::string what_;
};

// Validates framing and returns a cursor positioned after magic+version,
// bounded so the trailing checksum is unreachable. Checksum is verified last
// by `verify_checksum` so structural truncation reports as truncation.
Cursor open_frame(const std::vector<uint8_t>& bytes, const char* magic, const std::string& what) {
  if (bytes.size() < 14) throw FormatError(what + ": truncated file (only " +
                                           std::to_string(bytes.size()) + " bytes)");
  if (std::memcmp(bytes.data(), magic, 4) != 0) {
    std::string got(bytes.begin(), bytes.begin() + 4);
    for (auto& c : got)
      if (c < 0x20 || c > 0x7e) c = '?';
    throw FormatError(what + ": bad magic '" + got + "', expected '" + magic + "'");
  }
  Cursor body(bytes, bytes.size() - 8, what);
  body.u32();  // skip magic

  const uint16_t version = body.u16();
  if (version != kFormatVersion)
    throw FormatError(what + ": unsupported format version " + std::to_string(version) +
                      " (expected " + std::to_string(kFormatVersion) + ")");
  return body;
}

void verify_checksum(const std::vector<uint8_t>& bytes, const std::string& what) {
  const size_t body = bytes.size() - 8;
  uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= static_cast<uint64_t>(bytes[body + i]) << (8 * i);
  const uint64_t computed = fnv1a64(bytes.data(), body);
  if (stored != computed) throw FormatError(what + ": checksum mismatch (file corrupt)");
}

void check_counts(uint64_t count, uint64_t dim, const std::string& what) {
  if (count > 0 && dim == 0) throw FormatError(what + ": zero dim with nonzero count");
}

}  // namespace

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError("read failed on '" + path + "'");
  return bytes;
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed on '" + path + "'");
}

std::string peek_magic(const std::string& path) {
  const auto bytes = read_file(path);
  if (bytes.size() < 4) return "";
  return std::string(bytes.begin(), bytes.begin() + 4);
}

std::vector<uint8_t> encode_dataset(const data::Dataset& ds) {
  check_shape(static_cast<size_t>(ds.embeddings.rows()) == ds.labels.size(),
              "encode_dataset: label count mismatch");
  if (ds.labels.size() > 0xffffffffULL) throw ValueError("encode_dataset: too many rows");
  if (ds.embeddings.cols() > 0xffff) throw ValueError("encode_dataset: dim exceeds u16");
  std::vector<uint8_t> b;
  put_magic(b, "EMBD");
  put_u16(b, kFormatVersion);
  put_u32(b, static_cast<uint32_t>(ds.labels.size()));
  put_u16(b, static_cast<uint16_t>(ds.embeddings.cols()));
  for (uint32_t l : ds.labels) put_u32(b, l);
  put_matrix(b, ds.embeddings);
  seal(b);
  return b;
}

std::vector<uint8_t> encode_paired(const data::PairedDataset& ds) {
  check_shape(static_cast<size_t>(ds.source.rows()) == ds.labels.size(),
              "encode_paired: label count mismatch");
  check_shape(ds.source.rows() == ds.target.rows() && ds.source.cols() == ds.target.cols(),
              "encode_paired: source/target shape mismatch");
  if (ds.labels.size() > 0xffffffffULL) throw ValueError("encode_paired: too many rows");
  if (ds.source.cols() > 0xffff) throw ValueError("encode_paired: dim exceeds u16");
  std::vector<uint8_t> b;
  put_magic(b, "EMBP");
  put_u16(b, kFormatVersion);
  put_u32(b, static_cast<uint32_t>(ds.labels.size()));
  put_u16(b, static_cast<uint16_t>(ds.source.cols()));
  for (uint32_t l : ds.labels) put_u32(b, l);
  put_matrix(b, ds.source);
  put_matrix(b, ds.target);
  seal(b);
  return b;
}

data::Dataset decode_dataset(const std::vector<uint8_t>& bytes) {
  auto c = open_frame(bytes, "EMBD", "embd");
  const uint32_t count = c.u32();
  const uint16_t dim = c.u16();
  check_counts(count, dim, "embd");
  data::Dataset ds;
  ds.labels.resize(count);
  for (auto& l : ds.labels) l = c.u32();
  ds.embeddings.resize(static_cast<Index>(count), static_cast<Index>(dim));
  c.matrix(ds.embeddings);
  c.done();
  verify_checksum(bytes, "embd");
  return ds;
}

data::PairedDataset decode_paired(const std::vector<uint8_t>& bytes) {
  auto c = open_frame(bytes, "EMBP", "embp");
  const uint32_t count = c.u32();
  const uint16_t dim = c.u16();
  check_counts(count, dim, "embp");
  data::PairedDataset ds;
  ds.labels.resize(count);
  for (auto& l : ds.labels) l = c.u32();
  ds.source.resize(static_cast<Index>(count), static_cast<Index>(dim));
  ds.target.resize(static_cast<Index>(count), static_cast<Index>(dim));
  c.matrix(ds.source);
  c.matrix(ds.target);
  c.done();
  verify_checksum(bytes, "embp");
  return ds;
}

std::vector<uint8_t> encode_model(model::FemModel<float>& m) {
  if (m.widths.size() > 0xffff) throw ValueError("encode_model: too many layers");
  std::vector<uint8_t> b;
  put_magic(b, "FEMW");
  put_u16(b, kFormatVersion);
  b.push_back(m.variant == model::Variant::Kan ? 1 : 0);
  put_u16(b, static_cast<uint16_t>(m.embedding_dim));
  put_u16(b, static_cast<uint16_t>(m.widths.size()));
  for (Index w : m.widths) {
    if (w > 0xffff) throw ValueError("encode_model: width exceeds u16");
    put_u16(b, static_cast<uint16_t>(w));
  }
  if (m.variant == model::Variant::Kan) {
    const auto& g = m.kan_net.grid;
    put_u16(b, static_cast<uint16_t>(g.grid_size));
    put_u16(b, static_cast<uint16_t>(g.order));
    put_f64(b, g.lo);
    put_f64(b, g.hi);
  }
  for (const auto& t : m.state_tensors())
    for (Index i = 0; i < t.size; ++i) put_f32(b, t.value[i]);
  seal(b);
  return b;
}

model::FemModel<float> decode_model(const std::vector<uint8_t>& bytes) {
  auto c = open_frame(bytes, "FEMW", "femw");
  const uint8_t variant_tag = c.u8();
  if (variant_tag > 1)
    throw FormatError("femw: unknown variant tag " + std::to_string(variant_tag));
  const auto variant = variant_tag == 1 ? model::Variant::Kan : model::Variant::Mlp;
  const uint16_t dim = c.u16();
  const uint16_t n_widths = c.u16();
  if (n_widths < 2) throw FormatError("femw: width list too short");
  std::vector<Index> widths(n_widths);
  for (auto& w : widths) w = c.u16();
  if (widths.front() != dim || widths.back() != dim)
    throw FormatError("femw: embedding dim " + std::to_string(dim) +
                      " inconsistent with width list");
  kan::SplineGrid grid;
  if (variant == model::Variant::Kan) {
    const int g = c.u16();
    const int k = c.u16();
    const double lo = c.f64();
    const double hi = c.f64();
    try {
      grid = kan::SplineGrid::uniform(g, k, lo, hi);
    } catch (const ValueError& e) {
      throw FormatError(std::string("femw: bad grid config: ") + e.what());
    }
  }
  auto m = model::FemModel<float>::build(variant, widths, grid, 0);
  for (auto& t : m.state_tensors())
    for (Index i = 0; i < t.size; ++i) t.value[i] = c.f32();
  c.done();
  verify_checksum(bytes, "femw");
  return m;
}

void save_dataset(const std::string& path, const data::Dataset& ds) {
  write_file(path, encode_dataset(ds));
}

void save_paired(const std::string& path, const data::PairedDataset& ds) {
  write_file(path, encode_paired(ds));
}

void save_model(const std::string& path, model::FemModel<float>& m) {
  write_file(path, encode_model(m));
}

data::Dataset load_dataset(const std::string& path) { return decode_dataset(read_file(path)); }

data::PairedDataset load_paired(const std::string& path) { return decode_paired(read_file(path)); }

model::FemModel<float> load_model(const std::string& path) { return decode_model(read_file(path)); }

}  // namespace fem::io
