#pragma once

// File formats (all integers and floats little-endian):
//
//   DAQT  "DAQT" | u32 version=1 | u64 rows | u64 cols | f32[rows*cols]
//   DAQQ  "DAQQ" | u32 version=1 | u32 format_id | u32 bits | i64 group_size
//         | u64 rows | u64 cols | (f32 scale, f32 zero)[groups]
//         | codes, k bits each, LSB-first bit stream in row-major group order

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "daq/error.hpp"
#include "daq/formats.hpp"
#include "daq/quantizer.hpp"
#include "daq/tensor.hpp"

namespace daq {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kTensorHeaderBytes = 4 + 4 + 8 + 8;
inline constexpr std::size_t kPackedHeaderBytes = 4 + 4 + 4 + 4 + 8 + 8 + 8;

namespace detail {

class ByteWriter {
public:
  void raw(const char *p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }

  template <class T> void le(T v) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    const U u = std::bit_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i)
      buf_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }

  void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

  std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
  explicit ByteReader(std::span<const std::uint8_t> b) : b_(b) {}

  std::size_t remaining() const noexcept { return b_.size() - pos_; }

  void need(std::size_t n, const char *what) const {
    if (remaining() < n)
      fail(Errc::TruncatedPayload, std::string("file ends inside ") + what);
  }

  std::string magic() {
    need(4, "magic");
    std::string m(reinterpret_cast<const char *>(b_.data() + pos_), 4);
    pos_ += 4;
    return m;
  }

  template <class T> T le(const char *what) {
    need(sizeof(T), what);
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<U>(b_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return std::bit_cast<T>(u);
  }

  std::span<const std::uint8_t> bytes(std::size_t n, const char *what) {
    need(n, what);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(Errc::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path &path,
                       std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    fail(Errc::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    fail(Errc::IoError, "write failed for " + path.string());
}

inline void expect_magic(ByteReader &r, const char *magic) {
  if (r.magic() != magic)
    fail(Errc::BadMagic, std::string("expected ") + magic + " magic bytes");
}

inline void expect_version(ByteReader &r) {
  const auto v = r.le<std::uint32_t>("version");
  if (v != kFormatVersion)
    fail(Errc::VersionMismatch, "unsupported version " + std::to_string(v));
}

} // namespace detail

// ---------------------------------------------------------------------------
// DAQT
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> encode_tensor(const Tensor &t) {
  if (t.rows() == 0 || t.cols() == 0)
    fail(Errc::InvalidShape, "cannot encode an empty tensor");
  detail::ByteWriter w;
  w.raw("DAQT", 4);
  w.le(kFormatVersion);
  w.le(static_cast<std::uint64_t>(t.rows()));
  w.le(static_cast<std::uint64_t>(t.cols()));
  for (float v : t.data())
    w.le(v);
  return w.take();
}

inline Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  detail::expect_magic(r, "DAQT");
  detail::expect_version(r);
  const auto rows = r.le<std::uint64_t>("rows");
  const auto cols = r.le<std::uint64_t>("cols");
  if (rows == 0 || cols == 0)
    fail(Errc::InvalidShape, "tensor file declares an empty shape");
  const std::uint64_t available = r.remaining() / 4;
  if (rows > available || cols > available / rows)
    fail(Errc::TruncatedPayload,
         "payload needs " + std::to_string(rows) + "x" + std::to_string(cols) +
             " floats, file has " + std::to_string(r.remaining()) + " bytes");
  std::vector<float> data(rows * cols);
  for (auto &v : data) {
    v = r.le<float>("payload");
    if (!std::isfinite(v))
      fail(Errc::NonFiniteValue, "tensor contains NaN or Inf");
  }
  return Tensor(rows, cols, std::move(data));
}

inline Tensor load_tensor(const std::filesystem::path &path) {
  return decode_tensor(detail::read_file(path));
}

inline void save_tensor(const Tensor &t, const std::filesystem::path &path) {
  detail::write_file(path, encode_tensor(t));
}

// ---------------------------------------------------------------------------
// Bit packing
// ---------------------------------------------------------------------------

inline std::size_t packed_code_bytes(std::size_t count, int bits) {
  return (count * static_cast<std::size_t>(bits) + 7) / 8;
}

/// Appends `codes` to an LSB-first bit stream starting at bit offset `bit`.
inline void pack_bits(std::span<const std::uint8_t> codes, int bits,
                      std::span<std::uint8_t> out, std::size_t bit) {
  for (std::uint8_t c : codes) {
    for (int b = 0; b < bits; ++b, ++bit)
      if ((c >> b) & 1u)
        out[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
  }
}

inline void unpack_bits(std::span<const std::uint8_t> in, int bits, std::size_t bit,
                        std::span<std::uint8_t> codes) {
  for (auto &c : codes) {
    unsigned v = 0;
    for (int b = 0; b < bits; ++b, ++bit)
      v |= ((in[bit / 8] >> (bit % 8)) & 1u) << b;
    c = static_cast<std::uint8_t>(v);
  }
}

// ---------------------------------------------------------------------------
// DAQQ
// ---------------------------------------------------------------------------

struct PackedQuantizedTensor {
  GroupLayout layout;
  std::uint32_t format_id = 0;
  std::uint32_t bits = 0;
  std::vector<float> scales;
  std::vector<float> zeros;
  std::vector<std::uint8_t> codes;

  std::size_t byte_size() const noexcept {
    return kPackedHeaderBytes + scales.size() * 8 + codes.size();
  }

  friend bool operator==(const PackedQuantizedTensor &,
                         const PackedQuantizedTensor &) = default;
};

inline PackedQuantizedTensor pack_quantized(std::span<const QuantizedGroup> groups,
                                            const GroupLayout &layout,
                                            const QuantFormat &fmt) {
  if (groups.size() != layout.group_count())
    fail(Errc::LayoutMismatch, "layout expects " + std::to_string(layout.group_count()) +
                                   " groups, got " + std::to_string(groups.size()));
  PackedQuantizedTensor p;
  p.layout = layout;
  p.format_id = fmt.id();
  p.bits = static_cast<std::uint32_t>(fmt.bits);
  p.scales.reserve(groups.size());
  p.zeros.reserve(groups.size());
  const std::size_t len = layout.group_len();
  p.codes.assign(packed_code_bytes(layout.rows * layout.cols, fmt.bits), 0);
  std::size_t bit = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto &grp = groups[g];
    if (grp.codes.size() != len)
      fail(Errc::LayoutMismatch, "group " + std::to_string(g) + " has " +
                                     std::to_string(grp.codes.size()) + " codes, expected " +
                                     std::to_string(len));
    for (auto c : grp.codes)
      if (c >= fmt.levels())
        fail(Errc::CodeOutOfRange, "group " + std::to_string(g) + ": code " +
                                       std::to_string(c) + " needs more than " +
                                       std::to_string(fmt.bits) + " bits");
    p.scales.push_back(static_cast<float>(grp.params.scale));
    p.zeros.push_back(static_cast<float>(grp.params.zero));
    pack_bits(grp.codes, fmt.bits, p.codes, bit);
    bit += len * static_cast<std::size_t>(fmt.bits);
  }
  return p;
}

inline std::vector<QuantizedGroup> unpack_quantized(const PackedQuantizedTensor &p,
                                                    const QuantFormat &fmt) {
  if (p.format_id != fmt.id() || p.bits != static_cast<std::uint32_t>(fmt.bits))
    fail(Errc::LayoutMismatch, "artifact format does not match " + fmt.name());
  const auto &layout = p.layout;
  const std::size_t count = layout.group_count();
  if (p.scales.size() != count || p.zeros.size() != count ||
      p.codes.size() != packed_code_bytes(layout.rows * layout.cols, fmt.bits))
    fail(Errc::LayoutMismatch, "artifact sizes disagree with its layout");
  std::vector<QuantizedGroup> groups(count);
  const std::size_t len = layout.group_len();
  for (std::size_t g = 0; g < count; ++g) {
    auto &grp = groups[g];
    grp.params = {static_cast<double>(p.scales[g]), static_cast<double>(p.zeros[g])};
    grp.codes.resize(len);
    unpack_bits(p.codes, fmt.bits, g * len * static_cast<std::size_t>(fmt.bits), grp.codes);
    for (auto c : grp.codes)
      if (c >= fmt.levels())
        fail(Errc::CodeOutOfRange, "group " + std::to_string(g) + " holds code " +
                                       std::to_string(c));
  }
  return groups;
}

inline std::vector<std::uint8_t> encode_packed(const PackedQuantizedTensor &p) {
  detail::ByteWriter w;
  w.raw("DAQQ", 4);
  w.le(kFormatVersion);
  w.le(p.format_id);
  w.le(p.bits);
  w.le(static_cast<std::int64_t>(p.layout.group_size));
  w.le(static_cast<std::uint64_t>(p.layout.rows));
  w.le(static_cast<std::uint64_t>(p.layout.cols));
  for (std::size_t g = 0; g < p.scales.size(); ++g) {
    w.le(p.scales[g]);
    w.le(p.zeros[g]);
  }
  w.bytes(p.codes);
  return w.take();
}

inline PackedQuantizedTensor decode_packed(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  detail::expect_magic(r, "DAQQ");
  detail::expect_version(r);
  PackedQuantizedTensor p;
  p.format_id = r.le<std::uint32_t>("format id");
  p.bits = r.le<std::uint32_t>("bit width");
  const auto group_size = r.le<std::int64_t>("group size");
  const auto rows = r.le<std::uint64_t>("rows");
  const auto cols = r.le<std::uint64_t>("cols");
  if (rows == 0 || cols == 0)
    fail(Errc::InvalidShape, "packed file declares an empty shape");
  if (p.bits < 2 || p.bits > 8)
    fail(Errc::UnsupportedBitWidth, "packed file declares " + std::to_string(p.bits) + " bits");
  p.layout = make_layout(rows, cols, group_size);
  const std::size_t count = p.layout.group_count();
  r.need(count * 8, "group parameters");
  for (std::size_t g = 0; g < count; ++g) {
    p.scales.push_back(r.le<float>("scale"));
    p.zeros.push_back(r.le<float>("zero"));
  }
  const std::size_t code_bytes = packed_code_bytes(rows * cols, static_cast<int>(p.bits));
  const auto c = r.bytes(code_bytes, "packed codes");
  p.codes.assign(c.begin(), c.end());
  if (r.remaining() != 0)
    fail(Errc::LayoutMismatch, "trailing bytes after packed codes");
  return p;
}

inline void save_packed(const PackedQuantizedTensor &p, const std::filesystem::path &path) {
  detail::write_file(path, encode_packed(p));
}

inline PackedQuantizedTensor load_packed(const std::filesystem::path &path) {
  return decode_packed(detail::read_file(path));
}

} // namespace daq
