#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "daq/error.hpp"
#include "daq/formats.hpp"
#include "daq/tensor.hpp"

namespace daq {

inline constexpr double kMinScale = 1e-8;
inline constexpr double kMinRangeWidth = 1e-12;

/// Real interval [alpha, beta] mapped onto the codebook.
struct DynamicRange {
  double alpha = 0.0;
  double beta = 0.0;

  double width() const noexcept { return beta - alpha; }
  bool contains(double lo, double hi) const noexcept {
    return alpha <= lo && hi <= beta;
  }
  friend bool operator==(const DynamicRange &, const DynamicRange &) = default;
};

struct QuantParams {
  double scale = 1.0;
  double zero = 0.0;

  friend bool operator==(const QuantParams &, const QuantParams &) = default;
};

/// Parameters as they are persisted: both values rounded to f32 and the scale
/// floored at kMinScale.
inline QuantParams stored(QuantParams p) noexcept {
  p.scale = std::max(p.scale, kMinScale);
  auto scale = static_cast<float>(p.scale);
  if (scale < kMinScale)
    scale = std::nextafter(scale, std::numeric_limits<float>::infinity());
  p.scale = static_cast<double>(scale);
  p.zero = static_cast<double>(static_cast<float>(p.zero));
  return p;
}

inline QuantParams compute_params(const DynamicRange &range,
                                  const QuantFormat &fmt) {
  if (!std::isfinite(range.alpha) || !std::isfinite(range.beta))
    fail(Errc::DegenerateRange, "dynamic range must be finite");
  if (range.width() < kMinRangeWidth)
    fail(Errc::DegenerateRange,
         "dynamic range [" + std::to_string(range.alpha) + ", " +
             std::to_string(range.beta) + "] is too narrow");
  QuantParams p;
  p.scale = std::max(range.width() / (fmt.x_max() - fmt.x_min()), kMinScale);
  p.zero = fmt.x_min() - range.alpha / p.scale;
  return p;
}

/// Dynamic range implied by a parameter pair (inverse of compute_params).
inline DynamicRange range_of(const QuantParams &p, const QuantFormat &fmt) {
  return {p.scale * (fmt.x_min() - p.zero), p.scale * (fmt.x_max() - p.zero)};
}

namespace detail {

/// Round half to even, independent of the floating-point environment.
inline double round_half_even(double v) noexcept {
  const double lo = std::floor(v);
  const double frac = v - lo;
  if (frac > 0.5)
    return lo + 1.0;
  if (frac < 0.5)
    return lo;
  return std::fmod(lo, 2.0) == 0.0 ? lo : lo + 1.0;
}

} // namespace detail

/// Index of the codebook entry nearest to a projected value. The value is
/// saturated to [x_min, x_max] first; ties resolve to the lower index (NF) or
/// to the even integer (INT).
inline std::uint8_t nearest_code(double projected, const QuantFormat &fmt) noexcept {
  const double v = std::clamp(projected, fmt.x_min(), fmt.x_max());
  if (fmt.kind == FormatKind::UniformInt)
    return static_cast<std::uint8_t>(detail::round_half_even(v));
  const auto &cb = fmt.codebook;
  auto it = std::lower_bound(cb.begin(), cb.end(), v);
  if (it == cb.begin())
    return 0;
  if (it == cb.end())
    return static_cast<std::uint8_t>(cb.size() - 1);
  const auto hi = static_cast<std::size_t>(it - cb.begin());
  return (*it - v) < (v - cb[hi - 1]) ? static_cast<std::uint8_t>(hi)
                                      : static_cast<std::uint8_t>(hi - 1);
}

inline void quantize_group(std::span<const float> w, const QuantParams &p,
                           const QuantFormat &fmt, std::span<std::uint8_t> codes) {
  for (std::size_t i = 0; i < w.size(); ++i)
    codes[i] = nearest_code(static_cast<double>(w[i]) / p.scale + p.zero, fmt);
}

inline std::vector<std::uint8_t> quantize_group(std::span<const float> w,
                                                const QuantParams &p,
                                                const QuantFormat &fmt) {
  std::vector<std::uint8_t> codes(w.size());
  quantize_group(w, p, fmt, codes);
  return codes;
}

inline double dequantize_code(std::uint8_t code, const QuantParams &p,
                              const QuantFormat &fmt) noexcept {
  return p.scale * (fmt.codebook[code] - p.zero);
}

inline void dequantize_group(std::span<const std::uint8_t> codes,
                             const QuantParams &p, const QuantFormat &fmt,
                             std::span<double> out) {
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] >= fmt.levels())
      fail(Errc::CodeOutOfRange, "code " + std::to_string(codes[i]) +
                                     " exceeds " + fmt.name() + " codebook");
    out[i] = dequantize_code(codes[i], p, fmt);
  }
}

inline std::vector<double> dequantize_group(std::span<const std::uint8_t> codes,
                                            const QuantParams &p,
                                            const QuantFormat &fmt) {
  std::vector<double> out(codes.size());
  dequantize_group(codes, p, fmt, out);
  return out;
}

/// Partitioning of a weight matrix into contiguous runs along each row.
/// group_size == -1 means one group per row (channel-wise).
struct GroupLayout {
  std::int64_t group_size = -1;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t group_len() const noexcept {
    return group_size < 0 ? cols : static_cast<std::size_t>(group_size);
  }
  std::size_t groups_per_row() const noexcept { return cols / group_len(); }
  std::size_t group_count() const noexcept { return rows * groups_per_row(); }
  std::size_t row_of(std::size_t g) const noexcept { return g / groups_per_row(); }
  /// First weight column covered by group g.
  std::size_t col_of(std::size_t g) const noexcept {
    return (g % groups_per_row()) * group_len();
  }

  friend bool operator==(const GroupLayout &, const GroupLayout &) = default;
};

inline GroupLayout make_layout(std::size_t rows, std::size_t cols,
                               std::int64_t group_size) {
  if (group_size == 0 || group_size < -1)
    fail(Errc::IndivisibleGroupSize,
         "group size must be positive or -1, got " + std::to_string(group_size));
  if (group_size > 0 && cols % static_cast<std::size_t>(group_size) != 0)
    fail(Errc::IndivisibleGroupSize, "group size " + std::to_string(group_size) +
                                         " does not divide " +
                                         std::to_string(cols) + " columns");
  return GroupLayout{group_size, rows, cols};
}

struct Partition {
  GroupLayout layout;
  std::vector<std::span<const float>> groups;
};

inline Partition partition(const Tensor &t, std::int64_t group_size) {
  Partition out{make_layout(t.rows(), t.cols(), group_size), {}};
  const std::size_t len = out.layout.group_len();
  out.groups.reserve(out.layout.group_count());
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); c += len)
      out.groups.push_back(t.row(r).subspan(c, len));
  return out;
}

struct QuantizedGroup {
  std::vector<std::uint8_t> codes;
  QuantParams params;
  double loss = 0.0; // diagnostic only, not persisted

  friend bool operator==(const QuantizedGroup &a, const QuantizedGroup &b) {
    return a.codes == b.codes && a.params == b.params;
  }
};

} // namespace daq
