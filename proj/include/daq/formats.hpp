#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "daq/error.hpp"

namespace daq {

enum class FormatKind : std::uint32_t { UniformInt = 0, NormalFloat = 1 };

constexpr std::string_view format_kind_name(FormatKind kind) noexcept {
  return kind == FormatKind::UniformInt ? "int" : "nf";
}

inline FormatKind parse_format_kind(std::string_view name) {
  if (name == "int")
    return FormatKind::UniformInt;
  if (name == "nf")
    return FormatKind::NormalFloat;
  fail(Errc::InvalidArgument, "unknown format '" + std::string(name) +
                                  "' (expected nf or int)");
}

/// A quantization data type: an ascending codebook whose first and last
/// entries define the quantization range [x_min, x_max].
struct QuantFormat {
  FormatKind kind = FormatKind::UniformInt;
  int bits = 4;
  std::vector<double> codebook;

  double x_min() const noexcept { return codebook.front(); }
  double x_max() const noexcept { return codebook.back(); }
  std::size_t levels() const noexcept { return codebook.size(); }
  std::uint32_t id() const noexcept { return static_cast<std::uint32_t>(kind); }

  std::string name() const {
    return (kind == FormatKind::UniformInt ? "INT" : "NF") +
           std::to_string(bits);
  }
};

namespace detail {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace detail

/// Standard normal quantile by bisection on the CDF. Fixed iteration count,
/// so the result does not depend on the platform's tolerance handling.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    fail(Errc::InvalidArgument, "normal quantile needs p in (0, 1)");
  double lo = -40.0;
  double hi = 40.0;
  // 80 / 2^64 is far below the 1e-12 target.
  for (int i = 0; i < 64 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (detail::normal_cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline QuantFormat build_int_format(int bits) {
  if (bits < 2 || bits > 8)
    fail(Errc::UnsupportedBitWidth,
         "INT formats support 2..8 bits, got " + std::to_string(bits));
  QuantFormat fmt{FormatKind::UniformInt, bits, {}};
  const int n = 1 << bits;
  fmt.codebook.reserve(n);
  for (int i = 0; i < n; ++i)
    fmt.codebook.push_back(static_cast<double>(i));
  return fmt;
}

/// Tail offset used for NFk. For k = 4 this is (1/32 + 1/30) / 2; other widths
/// use the same average of half-spacings for 2^k and 2^k - 1 levels.
inline double nf_offset(int bits) {
  const double n = static_cast<double>(1 << bits);
  return 0.5 * (1.0 / (2.0 * n) + 1.0 / (2.0 * (n - 1.0)));
}

/// NormalFloat codebook: normal quantiles at evenly spaced probabilities,
/// 2^(k-1) - 1 strictly negative codes, an exact zero, and 2^(k-1) strictly
/// positive codes, each half normalized so its extreme is exactly -1 / +1.
inline QuantFormat build_nf_format(int bits) {
  if (bits < 2 || bits > 4)
    fail(Errc::UnsupportedBitWidth,
         "NF formats support 2..4 bits, got " + std::to_string(bits));
  const double offset = nf_offset(bits);
  const int half = 1 << (bits - 1);

  // Negative half: `half` probabilities from offset to 1/2 (last one is 0).
  std::vector<double> negative;
  for (int i = 0; i + 1 < half; ++i) {
    const double p = offset + (0.5 - offset) * i / (half - 1);
    negative.push_back(normal_quantile(p));
  }
  // Positive half: `half + 1` probabilities from 1/2 to 1 - offset.
  std::vector<double> positive;
  for (int i = 1; i <= half; ++i) {
    const double p = 0.5 + (0.5 - offset) * i / half;
    positive.push_back(normal_quantile(p));
  }

  QuantFormat fmt{FormatKind::NormalFloat, bits, {}};
  const double neg_scale = -negative.front();
  const double pos_scale = positive.back();
  for (double v : negative)
    fmt.codebook.push_back(v / neg_scale);
  fmt.codebook.push_back(0.0);
  for (double v : positive)
    fmt.codebook.push_back(v / pos_scale);
  fmt.codebook.front() = -1.0;
  fmt.codebook.back() = 1.0;
  return fmt;
}

inline QuantFormat build_format(FormatKind kind, int bits) {
  return kind == FormatKind::UniformInt ? build_int_format(bits)
                                        : build_nf_format(bits);
}

inline QuantFormat format_from_id(std::uint32_t id, int bits) {
  if (id > 1)
    fail(Errc::LayoutMismatch, "unknown format id " + std::to_string(id));
  return build_format(static_cast<FormatKind>(id), bits);
}

} // namespace daq
