#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "daq/error.hpp"
#include "daq/quantizer.hpp"

namespace daq {

/// Density-centric alignment settings. `clip_rate` is a percentage; the
/// default 2.275 puts the two quantiles at the 2-sigma tails of a normal.
struct DcaConfig {
  double clip_rate = 2.275;

  void validate() const {
    if (!(clip_rate >= 0.0 && clip_rate < 50.0))
      fail(Errc::InvalidArgument, "clip rate must be in [0, 50), got " +
                                      std::to_string(clip_rate));
  }
};

/// Quantile of an already ascending-sorted sample, linear interpolation
/// between order statistics at position (n - 1) * percent / 100.
inline double sorted_quantile(std::span<const double> sorted, double percent) {
  if (sorted.empty())
    fail(Errc::EmptyInput, "quantile of an empty sample");
  if (!(percent >= 0.0 && percent <= 100.0))
    fail(Errc::InvalidArgument,
         "percent must be in [0, 100], got " + std::to_string(percent));
  const double pos = static_cast<double>(sorted.size() - 1) * percent / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size())
    return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline std::vector<double> sorted_copy(std::span<const float> w) {
  std::vector<double> s(w.begin(), w.end());
  std::sort(s.begin(), s.end());
  return s;
}

inline double quantile(std::span<const float> w, double percent) {
  if (w.empty())
    fail(Errc::EmptyInput, "quantile of an empty sample");
  const auto s = sorted_copy(w);
  return sorted_quantile(s, percent);
}

namespace detail {

inline double density_center_sorted(std::span<const double> sorted,
                                    const DcaConfig &cfg) {
  cfg.validate();
  if (sorted.size() < 2)
    fail(Errc::EmptyInput, "density center needs at least two weights");
  // The upper quantile is interpolated from the top end with the same
  // fraction as the lower one, so mirrored samples give an exact midpoint.
  const std::size_t n = sorted.size();
  const double pos = static_cast<double>(n - 1) * cfg.clip_rate / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  const std::size_t hi = n - 1 - lo;
  const double lower = lo + 1 < n ? sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]) : sorted[lo];
  const double upper = hi > 0 ? sorted[hi] - frac * (sorted[hi] - sorted[hi - 1]) : sorted[hi];
  return 0.5 * (lower + upper);
}

} // namespace detail

/// Midpoint of the clip_rate and (100 - clip_rate) quantiles.
inline double density_center(std::span<const float> w, const DcaConfig &cfg = {}) {
  if (w.size() < 2)
    fail(Errc::EmptyInput, "density center needs at least two weights");
  const auto s = sorted_copy(w);
  return detail::density_center_sorted(s, cfg);
}

/// Symmetric range [c - k, c + k] around the density center c, where k is the
/// larger distance from c to either extreme. Always covers [min(w), max(w)].
inline DynamicRange dca_range(std::span<const float> w, const DcaConfig &cfg = {}) {
  if (w.size() < 2)
    fail(Errc::EmptyInput, "DCA needs at least two weights");
  const auto s = sorted_copy(w);
  if (s.front() == s.back())
    fail(Errc::DegenerateRange, "all weights in the group are equal");
  const double center = detail::density_center_sorted(s, cfg);
  double k = std::max(s.back() - center, center - s.front());
  while (center - k > s.front() || center + k < s.back())
    k = std::nextafter(k, std::numeric_limits<double>::infinity());
  return {center - k, center + k};
}

} // namespace daq
