#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "daq/dca.hpp"
#include "daq/error.hpp"
#include "daq/ldra.hpp"
#include "daq/quantizer.hpp"

namespace daq {

inline DynamicRange minmax_range(std::span<const float> w) {
  if (w.empty())
    fail(Errc::EmptyInput, "min-max range of an empty group");
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  if (*lo == *hi)
    fail(Errc::DegenerateRange, "all weights in the group are equal");
  return {static_cast<double>(*lo), static_cast<double>(*hi)};
}

/// [q(clip_rate), q(100 - clip_rate)] using the interpolated quantile.
inline DynamicRange percentile_range(std::span<const float> w, double clip_rate) {
  if (!(clip_rate >= 0.0 && clip_rate < 50.0))
    fail(Errc::InvalidArgument, "clip rate must be in [0, 50), got " +
                                    std::to_string(clip_rate));
  const auto s = sorted_copy(w);
  if (s.empty())
    fail(Errc::EmptyInput, "percentile range of an empty group");
  const DynamicRange r{sorted_quantile(s, clip_rate),
                       sorted_quantile(s, 100.0 - clip_rate)};
  if (r.width() < kMinRangeWidth)
    fail(Errc::DegenerateRange, "clipped range collapses at clip rate " +
                                    std::to_string(clip_rate));
  return r;
}

/// 0.80, 0.81, ..., 1.20.
inline std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = 80; i <= 120; ++i)
    g.push_back(i / 100.0);
  return g;
}

struct GridSearchResult {
  DynamicRange range;
  double gamma = 1.0;
  double loss = 0.0;
};

/// Scales the min-max range about its midpoint by each factor in `grid` and
/// keeps the one with the lowest calibration loss (evaluated at the stored
/// f32 parameters). Ties go to the factor closest to 1, then the smaller one.
inline GridSearchResult grid_search(std::span<const float> w, const MatrixView &x,
                                    const QuantFormat &fmt,
                                    std::span<const double> grid) {
  if (grid.empty())
    fail(Errc::InvalidArgument, "grid search needs at least one factor");
  const DynamicRange base = minmax_range(w);
  const double center = 0.5 * (base.alpha + base.beta);
  const double width = base.width();

  GroupObjective objective(w, x, fmt);
  GridSearchResult best;
  best.loss = std::numeric_limits<double>::infinity();
  bool have = false;
  for (double gamma : grid) {
    if (!(gamma > 0.0))
      fail(Errc::InvalidArgument, "grid factors must be positive");
    const DynamicRange r{center - gamma * width / 2.0, center + gamma * width / 2.0};
    const double loss = objective(stored(compute_params(r, fmt)));
    const bool better =
        !have || loss < best.loss ||
        (loss == best.loss &&
         (std::abs(gamma - 1.0) < std::abs(best.gamma - 1.0) ||
          (std::abs(gamma - 1.0) == std::abs(best.gamma - 1.0) && gamma < best.gamma)));
    if (better) {
      best = {r, gamma, loss};
      have = true;
    }
  }
  return best;
}

inline DynamicRange grid_search_range(std::span<const float> w, const MatrixView &x,
                                      const QuantFormat &fmt,
                                      std::span<const double> grid) {
  return grid_search(w, x, fmt, grid).range;
}

struct MinMaxPolicy {};
struct PercentilePolicy {
  double clip_rate = 1.0;
};
struct GridSearchPolicy {
  std::vector<double> grid = default_grid();
};
struct DcaPolicy {
  DcaConfig cfg;
};

/// How a group's initial dynamic range is chosen.
using RangePolicy = std::variant<MinMaxPolicy, PercentilePolicy, GridSearchPolicy, DcaPolicy>;

inline DynamicRange select_range(const RangePolicy &policy, std::span<const float> w,
                                 const MatrixView &x, const QuantFormat &fmt) {
  struct Visitor {
    std::span<const float> w;
    const MatrixView &x;
    const QuantFormat &fmt;
    DynamicRange operator()(const MinMaxPolicy &) const { return minmax_range(w); }
    DynamicRange operator()(const PercentilePolicy &p) const {
      return percentile_range(w, p.clip_rate);
    }
    DynamicRange operator()(const GridSearchPolicy &p) const {
      return grid_search_range(w, x, fmt, p.grid);
    }
    DynamicRange operator()(const DcaPolicy &p) const { return dca_range(w, p.cfg); }
  };
  return std::visit(Visitor{w, x, fmt}, policy);
}

} // namespace daq
