#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "daq/baselines.hpp"
#include "daq/dca.hpp"
#include "daq/error.hpp"
#include "daq/formats.hpp"
#include "daq/ldra.hpp"
#include "daq/metrics.hpp"
#include "daq/parallel.hpp"
#include "daq/quantizer.hpp"
#include "daq/tensor.hpp"
#include "daq/tensor_io.hpp"

namespace daq {

/// A named way of quantizing a layer: a range policy, optionally followed by
/// LDRA refinement of the resulting parameters.
struct MethodSpec {
  std::string name;
  RangePolicy policy = MinMaxPolicy{};
  bool ldra = false;
  LdraConfig ldra_cfg;
};

/// Knobs shared by all named methods.
struct MethodOptions {
  DcaConfig dca;
  LdraConfig ldra;
  double clip_rate = 1.0;
  std::vector<double> grid = default_grid();
};

/// Known names: minmax, percentile, grid, dca, daq, ldra (min-max followed by
/// LDRA), daq-no-zero, daq-no-scale.
inline MethodSpec method_from_name(const std::string &name, const MethodOptions &opt = {}) {
  MethodSpec m{name, MinMaxPolicy{}, false, opt.ldra};
  if (name == "minmax") {
  } else if (name == "percentile") {
    m.policy = PercentilePolicy{opt.clip_rate};
  } else if (name == "grid") {
    m.policy = GridSearchPolicy{opt.grid};
  } else if (name == "dca") {
    m.policy = DcaPolicy{opt.dca};
  } else if (name == "daq") {
    m.policy = DcaPolicy{opt.dca};
    m.ldra = true;
  } else if (name == "ldra") {
    m.ldra = true;
  } else if (name == "daq-no-zero") {
    m.policy = DcaPolicy{opt.dca};
    m.ldra = true;
    m.ldra_cfg.optimize_zero = false;
  } else if (name == "daq-no-scale") {
    m.policy = DcaPolicy{opt.dca};
    m.ldra = true;
    m.ldra_cfg.optimize_scale = false;
  } else {
    fail(Errc::InvalidArgument, "unknown method '" + name + "'");
  }
  return m;
}

struct LayerOptions {
  FormatKind format = FormatKind::NormalFloat;
  int bits = 4;
  std::int64_t group_size = 256;
  MethodSpec method = method_from_name("daq");
  unsigned workers = 1;
  bool keep_traces = false;
};

struct LossSummary {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;

  friend bool operator==(const LossSummary &, const LossSummary &) = default;
};

inline LossSummary summarize(std::span<const double> losses) {
  if (losses.empty())
    return {};
  std::vector<double> s(losses.begin(), losses.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  const double median = n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
  return {s.front(), median, s.back()};
}

struct LayerReport {
  std::string method;
  std::string format;
  std::int64_t group_size = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t samples = 0;
  std::size_t groups = 0;
  std::size_t degenerate_groups = 0;
  /// Sum of per-group losses at the initial (range-policy) parameters.
  double init_loss = 0.0;
  double total_loss = 0.0;
  std::vector<double> group_losses;
  LossSummary group_loss_summary;
  double mean_iterations = 0.0;
  int max_iterations = 0;
  /// Not deterministic; excluded from equality.
  double wall_seconds = 0.0;

  friend bool operator==(const LayerReport &a, const LayerReport &b) {
    return a.method == b.method && a.format == b.format && a.group_size == b.group_size &&
           a.rows == b.rows && a.cols == b.cols && a.samples == b.samples &&
           a.groups == b.groups && a.degenerate_groups == b.degenerate_groups &&
           a.init_loss == b.init_loss && a.total_loss == b.total_loss &&
           a.group_losses == b.group_losses &&
           a.group_loss_summary == b.group_loss_summary &&
           a.mean_iterations == b.mean_iterations && a.max_iterations == b.max_iterations;
  }
};

struct LayerResult {
  PackedQuantizedTensor packed;
  LayerReport report;
  std::vector<QuantizedGroup> groups;
  /// One per group when LayerOptions::keep_traces is set.
  std::vector<OptimizeTrace> traces;
};

inline void check_calibration_shape(const Tensor &weights, const Tensor &calib) {
  if (calib.rows() != weights.cols())
    fail(Errc::ShapeMismatch, "calibration has " + std::to_string(calib.rows()) +
                                  " rows but weights have " + std::to_string(weights.cols()) +
                                  " columns");
}

namespace detail {

struct GroupOutcome {
  QuantizedGroup group;
  double init_loss = 0.0;
  int iterations = 0;
  bool degenerate = false;
  OptimizeTrace trace;
};

/// Constant groups get scale 1 and a zero-point that maps the constant onto the
/// exact 0.0 code, so they dequantize without error.
inline QuantParams constant_group_params(float value) {
  return stored(QuantParams{1.0, -static_cast<double>(value)});
}

inline GroupOutcome quantize_one(std::span<const float> w, const MatrixView &x,
                                 const QuantFormat &fmt, const MethodSpec &method,
                                 bool keep_trace) {
  GroupOutcome out;
  GroupObjective objective(w, x, fmt);
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  if (*lo == *hi) {
    out.degenerate = true;
    out.group.params = constant_group_params(*lo);
    out.init_loss = objective(out.group.params);
  } else {
    const QuantParams init = stored(compute_params(select_range(method.policy, w, x, fmt), fmt));
    out.group.params = init;
    if (method.ldra) {
      auto res = optimize(w, x, init, fmt, method.ldra_cfg);
      out.group.params = res.params;
      out.init_loss = res.trace.points.front().loss;
      out.iterations = res.trace.iterations_run;
      if (keep_trace)
        out.trace = std::move(res.trace);
    } else {
      out.init_loss = objective(init);
    }
  }
  out.group.loss = objective(out.group.params);
  const auto codes = objective.last_codes();
  out.group.codes.assign(codes.begin(), codes.end());
  return out;
}

} // namespace detail

/// Quantizes every group of `weights` with `opt.method`. Groups are processed
/// independently on `opt.workers` threads and merged in group-index order, so
/// the result does not depend on the worker count.
inline LayerResult quantize_layer(const Tensor &weights, const Tensor &calib,
                                  const LayerOptions &opt) {
  check_calibration_shape(weights, calib);
  if (opt.method.ldra)
    opt.method.ldra_cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const QuantFormat fmt = build_format(opt.format, opt.bits);
  const Partition part = partition(weights, opt.group_size);
  const GroupLayout &layout = part.layout;
  const std::size_t count = layout.group_count();

  std::vector<detail::GroupOutcome> outcomes(count);
  parallel_for(count, opt.workers, [&](std::size_t g) {
    const MatrixView x = view_rows(calib, layout.col_of(g), layout.group_len());
    try {
      outcomes[g] = detail::quantize_one(part.groups[g], x, fmt, opt.method, opt.keep_traces);
    } catch (const Error &e) {
      throw Error(e.code(), "group " + std::to_string(g) + ": " + e.detail());
    }
  });

  LayerResult result;
  auto &rep = result.report;
  rep.method = opt.method.name;
  rep.format = fmt.name();
  rep.group_size = opt.group_size;
  rep.rows = weights.rows();
  rep.cols = weights.cols();
  rep.samples = calib.cols();
  rep.groups = count;
  rep.group_losses.reserve(count);
  result.groups.reserve(count);
  double iter_sum = 0.0;
  for (auto &o : outcomes) {
    rep.init_loss += o.init_loss;
    rep.total_loss += o.group.loss;
    rep.group_losses.push_back(o.group.loss);
    rep.degenerate_groups += o.degenerate ? 1 : 0;
    iter_sum += o.iterations;
    rep.max_iterations = std::max(rep.max_iterations, o.iterations);
    result.groups.push_back(std::move(o.group));
    if (opt.keep_traces)
      result.traces.push_back(std::move(o.trace));
  }
  rep.mean_iterations = count ? iter_sum / static_cast<double>(count) : 0.0;
  rep.group_loss_summary = summarize(rep.group_losses);
  result.packed = pack_quantized(result.groups, layout, fmt);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

struct VerifyResult {
  double total_loss = 0.0;
  std::vector<double> group_losses;
};

/// Recomputes the calibration loss of every group from a packed artifact alone
/// (unpack, dequantize, ||(W~ - W) X||^2).
inline VerifyResult verify_packed(const PackedQuantizedTensor &packed, const Tensor &weights,
                                  const Tensor &calib) {
  check_calibration_shape(weights, calib);
  const auto &layout = packed.layout;
  if (layout.rows != weights.rows() || layout.cols != weights.cols())
    fail(Errc::ShapeMismatch, "artifact is " + std::to_string(layout.rows) + "x" +
                                  std::to_string(layout.cols) + ", weights are " +
                                  std::to_string(weights.rows()) + "x" +
                                  std::to_string(weights.cols()));
  const QuantFormat fmt = format_from_id(packed.format_id, static_cast<int>(packed.bits));
  const auto groups = unpack_quantized(packed, fmt);
  const Partition part = partition(weights, layout.group_size);

  VerifyResult out;
  std::vector<double> w_tilde(layout.group_len());
  std::vector<double> acc;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    dequantize_group(groups[g].codes, groups[g].params, fmt, w_tilde);
    const MatrixView x = view_rows(calib, layout.col_of(g), layout.group_len());
    const double loss = output_loss(part.groups[g], w_tilde, x, acc);
    out.group_losses.push_back(loss);
    out.total_loss += loss;
  }
  return out;
}

// ---------------------------------------------------------------------------
// File-level jobs
// ---------------------------------------------------------------------------

struct QuantJob {
  std::filesystem::path weights;
  std::filesystem::path calib;
  FormatKind format = FormatKind::NormalFloat;
  int bits = 4;
  std::int64_t group_size = 256;
  MethodSpec method = method_from_name("daq");
  std::filesystem::path out;
  std::filesystem::path report;
  unsigned workers = 1;
  bool trace = false;

  LayerOptions layer_options() const {
    return {format, bits, group_size, method, workers, trace};
  }
};

/// Per-method row of a comparison plus pairwise improvements.
struct ComparisonReport {
  std::vector<LayerReport> rows;
  /// improvements[i][j]: percent reduction of method i's loss relative to
  /// method j's; empty when method j has zero loss.
  std::vector<std::vector<std::optional<double>>> improvements;
  std::size_t best = 0;
};

inline ComparisonReport build_comparison(std::vector<LayerReport> rows) {
  ComparisonReport cmp;
  cmp.rows = std::move(rows);
  const std::size_t n = cmp.rows.size();
  cmp.improvements.assign(n, std::vector<std::optional<double>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (cmp.rows[i].total_loss < cmp.rows[cmp.best].total_loss)
      cmp.best = i;
    if (n < 2)
      continue;
    for (std::size_t j = 0; j < n; ++j)
      if (cmp.rows[j].total_loss > 0.0)
        cmp.improvements[i][j] = improvement(cmp.rows[j].total_loss, cmp.rows[i].total_loss);
  }
  return cmp;
}

/// Runs several methods over the same layer.
inline ComparisonReport compare(const Tensor &weights, const Tensor &calib,
                                const LayerOptions &base, std::span<const MethodSpec> methods) {
  if (methods.empty())
    fail(Errc::InvalidArgument, "compare needs at least one method");
  std::vector<LayerReport> rows;
  for (const auto &m : methods) {
    LayerOptions opt = base;
    opt.method = m;
    opt.keep_traces = false;
    rows.push_back(quantize_layer(weights, calib, opt).report);
  }
  return build_comparison(std::move(rows));
}

inline ComparisonReport compare(std::span<const QuantJob> jobs) {
  if (jobs.empty())
    fail(Errc::InvalidArgument, "compare needs at least one job");
  for (const auto &j : jobs)
    if (j.weights != jobs.front().weights || j.calib != jobs.front().calib)
      fail(Errc::InputMismatch, "all compared jobs must share weights and calibration inputs");
  const Tensor weights = load_tensor(jobs.front().weights);
  const Tensor calib = load_tensor(jobs.front().calib);
  std::vector<LayerReport> rows;
  for (const auto &j : jobs)
    rows.push_back(quantize_layer(weights, calib, j.layer_options()).report);
  return build_comparison(std::move(rows));
}

} // namespace daq
