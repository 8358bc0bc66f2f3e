#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "daq/error.hpp"
#include "daq/formats.hpp"
#include "daq/quantizer.hpp"
#include "daq/tensor.hpp"

namespace daq {

/// Learnable dynamic-range adjustment settings.
struct LdraConfig {
  double eta0 = 1e-3;
  double decay = 0.05;
  double eps = 1e-4;
  int max_iters = 200;
  int patience = 50;
  bool optimize_scale = true;
  bool optimize_zero = true;

  static constexpr int kMaxIters = 1000;

  void validate() const {
    if (!(eta0 > 0.0) || !std::isfinite(eta0))
      fail(Errc::InvalidArgument, "eta0 must be positive");
    if (!(decay >= 0.0) || !std::isfinite(decay))
      fail(Errc::InvalidArgument, "decay must be non-negative");
    if (!(eps > 0.0) || !std::isfinite(eps))
      fail(Errc::InvalidArgument, "finite-difference step must be positive");
    if (max_iters < 1 || max_iters > kMaxIters)
      fail(Errc::InvalidArgument, "max_iters must be in [1, 1000], got " +
                                      std::to_string(max_iters));
    if (patience < 1)
      fail(Errc::InvalidArgument, "patience must be at least 1");
  }
};

/// Decayed learning rate eta0 / (1 + d t).
inline double lr_at(const LdraConfig &cfg, int t) {
  return cfg.eta0 / (1.0 + cfg.decay * static_cast<double>(t));
}

/// Squared Frobenius norm of (w_tilde - w) x, where w is one group of a weight
/// row and x holds the calibration rows matching the group's columns.
inline double output_loss(std::span<const float> w, std::span<const double> w_tilde,
                          const MatrixView &x, std::vector<double> &acc) {
  if (w.size() != x.rows || w_tilde.size() != w.size())
    fail(Errc::ShapeMismatch, "group of " + std::to_string(w.size()) +
                                  " weights vs " + std::to_string(x.rows) +
                                  " calibration rows");
  acc.assign(x.cols, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = w_tilde[i] - static_cast<double>(w[i]);
    if (d == 0.0)
      continue;
    const auto xi = x.row(i);
    for (std::size_t j = 0; j < x.cols; ++j)
      acc[j] += d * static_cast<double>(xi[j]);
  }
  double loss = 0.0;
  for (double v : acc)
    loss += v * v;
  return loss;
}

/// Calibration loss of one group as a function of its quantization
/// parameters. Holds scratch buffers, so one instance per worker.
class GroupObjective {
public:
  GroupObjective(std::span<const float> w, MatrixView x, const QuantFormat &fmt)
      : w_(w), x_(x), fmt_(&fmt), codes_(w.size()), w_tilde_(w.size()) {
    if (w.size() != x.rows)
      fail(Errc::ShapeMismatch, "group of " + std::to_string(w.size()) +
                                    " weights vs " + std::to_string(x.rows) +
                                    " calibration rows");
  }

  double operator()(const QuantParams &p) {
    quantize_group(w_, p, *fmt_, codes_);
    for (std::size_t i = 0; i < codes_.size(); ++i)
      w_tilde_[i] = dequantize_code(codes_[i], p, *fmt_);
    return output_loss(w_, w_tilde_, x_, acc_);
  }

  std::span<const std::uint8_t> last_codes() const noexcept { return codes_; }

private:
  std::span<const float> w_;
  MatrixView x_;
  const QuantFormat *fmt_;
  std::vector<std::uint8_t> codes_;
  std::vector<double> w_tilde_;
  std::vector<double> acc_;
};

inline double group_loss(std::span<const float> w, const MatrixView &x,
                         const QuantParams &p, const QuantFormat &fmt) {
  GroupObjective f(w, x, fmt);
  return f(p);
}

constexpr int sign_of(double v) noexcept { return (v > 0.0) - (v < 0.0); }

/// Sign of the central difference f(x + eps) - f(x - eps). Falls back to the
/// forward difference f(x + eps) - f(x) when x - eps would leave the domain
/// (x - eps <= lower_bound).
template <class F>
int finite_diff_sign(F &&f, double x, double eps,
                     double lower_bound = -std::numeric_limits<double>::infinity()) {
  const double up = f(x + eps);
  const double down = (x - eps <= lower_bound) ? f(x) : f(x - eps);
  return sign_of(up - down);
}

struct TracePoint {
  int t = 0;
  double eta = 0.0;
  double loss = 0.0;
  QuantParams params;

  friend bool operator==(const TracePoint &, const TracePoint &) = default;
};

struct OptimizeTrace {
  std::vector<TracePoint> points;
  double best_loss = 0.0;
  QuantParams best_params;
  int iterations_run = 0;

  friend bool operator==(const OptimizeTrace &, const OptimizeTrace &) = default;
};

struct LdraResult {
  QuantParams params;
  OptimizeTrace trace;
};

/// Sign-gradient descent on (scale, zero) with finite-difference signs and a
/// decaying step. Both signs are taken at the same base point and applied
/// together. Iterates are kept at f32 precision (the persisted precision) and
/// the lowest-loss point ever visited, including `init`, is returned.
///
/// Stops early when the loss reaches zero, when no enabled coordinate has a
/// nonzero sign (the point is then a fixed point of the update), or after
/// `patience` iterations without a new best.
inline LdraResult optimize(std::span<const float> w, const MatrixView &x,
                           const QuantParams &init, const QuantFormat &fmt,
                           const LdraConfig &cfg) {
  cfg.validate();
  if (x.cols == 0)
    fail(Errc::ShapeMismatch, "calibration slab has no samples");
  if (!(init.scale > 0.0) || !std::isfinite(init.scale) || !std::isfinite(init.zero))
    fail(Errc::InvalidArgument, "initial parameters must be finite with scale > 0");

  GroupObjective objective(w, x, fmt);
  LdraResult out;
  auto &trace = out.trace;

  QuantParams current = init;
  double loss = objective(current);
  trace.points.push_back({0, lr_at(cfg, 0), loss, current});
  trace.best_loss = loss;
  trace.best_params = current;

  const bool any = cfg.optimize_scale || cfg.optimize_zero;
  int since_best = 0;
  for (int t = 1; any && trace.best_loss > 0.0 && t <= cfg.max_iters; ++t) {
    const double eta = lr_at(cfg, t - 1);
    const QuantParams base = current;
    int sign_scale = 0;
    int sign_zero = 0;
    if (cfg.optimize_scale)
      sign_scale = finite_diff_sign(
          [&](double s) { return objective({s, base.zero}); }, base.scale,
          cfg.eps, kMinScale);
    if (cfg.optimize_zero)
      sign_zero = finite_diff_sign(
          [&](double z) { return objective({base.scale, z}); }, base.zero,
          cfg.eps);
    if (sign_scale == 0 && sign_zero == 0)
      break;

    current.scale = base.scale - eta * sign_scale;
    current.zero = base.zero - eta * sign_zero;
    current = stored(current);
    loss = objective(current);
    trace.points.push_back({t, eta, loss, current});
    trace.iterations_run = t;

    if (loss < trace.best_loss) {
      trace.best_loss = loss;
      trace.best_params = current;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  out.params = trace.best_params;
  return out;
}

} // namespace daq
