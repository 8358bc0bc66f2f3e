#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "daq/error.hpp"
#include "daq/tensor.hpp"

namespace daq {

/// Seeded normal source. std::normal_distribution differs between standard
/// libraries, so the transform is done here on top of mt19937_64, whose output
/// sequence is fixed by the standard.
class NormalRng {
public:
  explicit NormalRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  std::mt19937_64 &engine() noexcept { return engine_; }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SynthSpec {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double outlier_frac = 0.0;
  double outlier_scale = 1.0;
  std::uint64_t seed = 0;
};

/// Standard-normal matrix where round(outlier_frac * rows * cols) entries,
/// chosen without replacement, are multiplied by outlier_scale.
inline Tensor generate_tensor(const SynthSpec &spec) {
  if (!(spec.outlier_frac >= 0.0 && spec.outlier_frac <= 1.0))
    fail(Errc::InvalidArgument, "outlier fraction must be in [0, 1]");
  Tensor t(spec.rows, spec.cols);
  NormalRng rng(spec.seed);
  for (auto &v : t.data())
    v = static_cast<float>(rng.normal());

  const std::size_t n = t.size();
  const auto outliers = static_cast<std::size_t>(std::llround(spec.outlier_frac * n));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i)
    idx[i] = i;
  for (std::size_t i = 0; i < outliers; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
    auto &v = t.data()[idx[i]];
    v = static_cast<float>(v * spec.outlier_scale);
  }
  return t;
}

} // namespace daq
