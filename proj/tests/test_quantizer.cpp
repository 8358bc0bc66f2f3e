#include <set>

#include <gtest/gtest.h>

#include "daq/quantizer.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace daq {
namespace {

using test::error_of;

TEST(ComputeParams, RangeEqualsQuantizationRange) {
  const auto p = compute_params({-1.0, 1.0}, build_nf_format(4));
  EXPECT_EQ(p.scale, 1.0);
  EXPECT_EQ(p.zero, 0.0);
}

TEST(ComputeParams, Int4Example) {
  const auto fmt = build_int_format(4);
  const auto p = compute_params({-1.0, 2.0}, fmt);
  EXPECT_DOUBLE_EQ(p.scale, 0.2);
  EXPECT_DOUBLE_EQ(p.zero, 5.0);
  const float alpha = -1.0f;
  const auto codes = quantize_group(std::span(&alpha, 1), p, fmt);
  EXPECT_EQ(codes[0], 0);
  EXPECT_DOUBLE_EQ(dequantize_code(codes[0], p, fmt), -1.0);
}

TEST(ComputeParams, DegenerateRange) {
  EXPECT_EQ(error_of([] { compute_params({3.0, 3.0}, build_int_format(4)); }),
            Errc::DegenerateRange);
  EXPECT_EQ(error_of([] { compute_params({3.0, 2.0}, build_int_format(4)); }),
            Errc::DegenerateRange);
}

TEST(ComputeParams, RangeOfInverts) {
  const auto fmt = build_nf_format(3);
  const DynamicRange r{-0.7, 1.3};
  const auto back = range_of(compute_params(r, fmt), fmt);
  EXPECT_NEAR(back.alpha, r.alpha, 1e-12);
  EXPECT_NEAR(back.beta, r.beta, 1e-12);
}

TEST(Quantize, GridPointsMapToTheirCodes) {
  for (const auto &fmt : {build_int_format(4), build_nf_format(4), build_nf_format(2)}) {
    const QuantParams p{0.25, 1.5};
    std::vector<float> w;
    for (double c : fmt.codebook)
      w.push_back(static_cast<float>(p.scale * (c - p.zero)));
    const auto codes = quantize_group(w, p, fmt);
    for (std::size_t i = 0; i < codes.size(); ++i)
      EXPECT_EQ(codes[i], i) << fmt.name();
  }
}

TEST(Quantize, Int4ExampleWithSaturation) {
  // Projected values: 0, 2.99999997, 5, 8.49999994, 500 (the f32 inputs are
  // not exactly -0.4 and 0.7), so the fourth entry rounds down to 8.
  const std::vector<float> w{-1.0f, -0.4f, 0.0f, 0.7f, 99.0f};
  const auto codes = quantize_group(w, {0.2, 5.0}, build_int_format(4));
  EXPECT_EQ(codes, (std::vector<std::uint8_t>{0, 3, 5, 8, 15}));
  for (std::size_t i = 0; i < w.size(); ++i)
    EXPECT_EQ(codes[i], oracle::nearest_code(w[i], {0.2, 5.0}, build_int_format(4)));
}

TEST(Quantize, TieBreaking) {
  const auto i4 = build_int_format(4);
  // exact halves under s = 1, z = 0
  const std::vector<float> w{0.5f, 1.5f, 2.5f, -3.0f, 14.5f};
  EXPECT_EQ(quantize_group(w, {1.0, 0.0}, i4), (std::vector<std::uint8_t>{0, 2, 2, 0, 14}));

  // NF: midpoint between two codes goes to the lower index
  const auto nf2 = build_nf_format(2);
  const float mid = 0.5f; // codebook {-1, 0, q, 1}; -0.5 is exactly between -1 and 0
  const QuantParams p{1.0, -1.0};
  EXPECT_EQ(quantize_group(std::span(&mid, 1), p, nf2)[0], 0);
}

TEST(Quantize, MatchesExhaustiveOracle) {
  NormalRng rng(7);
  for (const auto &fmt : {build_int_format(3), build_int_format(4), build_nf_format(2),
                          build_nf_format(3), build_nf_format(4)}) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto w = test::normal_vector(rng, 64);
      const QuantParams p{0.05 + std::abs(rng.normal()), rng.normal(0.0, 3.0)};
      const auto codes = quantize_group(w, p, fmt);
      for (std::size_t i = 0; i < w.size(); ++i)
        ASSERT_EQ(codes[i], oracle::nearest_code(w[i], p, fmt)) << fmt.name();
    }
  }
}

TEST(Quantize, Monotone) {
  NormalRng rng(11);
  const auto fmt = build_nf_format(4);
  auto w = test::normal_vector(rng, 200);
  std::sort(w.begin(), w.end());
  const auto codes = quantize_group(w, {0.4, 0.1}, fmt);
  EXPECT_TRUE(std::is_sorted(codes.begin(), codes.end()));
}

TEST(Dequantize, OnGridAndEndpoints) {
  const auto fmt = build_nf_format(4);
  const DynamicRange r{-0.3, 0.9};
  const auto p = compute_params(r, fmt);
  const std::vector<std::uint8_t> ends{0, 15};
  const auto v = dequantize_group(ends, p, fmt);
  EXPECT_NEAR(v[0], r.alpha, 1e-12);
  EXPECT_NEAR(v[1], r.beta, 1e-12);

  const std::vector<float> w{static_cast<float>(r.alpha), static_cast<float>(r.beta)};
  EXPECT_EQ(quantize_group(w, p, fmt), ends);
}

TEST(Dequantize, ValuesLieOnGrid) {
  NormalRng rng(3);
  const auto fmt = build_int_format(3);
  const QuantParams p{0.3, 2.5};
  std::set<double> grid;
  for (double c : fmt.codebook)
    grid.insert(p.scale * (c - p.zero));
  std::vector<std::uint8_t> codes(100);
  for (auto &c : codes)
    c = static_cast<std::uint8_t>(rng.below(8));
  for (double v : dequantize_group(codes, p, fmt))
    EXPECT_TRUE(grid.count(v));
}

TEST(Dequantize, CodeOutOfRange) {
  const std::vector<std::uint8_t> codes{8};
  EXPECT_EQ(error_of([&] { dequantize_group(codes, {1.0, 0.0}, build_int_format(3)); }),
            Errc::CodeOutOfRange);
}

TEST(RoundTrip, IntErrorBoundedByHalfScale) {
  NormalRng rng(5);
  const auto fmt = build_int_format(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = test::normal_vector(rng, 64);
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    const auto p = compute_params({*lo, *hi}, fmt);
    const auto back = dequantize_group(quantize_group(w, p, fmt), p, fmt);
    for (std::size_t i = 0; i < w.size(); ++i)
      EXPECT_LE(std::abs(back[i] - w[i]), p.scale / 2 + 1e-9);
  }
}

TEST(RoundTrip, NearestGridPointForAnyFormat) {
  NormalRng rng(6);
  for (const auto &fmt : {build_nf_format(3), build_nf_format(4), build_int_format(2)}) {
    const QuantParams p{0.3, 0.2};
    const auto w = test::normal_vector(rng, 256);
    const auto back = dequantize_group(quantize_group(w, p, fmt), p, fmt);
    for (std::size_t i = 0; i < w.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : fmt.codebook)
        best = std::min(best, std::abs(p.scale * (c - p.zero) - w[i]));
      EXPECT_NEAR(std::abs(back[i] - w[i]), best, 1e-12);
    }
  }
}

TEST(Partition, GroupsAndErrors) {
  const Tensor t(2, 4, {0, 1, 2, 3, 4, 5, 6, 7});
  const auto p2 = partition(t, 2);
  ASSERT_EQ(p2.groups.size(), 4u);
  EXPECT_EQ(p2.layout.groups_per_row(), 2u);
  EXPECT_EQ(p2.groups[3][0], 6.0f);
  EXPECT_EQ(p2.layout.col_of(3), 2u);
  EXPECT_EQ(p2.layout.row_of(3), 1u);

  const auto pr = partition(t, -1);
  ASSERT_EQ(pr.groups.size(), 2u);
  EXPECT_EQ(pr.groups[1].size(), 4u);
  EXPECT_EQ(pr.groups[1][0], 4.0f);

  EXPECT_EQ(error_of([&] { partition(t, 3); }), Errc::IndivisibleGroupSize);
  EXPECT_EQ(error_of([&] { partition(t, 0); }), Errc::IndivisibleGroupSize);
  EXPECT_EQ(error_of([&] { partition(t, -2); }), Errc::IndivisibleGroupSize);
}

TEST(Partition, ConcatenationRebuildsRows) {
  NormalRng rng(1);
  const Tensor t = test::normal_tensor(rng, 3, 12);
  const auto p = partition(t, 4);
  std::vector<float> rebuilt;
  for (const auto g : p.groups)
    rebuilt.insert(rebuilt.end(), g.begin(), g.end());
  EXPECT_TRUE(std::equal(rebuilt.begin(), rebuilt.end(), t.data().begin()));
}

TEST(StoredParams, RoundsToF32AndFloorsScale) {
  const auto p = stored({0.1, 1.0 / 3.0});
  EXPECT_EQ(p.scale, static_cast<double>(0.1f));
  EXPECT_EQ(p.zero, static_cast<double>(static_cast<float>(1.0 / 3.0)));
  EXPECT_GE(stored({-1.0, 0.0}).scale, kMinScale * 0.99);
}

} // namespace
} // namespace daq
