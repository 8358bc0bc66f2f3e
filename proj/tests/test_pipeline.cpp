#include <gtest/gtest.h>

#include "daq/metrics.hpp"
#include "daq/pipeline.hpp"
#include "daq/report.hpp"
#include "test_util.hpp"

namespace daq {
namespace {

using test::error_of;

TEST(Improvement, Examples) {
  // baseline gap 0.19, candidate gap 0.14
  EXPECT_NEAR(improvement(5.65 - 5.46, 5.60 - 5.46), 26.3, 0.05);
  EXPECT_EQ(improvement(3.0, 3.0), 0.0);
  EXPECT_EQ(improvement(3.0, 0.0), 100.0);
  EXPECT_EQ(error_of([] { improvement(0.0, 1.0); }), Errc::ZeroBaseline);
}

TEST(Perplexity, Examples) {
  const std::vector<double> uniform(10, -std::log(16.0));
  EXPECT_NEAR(perplexity(uniform), 16.0, 1e-9);
  const std::vector<double> perfect(5, 0.0);
  EXPECT_EQ(perplexity(perfect), 1.0);
  const std::vector<double> mixed{-std::log(2.0), -std::log(8.0)};
  EXPECT_NEAR(perplexity(mixed), 4.0, 1e-12);
  EXPECT_EQ(error_of([] { perplexity({}); }), Errc::EmptyInput);
  const std::vector<double> bad{0.5};
  EXPECT_EQ(error_of([&] { perplexity(bad); }), Errc::InvalidArgument);
}

TEST(MethodNames, Mapping) {
  EXPECT_FALSE(method_from_name("minmax").ldra);
  EXPECT_TRUE(std::holds_alternative<PercentilePolicy>(method_from_name("percentile").policy));
  EXPECT_TRUE(std::holds_alternative<GridSearchPolicy>(method_from_name("grid").policy));
  EXPECT_FALSE(method_from_name("dca").ldra);
  const auto daq = method_from_name("daq");
  EXPECT_TRUE(daq.ldra);
  EXPECT_TRUE(std::holds_alternative<DcaPolicy>(daq.policy));
  const auto ldra = method_from_name("ldra");
  EXPECT_TRUE(ldra.ldra);
  EXPECT_TRUE(std::holds_alternative<MinMaxPolicy>(ldra.policy));
  EXPECT_FALSE(method_from_name("daq-no-zero").ldra_cfg.optimize_zero);
  EXPECT_FALSE(method_from_name("daq-no-scale").ldra_cfg.optimize_scale);
  EXPECT_EQ(error_of([] { method_from_name("gptq"); }), Errc::InvalidArgument);
}

struct Layer {
  Tensor w;
  Tensor x;
};

Layer small_layer(std::uint64_t seed, std::size_t rows = 8, std::size_t cols = 64,
                  std::size_t samples = 16) {
  return {generate_tensor({rows, cols, 0.02, 10.0, seed}),
          generate_tensor({cols, samples, 0.0, 1.0, seed + 1})};
}

LayerOptions options(const std::string &method, std::int64_t g = 32, unsigned workers = 1) {
  LayerOptions o;
  o.group_size = g;
  o.method = method_from_name(method);
  o.workers = workers;
  return o;
}

TEST(QuantizeLayer, ShapeMismatch) {
  const auto l = small_layer(1);
  const Tensor wrong(10, 4);
  EXPECT_EQ(error_of([&] { quantize_layer(l.w, wrong, options("daq")); }), Errc::ShapeMismatch);
  EXPECT_EQ(error_of([&] { quantize_layer(l.w, l.x, options("daq", 30)); }),
            Errc::IndivisibleGroupSize);
}

TEST(QuantizeLayer, GridWeightsGiveZeroLossAndMatchRtn) {
  // Each group spans exactly [-8, 7] * 0.25 on INT4, so min-max lands on
  // s = 0.25 and every weight is representable; LDRA then has nothing to do.
  NormalRng rng(3);
  Tensor w(4, 32);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 32; ++c) {
      const int code = (c % 16 == 0) ? 0 : (c % 16 == 1) ? 15 : static_cast<int>(rng.below(16));
      w(r, c) = static_cast<float>(0.25 * (code - 8));
    }
  const Tensor x = test::normal_tensor(rng, 32, 8);
  auto opt = options("ldra", 16);
  opt.format = FormatKind::UniformInt;
  const auto daq = quantize_layer(w, x, opt);
  opt.method = method_from_name("minmax");
  const auto rtn = quantize_layer(w, x, opt);
  EXPECT_EQ(daq.report.total_loss, 0.0);
  EXPECT_EQ(rtn.report.total_loss, 0.0);
  EXPECT_EQ(daq.packed, rtn.packed);
}

TEST(QuantizeLayer, DaqNeverWorseThanDcaPerGroup) {
  for (std::uint64_t seed : {10u, 20u, 30u}) {
    const auto l = small_layer(seed);
    const auto dca = quantize_layer(l.w, l.x, options("dca"));
    const auto daq = quantize_layer(l.w, l.x, options("daq"));
    ASSERT_EQ(dca.report.groups, daq.report.groups);
    for (std::size_t g = 0; g < dca.report.groups; ++g)
      EXPECT_LE(daq.report.group_losses[g], dca.report.group_losses[g]);
    EXPECT_LE(daq.report.total_loss, dca.report.total_loss);
    EXPECT_EQ(daq.report.init_loss, dca.report.total_loss);
  }
}

TEST(QuantizeLayer, ReportMatchesArtifactRecomputation) {
  const auto l = small_layer(4);
  for (const char *m : {"minmax", "percentile", "grid", "dca", "daq", "ldra"}) {
    const auto res = quantize_layer(l.w, l.x, options(m));
    const auto check = verify_packed(res.packed, l.w, l.x);
    EXPECT_EQ(check.total_loss, res.report.total_loss) << m;
    EXPECT_EQ(check.group_losses, res.report.group_losses) << m;
  }
}

TEST(QuantizeLayer, WorkerCountDoesNotChangeResults) {
  const auto l = small_layer(5, 16, 128, 8);
  const auto one = quantize_layer(l.w, l.x, options("daq", 32, 1));
  const auto many = quantize_layer(l.w, l.x, options("daq", 32, 5));
  EXPECT_EQ(encode_packed(one.packed), encode_packed(many.packed));
  EXPECT_EQ(one.report, many.report);
}

TEST(QuantizeLayer, ConstantGroupsAreExact) {
  Tensor w(2, 8);
  for (std::size_t c = 0; c < 8; ++c) {
    w(0, c) = 0.123f;
    w(1, c) = static_cast<float>(c);
  }
  NormalRng rng(6);
  const Tensor x = test::normal_tensor(rng, 8, 4);
  for (auto fmt : {FormatKind::NormalFloat, FormatKind::UniformInt}) {
    auto opt = options("daq", 4);
    opt.format = fmt;
    const auto res = quantize_layer(w, x, opt);
    EXPECT_EQ(res.report.degenerate_groups, 2u); // row 0 holds two constant groups
    EXPECT_EQ(res.report.group_losses[0], 0.0);
    EXPECT_EQ(res.report.group_losses[1], 0.0);
  }
}

TEST(QuantizeLayer, PerRowGroups) {
  const auto l = small_layer(7);
  const auto res = quantize_layer(l.w, l.x, options("daq", -1));
  EXPECT_EQ(res.report.groups, 8u);
  EXPECT_EQ(res.packed.layout.group_size, -1);
  EXPECT_EQ(verify_packed(res.packed, l.w, l.x).total_loss, res.report.total_loss);
}

TEST(QuantizeLayer, ErrorsCarryGroupIndex) {
  // second group collapses to [5, 5] once 40% is clipped from each tail
  Tensor w(1, 16, {0, 1, 2, 3, 4, 5, 6, 7, 0, 5, 5, 5, 5, 5, 5, 9});
  const Tensor x(16, 2);
  auto opt = options("percentile", 8);
  opt.method.policy = PercentilePolicy{40.0};
  try {
    quantize_layer(w, x, opt);
    FAIL() << "expected DegenerateRange";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::DegenerateRange);
    EXPECT_NE(std::string(e.what()).find("group 1"), std::string::npos);
  }
}

TEST(QuantizeLayer, TracesKeptOnRequest) {
  const auto l = small_layer(8);
  auto opt = options("daq");
  opt.keep_traces = true;
  const auto res = quantize_layer(l.w, l.x, opt);
  ASSERT_EQ(res.traces.size(), res.report.groups);
  std::ostringstream os;
  write_trace_lines(os, 0, res.traces[0]);
  const auto first = nlohmann::json::parse(os.str().substr(0, os.str().find('\n')));
  EXPECT_EQ(first.at("t"), 0);
  EXPECT_EQ(first.at("group"), 0);
}

TEST(Verify, RejectsMismatchedWeights) {
  const auto l = small_layer(9);
  const auto res = quantize_layer(l.w, l.x, options("dca"));
  const Tensor other(4, 64);
  EXPECT_EQ(error_of([&] { verify_packed(res.packed, other, l.x); }), Errc::ShapeMismatch);
}

TEST(Compare, SingleAndIdenticalMethods) {
  const auto l = small_layer(11);
  const std::vector<MethodSpec> one{method_from_name("dca")};
  const auto single = compare(l.w, l.x, options("dca"), one);
  ASSERT_EQ(single.rows.size(), 1u);
  EXPECT_FALSE(single.improvements[0][0].has_value());

  const std::vector<MethodSpec> two{method_from_name("dca"), method_from_name("dca")};
  const auto same = compare(l.w, l.x, options("dca"), two);
  ASSERT_TRUE(same.improvements[0][1].has_value());
  EXPECT_EQ(*same.improvements[0][1], 0.0);
}

TEST(Compare, JobsMustShareInputs) {
  QuantJob a, b;
  a.weights = "w1.daqt";
  b.weights = "w2.daqt";
  const std::vector jobs{a, b};
  EXPECT_EQ(error_of([&] { compare(jobs); }), Errc::InputMismatch);
}

TEST(Compare, FiveWayTableFlagsLowestLoss) {
  const auto l = small_layer(12, 8, 128, 16);
  std::vector<MethodSpec> methods;
  for (const char *m : {"minmax", "percentile", "grid", "dca", "daq"})
    methods.push_back(method_from_name(m));
  const auto cmp = compare(l.w, l.x, options("daq", 64), methods);
  ASSERT_EQ(cmp.rows.size(), 5u);
  for (const auto &r : cmp.rows)
    EXPECT_GE(r.total_loss, cmp.rows[cmp.best].total_loss);
  const auto j = to_json(cmp);
  EXPECT_EQ(j.at("methods").size(), 5u);
  EXPECT_NE(to_csv(cmp).find("improvement_vs_minmax"), std::string::npos);
  EXPECT_NE(to_text(cmp).find("*best"), std::string::npos);
}

TEST(ParallelFor, LowestFailingIndexWins) {
  for (unsigned workers : {1u, 4u}) {
    try {
      parallel_for(100, workers, [](std::size_t i) {
        if (i == 17 || i == 60)
          throw Error(Errc::InvalidArgument, std::to_string(i));
      });
      FAIL();
    } catch (const Error &e) {
      EXPECT_EQ(e.detail(), "17");
    }
  }
}

TEST(Synth, DeterministicAndOutlierCount) {
  const SynthSpec spec{16, 32, 0.05, 100.0, 42};
  const auto a = generate_tensor(spec);
  EXPECT_EQ(a, generate_tensor(spec));
  auto plain = spec;
  plain.outlier_frac = 0.0;
  const auto b = generate_tensor(plain);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    changed += a.data()[i] != b.data()[i];
  EXPECT_LE(changed, 26u); // round(0.05 * 512), minus any exact zeros
  EXPECT_GE(changed, 25u);
}

} // namespace
} // namespace daq
