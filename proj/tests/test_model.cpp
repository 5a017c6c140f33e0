#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include "hpq/error.hpp"
#include "hpq/model.hpp"
#include "test_support.hpp"

namespace hpq {
namespace {

using testing::fig1_layer;

bool mentions(const std::vector<Violation>& vs, const std::string& text) {
  return std::any_of(vs.begin(), vs.end(),
                     [&](const Violation& v) { return v.message.find(text) != std::string::npos; });
}

TEST(FormatFor, GoldenLayer) {
  const LayerSpec l = fig1_layer();
  EXPECT_EQ(format_for(l, 0, 0), (QFormat{1, -5}));
  EXPECT_EQ(format_for(l, 1, 2), (QFormat{-1, -7}));
  EXPECT_EQ(format_for(l, 0, 1), (QFormat{2, -4}));
  EXPECT_THROW(format_for(l, 2, 0), UsageError);
  EXPECT_THROW(format_for(l, 0, -1), UsageError);
}

TEST(FormatFor, FourDIsConstant) {
  LayerSpec l = fig1_layer();
  l.scheme = QuantScheme::FourD;
  l.coeff_formats = {QuantScheme::FourD, {{{}, {0, -6}}}};
  for (int ic = 0; ic < 2; ++ic) {
    for (int oc = 0; oc < 3; ++oc) EXPECT_EQ(format_for(l, ic, oc), (QFormat{0, -6}));
  }
}

TEST(FormatFor, ThreeDPerOutputChannel) {
  LayerSpec l = fig1_layer();
  l.scheme = QuantScheme::ThreeD;
  l.coeff_formats = {QuantScheme::ThreeD,
                     {{{PartitionKey::kAll, 0}, {0, -6}},
                      {{PartitionKey::kAll, 1}, {1, -5}},
                      {{PartitionKey::kAll, 2}, {2, -4}}}};
  EXPECT_TRUE(validate(l).empty());
  EXPECT_EQ(format_for(l, 1, 1), (QFormat{1, -5}));
  EXPECT_EQ(format_for(l, 0, 2), (QFormat{2, -4}));
}

TEST(Validate, GoldenLayerIsConsistent) { EXPECT_TRUE(validate(fig1_layer()).empty()); }

TEST(Validate, MissingTwoDEntry) {
  LayerSpec l = fig1_layer();
  l.coeff_formats.entries.erase({1, 2});
  EXPECT_TRUE(mentions(validate(l), "incomplete coeff_formats"));
}

TEST(Validate, DeclaredPrecisionDisagrees) {
  LayerSpec l = fig1_layer();
  l.coeff_precision = 7;
  const auto vs = validate(l);
  EXPECT_TRUE(mentions(vs, "precision mismatch"));
  EXPECT_EQ(vs.size(), 6u);  // every coefficient format is 8 bits
}

TEST(Validate, RejectsEachSingleFieldCorruption) {
  std::vector<std::pair<std::string, std::function<void(LayerSpec&)>>> corruptions = {
      {"drop a coefficient format", [](LayerSpec& l) { l.coeff_formats.entries.erase({0, 1}); }},
      {"extra input format", [](LayerSpec& l) { l.input_formats.push_back({3, -3}); }},
      {"short output formats", [](LayerSpec& l) { l.output_formats.pop_back(); }},
      {"accumulator width", [](LayerSpec& l) { l.accumulator_format = {11, -4}; }},
      {"table scheme", [](LayerSpec& l) { l.coeff_formats.scheme = QuantScheme::ThreeD; }},
      {"zero stride", [](LayerSpec& l) { l.stride = 0; }},
  };
  for (auto& [what, corrupt] : corruptions) {
    LayerSpec l = fig1_layer();
    corrupt(l);
    EXPECT_FALSE(validate(l).empty()) << what;
    EXPECT_THROW(require_valid(l), UsageError) << what;
  }
}

TEST(Validate, ReportsAllViolations) {
  LayerSpec l = fig1_layer();
  l.input_formats.clear();
  l.output_formats[0] = {10, 5};
  l.kernel_h = 0;
  EXPECT_GE(validate(l).size(), 3u);
}

TEST(Validate, NetworkChaining) {
  NetworkSpec net{{fig1_layer(), fig1_layer()}};
  net.layers[1].name = "conv2";
  const auto vs = validate(net);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].field, "conv2.in_channels");
}

FloatTensor fig1_weights(double fill) { return {{3, 2, 5, 5}, std::vector<double>(150, fill)}; }

TEST(QuantizeWeights, Examples) {
  const LayerSpec l = fig1_layer();
  EXPECT_TRUE(std::all_of(quantize_weights(fig1_weights(0.0), l).codes.begin(),
                          quantize_weights(fig1_weights(0.0), l).codes.end(),
                          [](std::int32_t c) { return c == 0; }));
  // Kernel (ic=0, oc=0) uses <1:-5>: the first 25 weights.
  const QTensor ones = quantize_weights(fig1_weights(1.0), l);
  EXPECT_EQ(ones.codes[0], 32);
  const QTensor neg = quantize_weights(fig1_weights(-8.5), l);
  EXPECT_EQ(neg.codes[0], -128);
  EXPECT_EQ(dequantize(neg.at(0)), -4.0);
  // Kernel (ic=1, oc=0) uses <5:-1>: -8.5 is exact there.
  EXPECT_EQ(neg.codes[25], -17);
}

TEST(QuantizeWeights, ShapeMismatch) {
  EXPECT_THROW(quantize_weights({{3, 2, 5, 4}, std::vector<double>(120)}, fig1_layer()),
               UsageError);
  EXPECT_THROW(quantize_weights({{2, 3, 5, 5}, std::vector<double>(150)}, fig1_layer()),
               UsageError);
}

FloatTensor random_fig1_weights(FixtureRng& rng) {
  FloatTensor w = fig1_weights(0.0);
  for (double& v : w.data) v = rng.uniform(-4.0, 4.0);
  return w;
}

TEST(QuantizeWeights, FourDEqualsUniformTwoD) {
  FixtureRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const QFormat f = testing::random_format(rng, 8, -3, 3);
    LayerSpec four = fig1_layer();
    four.scheme = QuantScheme::FourD;
    four.coeff_formats = {QuantScheme::FourD, {{{}, f}}};
    LayerSpec two = fig1_layer();
    for (auto& [k, fmt] : two.coeff_formats.entries) fmt = f;
    const FloatTensor w = random_fig1_weights(rng);
    EXPECT_EQ(quantize_weights(w, four).codes, quantize_weights(w, two).codes);
  }
}

TEST(QuantizeWeights, ElementwiseUnderSpatialPermutation) {
  FixtureRng rng(12);
  const LayerSpec l = fig1_layer();
  const FloatTensor w = random_fig1_weights(rng);
  const QTensor q = quantize_weights(w, l);
  // Reverse the taps of every kernel.
  FloatTensor flipped = w;
  QTensor expected = q;
  for (std::size_t k = 0; k < 6; ++k) {
    std::reverse(flipped.data.begin() + k * 25, flipped.data.begin() + (k + 1) * 25);
    std::reverse(expected.codes.begin() + k * 25, expected.codes.begin() + (k + 1) * 25);
  }
  EXPECT_EQ(quantize_weights(flipped, l).codes, expected.codes);
}

TEST(QTensor, CheckRejectsOutOfRangeCode) {
  QTensor t{{1, 1, 2}, {0, 200}, {{2, -4}}};
  EXPECT_THROW(check_qtensor(t), UsageError);
  t.codes[1] = 127;
  EXPECT_NO_THROW(check_qtensor(t));
  t.formats.push_back({2, -4});
  EXPECT_THROW(check_qtensor(t), UsageError);
}

TEST(Tensor, MakeChecksLengthAndFiniteness) {
  EXPECT_THROW(make_float_tensor({2, 2}, {1, 2, 3}), UsageError);
  EXPECT_THROW(make_float_tensor({1}, {std::nan("")}), DomainError);
  EXPECT_EQ(make_float_tensor({1, 2}, {1, 2}).size(), 2u);
}

}  // namespace
}  // namespace hpq
