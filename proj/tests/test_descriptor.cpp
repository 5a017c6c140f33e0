#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "hpq/descriptor.hpp"
#include "hpq/error.hpp"
#include "test_support.hpp"

namespace hpq {
namespace {

std::string golden_text() {
  std::ifstream is(testing::fixture_path("fig1.hpq"), std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) lines.push_back(line);
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

bool has_kind(const ParseResult& r, ParseErrorKind kind) {
  return std::any_of(r.errors.begin(), r.errors.end(),
                     [&](const ParseError& e) { return e.kind == kind; });
}

TEST(Parse, GoldenFile) {
  const ParseResult r = parse_descriptor(golden_text());
  ASSERT_TRUE(r.ok()) << render(r.errors.front(), "fig1.hpq");
  ASSERT_EQ(r.network.layers.size(), 1u);
  const LayerSpec& l = r.network.layers[0];
  EXPECT_EQ(l.name, "conv1");
  EXPECT_EQ(l.in_channels, 2);
  EXPECT_EQ(l.out_channels, 3);
  EXPECT_EQ(l.kernel_h, 5);
  EXPECT_EQ(l.kernel_w, 5);
  EXPECT_EQ(l.scheme, QuantScheme::TwoD);
  EXPECT_EQ(format_for(l, 0, 1), (QFormat{2, -4}));
  EXPECT_EQ(l, testing::fig1_layer());
}

TEST(Serialize, GoldenFile) {
  const ParseResult r = parse_descriptor(golden_text());
  ASSERT_TRUE(r.ok());
  const std::string text = serialize(r.network);
  EXPECT_NE(text.find("\n  accumulator_format: <11:-3>\n"), std::string::npos);
  EXPECT_NE(text.find("\n  coeff_format[1:5, 1:5, 1, 2]: <-1:-7>\n"), std::string::npos);
  // One normalisation pass reaches a fixpoint.
  const ParseResult again = parse_descriptor(text);
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(again.network, r.network);
  EXPECT_EQ(serialize(again.network), text);
}

TEST(Serialize, EmptyNetworkAndInvalidSpec) {
  EXPECT_EQ(serialize(NetworkSpec{}), "");
  LayerSpec bad = testing::fig1_layer();
  bad.output_formats.pop_back();
  EXPECT_THROW(serialize(NetworkSpec{{bad}}), UsageError);
}

TEST(Parse, EmptyInputHasNoLayers) {
  for (std::string_view text : {"", "\n\n", "% only a comment\n"}) {
    const ParseResult r = parse_descriptor(text);
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors[0].message, "no layers");
  }
}

TEST(Parse, MissingTwoDKernelNamesIt) {
  auto lines = split_lines(golden_text());
  lines[12] = "";  // coeff_format[1:5, 1:5, 1, 1]
  const ParseResult r = parse_descriptor(join_lines(lines));
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].kind, ParseErrorKind::IncompleteCoverage);
  EXPECT_NE(r.errors[0].message.find("(1,1)"), std::string::npos) << r.errors[0].message;
}

TEST(Parse, DuplicateIsNeverSilent) {
  auto lines = split_lines(golden_text());
  lines.insert(lines.begin() + 13, "coeff_format[1:5, 1:5, 1, 1]: <6:0>");
  const ParseResult r = parse_descriptor(join_lines(lines));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.errors[0].kind, ParseErrorKind::DuplicateAssignment);
  EXPECT_EQ(r.errors[0].span.line, 14);
  EXPECT_TRUE(r.network.layers.empty());
}

TEST(Parse, SubKernelPartitionIsRejected) {
  auto lines = split_lines(golden_text());
  lines[7] = "  coeff_format[1:2, 1:5, 0, 0]: <1:-5>";
  const ParseResult r = parse_descriptor(join_lines(lines));
  EXPECT_TRUE(has_kind(r, ParseErrorKind::BadIndexRange));
}

TEST(Parse, TrailingProseOnlyAfterFormatOrKernelSize) {
  auto lines = split_lines(golden_text());
  lines[17] = "input_data_format[1]: <4:-2> second channel";
  EXPECT_TRUE(parse_descriptor(join_lines(lines)).ok());
  lines[15] = "input_data_precision: 8b bits";
  const ParseResult r = parse_descriptor(join_lines(lines));
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].kind, ParseErrorKind::Syntax);
  EXPECT_EQ(r.errors[0].span, (SourceSpan{16, 26}));
}

TEST(Parse, CrlfLineEndings) {
  std::string text;
  for (char c : golden_text()) {
    if (c == '\n') text += '\r';
    text += c;
  }
  const ParseResult r = parse_descriptor(text);
  ASSERT_TRUE(r.ok()) << render(r.errors.front(), "crlf");
  EXPECT_EQ(r.network.layers[0], testing::fig1_layer());
}

TEST(Parse, ThreeDAndFourDCoverage) {
  const std::string text = R"(layer {
  name: "a"
  number of input channels: 2
  number of output channels: 2
  kernel size: 3x1
  quantization structure: 3D
  coeff_precision: 8b
  coeff_format[1:1, 1:3, 0:1, 0]: <0:-6>
  coeff_format[1:1, 1:3, 0:1, 1]: <2:-4>
  input_data_precision: 8b
  input_data_format[0:1]: <3:-3>
  accumulator_precision: 16b
  accumulator_format: <11:-3>
  output_data_precision: 8b
  output_data_format[0]: <4:-2>
  output_data_format[1]: <4:-2>
  stride: 2
  padding: same
  activation: relu
}
layer {
  name: "b"
  number of input channels: 2
  number of output channels: 1
  kernel size: 1x1
  quantization structure: 4D
  coeff_precision: 4b
  coeff_format[1:1, 1:1, 0:1, 0]: <1:-1>
  input_data_precision: 8b
  input_data_format[0]: <4:-2>
  input_data_format[1]: <4:-2>
  accumulator_precision: 12b
  accumulator_format: <6:-4>
  output_data_precision: 8b
  output_data_format[0]: <4:-2>
}
)";
  const ParseResult r = parse_descriptor(text);
  ASSERT_TRUE(r.ok()) << render(r.errors.front(), "inline");
  const LayerSpec& a = r.network.layers[0];
  EXPECT_EQ(a.kernel_h, 3);
  EXPECT_EQ(a.kernel_w, 1);
  EXPECT_EQ(a.stride, 2);
  EXPECT_EQ(a.padding, Padding::SameZero);
  EXPECT_EQ(a.activation, Activation::ReLU);
  EXPECT_EQ(format_for(a, 0, 1), (QFormat{2, -4}));
  EXPECT_EQ(format_for(a, 1, 1), (QFormat{2, -4}));
  EXPECT_EQ(format_for(r.network.layers[1], 1, 0), (QFormat{1, -1}));
  EXPECT_EQ(parse_descriptor(serialize(r.network)).network, r.network);

  std::string partial_3d = text;
  partial_3d.replace(partial_3d.find("0:1, 0]"), 7, "0, 0]");
  EXPECT_TRUE(has_kind(parse_descriptor(partial_3d), ParseErrorKind::BadIndexRange));
}

TEST(Parse, ChainMismatchIsReported) {
  const std::string one = golden_text();
  const ParseResult r = parse_descriptor(one + one);
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.errors[0].message.find("input channels"), std::string::npos);
}

TEST(Parse, NameEscapes) {
  LayerSpec l = testing::fig1_layer();
  l.name = "odd \"name\" with \\ and\nnewline";
  const NetworkSpec net{{l}};
  const ParseResult r = parse_descriptor(serialize(net));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.network, net);
}

NetworkSpec random_network(FixtureRng& rng) {
  NetworkSpec net;
  const int layers = rng.integer(1, 3);
  int channels = rng.integer(1, 8);
  for (int i = 0; i < layers; ++i) {
    net.layers.push_back(testing::random_layer(rng, channels, {8, 7}));
    net.layers.back().name = "layer_" + std::to_string(i);
    channels = net.layers.back().out_channels;
  }
  return net;
}

TEST(Properties, RoundtripRandomNetworks) {
  FixtureRng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const NetworkSpec net = random_network(rng);
    ASSERT_TRUE(validate(net).empty());
    const ParseResult r = parse_descriptor(serialize(net));
    ASSERT_TRUE(r.ok()) << i << ": " << render(r.errors.front(), "random");
    ASSERT_EQ(r.network, net) << i;
  }
}

struct Corruption {
  std::size_t line;  // 1-based line of the golden file to replace
  std::string text;
  std::vector<std::string> tokens;  // every error line must contain one of these
};

TEST(Properties, ErrorSpansPointAtOffendingLines) {
  const std::vector<Corruption> corpus = {
      {13, "coeff_format[1:5, 1:5, 1, 1]: <6:1>", {"<6:1>"}},
      {13, "coeff_format[1:5, 1:5, 1, 0]: <5:-1>", {"coeff_format"}},
      {3, "  number of input channel: 2", {"number of input channel"}},
      {5, "  kernel size: 5by5", {"kernel size"}},
      {6, "  quantization structure: 5D", {"5D"}},
      {7, "  coeff_precision: eightb", {"coeff_precision"}},
      {8, "  coeff_format[1:4, 1:5, 0, 0]: <1:-5>", {"1:4"}},
      {9, "  coeff_format[1:5, 1:5, 0, 3]: <2:-4>", {"coeff_format"}},
      {17, "input_data_format[0]: <3:-2>", {"<3:-2>"}},
      {18, "input_data_format[2]: <4:-2>", {"input_data_format"}},
      {21, "accumulator_format: <11:-4>", {"<11:-4>"}},
      {21, "accumulator_format <11:-3>", {"accumulator_format", "layer"}},
      {24, "output_data_format[0]: <10:4", {"<10:4"}},
      {26, "output_data_format[2]: 9:3", {"9:3"}},
      {2, "  name: conv1", {"name"}},
      {29, "", {"layer"}},
      {20, "accumulator_precision: 16b extra", {"extra"}},
      {4, "  number of output channels: 0", {"number of output channels"}},
      {12, "coeff_format[1:5, 1:5, 1]: <5:-1>", {"coeff_format"}},
      {15, "coeff_precision: 8b", {"coeff_precision"}},
  };
  ASSERT_EQ(corpus.size(), 20u);
  const auto golden = split_lines(golden_text());
  ASSERT_EQ(golden.size(), 30u);  // the file ends with a blank line
  for (const Corruption& c : corpus) {
    auto lines = golden;
    lines[c.line - 1] = c.text;
    const ParseResult r = parse_descriptor(join_lines(lines));
    ASSERT_FALSE(r.ok()) << "corruption on line " << c.line << " was accepted";
    bool hit = false;
    for (const ParseError& e : r.errors) {
      ASSERT_GE(e.span.line, 1);
      ASSERT_LE(static_cast<std::size_t>(e.span.line), lines.size());
      const std::string& at = lines[static_cast<std::size_t>(e.span.line) - 1];
      hit = hit || std::any_of(c.tokens.begin(), c.tokens.end(), [&](const std::string& t) {
              return at.find(t) != std::string::npos;
            });
    }
    EXPECT_TRUE(hit) << "corruption on line " << c.line << ": first error "
                     << render(r.errors.front(), "fig1.hpq");
  }
}

TEST(Render, FileLineColumn) {
  const ParseError e{{3, 7}, ParseErrorKind::UnknownField, "unknown field 'x'"};
  EXPECT_EQ(render(e, "a.hpq"), "a.hpq:3:7: unknown field: unknown field 'x'");
}

}  // namespace
}  // namespace hpq
