#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hpq/model.hpp"

namespace hpq {

struct ConvGeometry {
  int stride = 1;
  Padding padding = Padding::Valid;

  static ConvGeometry of(const LayerSpec& spec) { return {spec.stride, spec.padding}; }
};

/// Output size and leading padding for one spatial axis.
struct AxisPlan {
  std::size_t out = 0;
  std::size_t pad_before = 0;
};

/// Valid: out = floor((in - k) / s) + 1, no padding.
/// SameZero: out = ceil(in / s), pad_total = max((out - 1) * s + k - in, 0), pad_before = pad_total / 2.
/// Throws UsageError when the output would be empty.
AxisPlan plan_axis(std::size_t in, std::size_t kernel, const ConvGeometry& geom);

/// Float cross-correlation: in (Ci, H, W), weights (Co, Ci, kh, kw) -> (Co, oh, ow).
FloatTensor conv2d_float(const FloatTensor& input, const FloatTensor& weights,
                         const ConvGeometry& geom, Activation activation = Activation::None);

/// Bit-exact quantized convolution.
///
/// For every output pixel, input channels are visited in ascending order; each
/// channel's exact integer partial sum is aligned into the accumulator format and
/// added with saturation. The activation is applied to the accumulator value and the
/// result is requantized into the output channel format. `threads` splits output
/// channels across workers without changing any result.
QTensor conv2d_quantized(const QTensor& input, const QTensor& weights, const LayerSpec& spec,
                         RoundingMode mode = RoundingMode::NearestEven, int threads = 1);

struct LayerErrorReport {
  double sqnr_db = 0.0;
  double max_abs_err = 0.0;
  std::int64_t mismatch_count = 0;
};

/// 10 log10(sum ref^2 / sum (ref - test)^2); +inf when the error is exactly zero.
double sqnr_db(std::span<const double> ref, std::span<const double> test);

/// Compares a float reference against a quantized result. mismatch_count counts
/// codes that differ from quantize(ref) in the same format under NearestEven.
LayerErrorReport error_report(const FloatTensor& ref, const QTensor& test);

/// Float-vs-float variant; mismatch_count counts unequal elements.
LayerErrorReport error_report(const FloatTensor& ref, const FloatTensor& test);

struct NetworkRun {
  std::vector<QTensor> outputs;        // per layer, in that layer's output formats
  std::vector<FloatTensor> reference;  // float chain, per layer
  std::vector<LayerErrorReport> reports;
};

/// Quantizes `input` into layer 0's input formats and chains quantized layers; each
/// layer's output codes are aligned into the next layer's input formats.
/// The float reference chain uses `reference_weights` when non-empty and the
/// dequantized weights otherwise.
NetworkRun run_network(const NetworkSpec& net, const std::vector<QTensor>& weights,
                       const FloatTensor& input, RoundingMode mode = RoundingMode::NearestEven,
                       int threads = 1, const std::vector<FloatTensor>& reference_weights = {});

}  // namespace hpq
