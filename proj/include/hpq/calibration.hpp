#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hpq/model.hpp"

namespace hpq {

struct RangeStats {
  double max_abs = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  void add(double v) noexcept;
  void merge(const RangeStats& other) noexcept;
};

RangeStats collect_stats(std::span<const double> values);

/// Smallest-msb format of the given width under which both stats.min and stats.max
/// quantize with at most the rounding mode's error bound (half an ulp for the
/// nearest modes, under one ulp for truncation), i.e. without material saturation.
/// Empty or all-zero stats give <0 : -(precision - 2)>.
QFormat choose_format(const RangeStats& stats, int precision,
                      RoundingMode mode = RoundingMode::NearestEven);

/// One format per partition of (Co, Ci, kh, kw) weights as the scheme dictates.
FormatTable calibrate_weights(const FloatTensor& weights, QuantScheme scheme, int precision,
                              RoundingMode mode = RoundingMode::NearestEven);

struct DataPrecisions {
  int input_bits = 8;
  int accumulator_bits = 16;
  int output_bits = 8;
};

/// Layer skeleton: shape, geometry, activation, scheme, coefficient precision and formats.
/// Data and accumulator formats are left for calibrate_activations.
LayerSpec make_skeleton(std::string name, const FloatTensor& weights, QuantScheme scheme,
                        int coeff_bits, int stride = 1, Padding padding = Padding::Valid,
                        Activation activation = Activation::None,
                        RoundingMode mode = RoundingMode::NearestEven);

/// Runs the float reference over all samples and fills every layer's input,
/// accumulator and output formats. The accumulator format covers each per-channel
/// partial sum and each running sum observed at any output pixel.
NetworkSpec calibrate_activations(const NetworkSpec& skeleton,
                                  const std::vector<FloatTensor>& weights,
                                  const std::vector<FloatTensor>& samples,
                                  const DataPrecisions& precisions,
                                  RoundingMode mode = RoundingMode::NearestEven);

}  // namespace hpq
