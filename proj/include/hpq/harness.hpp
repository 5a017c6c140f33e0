#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpq/calibration.hpp"
#include "hpq/model.hpp"

namespace hpq {

struct PipelineConfig {
  int coeff_bits = 8;
  DataPrecisions data{8, 16, 8};
  int stride = 1;
  Padding padding = Padding::Valid;
  Activation activation = Activation::None;
  RoundingMode rounding = RoundingMode::NearestEven;
  int threads = 1;
};

/// Calibrates a chain of layers (named conv1, conv2, ...) end to end for one scheme.
NetworkSpec calibrate_network(const std::vector<FloatTensor>& weights,
                              const std::vector<FloatTensor>& samples, QuantScheme scheme,
                              const PipelineConfig& config);

struct SchemeRow {
  QuantScheme scheme = QuantScheme::TwoD;
  double weight_sqnr_db = 0.0;
  double output_sqnr_db = 0.0;
  std::optional<double> class_error_pct;
};

struct CompareReport {
  std::vector<SchemeRow> rows;  // 2D, 3D, 4D
};

/// Calibrates, quantizes and runs the network under every scheme.
/// Weight SQNR pools all layers; output SQNR pools the final layer over all samples
/// against the float chain with the original weights.
CompareReport compare_schemes(const std::vector<FloatTensor>& weights,
                              const std::vector<FloatTensor>& samples,
                              std::span<const std::int32_t> labels, const PipelineConfig& config);

/// Fixed 4-decimal numbers, "inf" for infinite SQNR, one row per scheme.
std::string render(const CompareReport& report);

/// "%.4f", or "inf" / "-inf".
std::string format_number(double v);

}  // namespace hpq
