#pragma once

#include <string>

#include "hpq/fixtures.hpp"
#include "hpq/model.hpp"

namespace hpq::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(HPQ_FIXTURE_DIR) + "/" + name;
}

/// The 2-input, 3-output, 5x5, 2D layer stored in fixtures/fig1.hpq.
inline LayerSpec fig1_layer() {
  LayerSpec l;
  l.name = "conv1";
  l.in_channels = 2;
  l.out_channels = 3;
  l.kernel_h = l.kernel_w = 5;
  l.scheme = QuantScheme::TwoD;
  l.coeff_precision = 8;
  l.coeff_formats.scheme = QuantScheme::TwoD;
  l.coeff_formats.entries = {{{0, 0}, {1, -5}}, {{0, 1}, {2, -4}}, {{0, 2}, {2, -4}},
                             {{1, 0}, {5, -1}}, {{1, 1}, {6, 0}},  {{1, 2}, {-1, -7}}};
  l.input_data_precision = 8;
  l.input_formats = {{3, -3}, {4, -2}};
  l.accumulator_precision = 16;
  l.accumulator_format = {11, -3};
  l.output_data_precision = 8;
  l.output_formats = {{10, 4}, {11, 5}, {9, 3}};
  return l;
}

inline QFormat random_format(FixtureRng& rng, int bits, int msb_lo, int msb_hi) {
  const int msb = rng.integer(msb_lo, msb_hi);
  return {msb, msb - (bits - 2)};
}

struct LayerShapeLimits {
  int max_channels = 4;
  int max_kernel = 5;
};

/// A valid layer with random shape, scheme, geometry, precisions and formats.
inline LayerSpec random_layer(FixtureRng& rng, int in_channels, const LayerShapeLimits& lim = {}) {
  LayerSpec l;
  l.name = "layer" + std::to_string(rng.integer(0, 999));
  l.in_channels = in_channels;
  l.out_channels = rng.integer(1, lim.max_channels);
  l.kernel_h = rng.integer(1, lim.max_kernel);
  l.kernel_w = rng.integer(1, lim.max_kernel);
  l.stride = rng.integer(1, 2);
  l.padding = rng.coin() ? Padding::Valid : Padding::SameZero;
  l.activation = rng.coin() ? Activation::None : Activation::ReLU;
  l.scheme = static_cast<QuantScheme>(rng.integer(0, 2));
  l.coeff_precision = rng.integer(4, 10);
  l.coeff_formats.scheme = l.scheme;
  for (int ic = 0; ic < l.in_channels; ++ic) {
    for (int oc = 0; oc < l.out_channels; ++oc) {
      const PartitionKey k = partition_key(l.scheme, ic, oc);
      if (!l.coeff_formats.entries.contains(k)) {
        l.coeff_formats.entries[k] = random_format(rng, l.coeff_precision, -4, 3);
      }
    }
  }
  l.input_data_precision = rng.integer(4, 10);
  for (int c = 0; c < l.in_channels; ++c) {
    l.input_formats.push_back(random_format(rng, l.input_data_precision, -2, 5));
  }
  l.accumulator_precision = rng.integer(8, 20);
  l.accumulator_format = random_format(rng, l.accumulator_precision, 0, 8);
  l.output_data_precision = rng.integer(4, 10);
  for (int c = 0; c < l.out_channels; ++c) {
    l.output_formats.push_back(random_format(rng, l.output_data_precision, -1, 7));
  }
  return l;
}

/// Uniformly random codes over each element's full range.
inline QTensor random_codes(FixtureRng& rng, std::vector<std::size_t> dims,
                            std::vector<QFormat> formats) {
  QTensor t{std::move(dims), {}, std::move(formats)};
  t.codes.resize(element_count(t.dims));
  for (std::size_t i = 0; i < t.codes.size(); ++i) {
    const QFormat f = t.format_at(i);
    t.codes[i] = rng.integer(static_cast<int>(min_code(f)), static_cast<int>(max_code(f)));
  }
  return t;
}

}  // namespace hpq::testing
