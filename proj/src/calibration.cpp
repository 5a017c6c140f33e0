#include "hpq/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "hpq/engine.hpp"
#include "hpq/error.hpp"

namespace hpq {

void RangeStats::add(double v) noexcept {
  if (count == 0) {
    min = max = v;
  } else {
    min = std::min(min, v);
    max = std::max(max, v);
  }
  max_abs = std::max(std::abs(min), std::abs(max));
  ++count;
}

void RangeStats::merge(const RangeStats& other) noexcept {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  min = std::min(min, other.min);
  max = std::max(max, other.max);
  max_abs = std::max(std::abs(min), std::abs(max));
  count += other.count;
}

RangeStats collect_stats(std::span<const double> values) {
  RangeStats s;
  for (double v : values) s.add(v);
  return s;
}

namespace {

bool within_rounding_error(double v, QFormat f, RoundingMode mode) {
  const double err = std::abs(dequantize(quantize(v, f, mode)) - v);
  if (mode == RoundingMode::TruncateTowardNegInfinity) return err < std::ldexp(1.0, f.lsb);
  return err <= std::ldexp(1.0, f.lsb - 1);
}

}  // namespace

QFormat choose_format(const RangeStats& stats, int bits, RoundingMode mode) {
  if (bits < QFormat::kMinPrecision || bits > QFormat::kMaxPrecision) {
    throw UsageError("choose_format: precision " + std::to_string(bits) + "b outside [2, 32]");
  }
  const int frac = bits - 2;
  if (stats.count == 0 || stats.max_abs == 0.0) return {0, -frac};

  const int lowest = -QFormat::kMaxExponent + frac;
  const int highest = QFormat::kMaxExponent;
  auto fits = [&](int msb) {
    const QFormat f{msb, msb - frac};
    return within_rounding_error(stats.min, f, mode) && within_rounding_error(stats.max, f, mode);
  };

  int exponent = 0;
  const double mantissa = std::frexp(stats.max_abs, &exponent);  // max_abs = mantissa * 2^exponent
  const int ceil_log2 = mantissa == 0.5 ? exponent - 1 : exponent;
  int msb = std::clamp(ceil_log2 - 1, lowest, highest);
  while (msb > lowest && fits(msb - 1)) --msb;
  while (msb < highest && !fits(msb)) ++msb;
  return {msb, msb - frac};
}

FormatTable calibrate_weights(const FloatTensor& w, QuantScheme scheme, int bits,
                              RoundingMode mode) {
  if (w.dims.size() != 4 || w.size() != element_count(w.dims)) {
    throw UsageError("calibrate_weights: weights must be (Co, Ci, kh, kw)");
  }
  const std::size_t co = w.dims[0], ci = w.dims[1], kernel = w.dims[2] * w.dims[3];
  const std::span<const double> all(w.data);
  FormatTable table{scheme, {}};
  switch (scheme) {
    case QuantScheme::TwoD:
      for (std::size_t oc = 0; oc < co; ++oc) {
        for (std::size_t ic = 0; ic < ci; ++ic) {
          const auto slice = all.subspan((oc * ci + ic) * kernel, kernel);
          table.entries[{static_cast<int>(ic), static_cast<int>(oc)}] =
              choose_format(collect_stats(slice), bits, mode);
        }
      }
      break;
    case QuantScheme::ThreeD:
      for (std::size_t oc = 0; oc < co; ++oc) {
        const auto slice = all.subspan(oc * ci * kernel, ci * kernel);
        table.entries[{PartitionKey::kAll, static_cast<int>(oc)}] =
            choose_format(collect_stats(slice), bits, mode);
      }
      break;
    case QuantScheme::FourD:
      table.entries[{}] = choose_format(collect_stats(all), bits, mode);
      break;
  }
  return table;
}

LayerSpec make_skeleton(std::string name, const FloatTensor& weights, QuantScheme scheme,
                        int coeff_bits, int stride, Padding padding, Activation activation,
                        RoundingMode mode) {
  if (weights.dims.size() != 4) throw UsageError("make_skeleton: weights must be (Co, Ci, kh, kw)");
  LayerSpec spec;
  spec.name = std::move(name);
  spec.out_channels = static_cast<int>(weights.dims[0]);
  spec.in_channels = static_cast<int>(weights.dims[1]);
  spec.kernel_h = static_cast<int>(weights.dims[2]);
  spec.kernel_w = static_cast<int>(weights.dims[3]);
  spec.stride = stride;
  spec.padding = padding;
  spec.activation = activation;
  spec.scheme = scheme;
  spec.coeff_precision = coeff_bits;
  spec.coeff_formats = calibrate_weights(weights, scheme, coeff_bits, mode);
  return spec;
}

namespace {

// Partial sums per input channel and running sums, as the quantized engine accumulates them.
void observe_accumulator(const FloatTensor& input, const FloatTensor& weights,
                         const ConvGeometry& geom, RangeStats& stats) {
  const std::size_t ci = input.dims[0], h = input.dims[1], w = input.dims[2];
  const std::size_t co = weights.dims[0], kh = weights.dims[2], kw = weights.dims[3];
  const AxisPlan rows = plan_axis(h, kh, geom);
  const AxisPlan cols = plan_axis(w, kw, geom);
  const auto stride = static_cast<std::ptrdiff_t>(geom.stride);
  for (std::size_t oc = 0; oc < co; ++oc) {
    for (std::size_t y = 0; y < rows.out; ++y) {
      for (std::size_t x = 0; x < cols.out; ++x) {
        double running = 0.0;
        for (std::size_t ic = 0; ic < ci; ++ic) {
          double partial = 0.0;
          for (std::size_t ky = 0; ky < kh; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y) * stride +
                                      static_cast<std::ptrdiff_t>(ky) -
                                      static_cast<std::ptrdiff_t>(rows.pad_before);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x) * stride +
                                        static_cast<std::ptrdiff_t>(kx) -
                                        static_cast<std::ptrdiff_t>(cols.pad_before);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              partial += weights.data[((oc * ci + ic) * kh + ky) * kw + kx] *
                         input.data[(ic * h + static_cast<std::size_t>(iy)) * w +
                                    static_cast<std::size_t>(ix)];
            }
          }
          running += partial;
          stats.add(partial);
          stats.add(running);
        }
      }
    }
  }
}

std::vector<QFormat> channel_formats(const std::vector<FloatTensor>& tensors, int bits,
                                     RoundingMode mode) {
  const std::size_t channels = tensors.front().dims[0];
  std::vector<RangeStats> stats(channels);
  for (const FloatTensor& t : tensors) {
    const std::size_t plane = t.dims[1] * t.dims[2];
    for (std::size_t c = 0; c < channels; ++c) {
      stats[c].merge(collect_stats(std::span<const double>(t.data).subspan(c * plane, plane)));
    }
  }
  std::vector<QFormat> out;
  out.reserve(channels);
  for (const RangeStats& s : stats) out.push_back(choose_format(s, bits, mode));
  return out;
}

}  // namespace

NetworkSpec calibrate_activations(const NetworkSpec& skeleton,
                                  const std::vector<FloatTensor>& weights,
                                  const std::vector<FloatTensor>& samples,
                                  const DataPrecisions& precisions, RoundingMode mode) {
  if (samples.empty()) throw UsageError("calibrate_activations: no samples");
  if (skeleton.layers.empty()) throw UsageError("calibrate_activations: network has no layers");
  if (weights.size() != skeleton.layers.size()) {
    throw UsageError("calibrate_activations: one weight tensor per layer required");
  }

  NetworkSpec net = skeleton;
  std::vector<FloatTensor> activations = samples;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    LayerSpec& spec = net.layers[l];
    const FloatTensor& w = weights[l];
    const std::vector<std::size_t> expected_w{
        static_cast<std::size_t>(spec.out_channels), static_cast<std::size_t>(spec.in_channels),
        static_cast<std::size_t>(spec.kernel_h), static_cast<std::size_t>(spec.kernel_w)};
    if (w.dims != expected_w) {
      throw UsageError("calibrate_activations: weights of layer '" + spec.name +
                       "' do not match its shape");
    }
    for (const FloatTensor& a : activations) {
      if (a.dims.size() != 3 || a.dims[0] != static_cast<std::size_t>(spec.in_channels) ||
          a.dims != activations.front().dims) {
        throw UsageError("calibrate_activations: sample shape does not match layer '" +
                         spec.name + "'");
      }
    }
    const ConvGeometry geom = ConvGeometry::of(spec);
    spec.input_data_precision = precisions.input_bits;
    spec.accumulator_precision = precisions.accumulator_bits;
    spec.output_data_precision = precisions.output_bits;
    spec.input_formats = channel_formats(activations, precisions.input_bits, mode);

    RangeStats acc;
    std::vector<FloatTensor> outputs;
    outputs.reserve(activations.size());
    for (const FloatTensor& a : activations) {
      observe_accumulator(a, w, geom, acc);
      outputs.push_back(conv2d_float(a, w, geom, spec.activation));
    }
    spec.accumulator_format = choose_format(acc, precisions.accumulator_bits, mode);
    spec.output_formats = channel_formats(outputs, precisions.output_bits, mode);
    activations = std::move(outputs);
  }
  return net;
}

}  // namespace hpq
