#include "hpq/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "hpq/error.hpp"

namespace hpq {

AxisPlan plan_axis(std::size_t in, std::size_t kernel, const ConvGeometry& geom) {
  if (geom.stride <= 0) throw UsageError("stride must be positive");
  const auto s = static_cast<std::size_t>(geom.stride);
  if (geom.padding == Padding::Valid) {
    if (in < kernel) {
      throw UsageError("input extent " + std::to_string(in) + " smaller than kernel " +
                       std::to_string(kernel) + " with valid padding");
    }
    return {(in - kernel) / s + 1, 0};
  }
  if (in == 0) throw UsageError("empty input");
  const std::size_t out = (in + s - 1) / s;
  const std::size_t needed = (out - 1) * s + kernel;
  const std::size_t pad_total = needed > in ? needed - in : 0;
  return {out, pad_total / 2};
}

namespace {

struct ConvShape {
  std::size_t ci, co, kh, kw, h, w;
  AxisPlan rows, cols;
};

ConvShape conv_shape(const std::vector<std::size_t>& in_dims,
                     const std::vector<std::size_t>& w_dims, const ConvGeometry& geom) {
  if (in_dims.size() != 3) throw UsageError("input must be (C, H, W)");
  if (w_dims.size() != 4) throw UsageError("weights must be (Co, Ci, kh, kw)");
  if (w_dims[1] != in_dims[0]) {
    throw UsageError("weights expect " + std::to_string(w_dims[1]) + " input channels, input has " +
                     std::to_string(in_dims[0]));
  }
  ConvShape s{in_dims[0], w_dims[0], w_dims[2], w_dims[3], in_dims[1], in_dims[2], {}, {}};
  s.rows = plan_axis(s.h, s.kh, geom);
  s.cols = plan_axis(s.w, s.kw, geom);
  return s;
}

// Input coordinate for output index `o` and kernel tap `k`, or -1 when it falls in padding.
inline std::ptrdiff_t source_index(std::size_t o, std::size_t k, std::size_t stride,
                                   const AxisPlan& plan, std::size_t extent) {
  const auto pos = static_cast<std::ptrdiff_t>(o * stride + k) -
                   static_cast<std::ptrdiff_t>(plan.pad_before);
  return pos >= 0 && pos < static_cast<std::ptrdiff_t>(extent) ? pos : -1;
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers =
      std::clamp<std::size_t>(threads <= 0 ? 1 : static_cast<std::size_t>(threads), 1, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += workers) fn(i);
    });
  }
}

}  // namespace

FloatTensor conv2d_float(const FloatTensor& input, const FloatTensor& weights,
                         const ConvGeometry& geom, Activation activation) {
  const ConvShape s = conv_shape(input.dims, weights.dims, geom);
  const auto stride = static_cast<std::size_t>(geom.stride);
  FloatTensor out = zeros({s.co, s.rows.out, s.cols.out});
  for (std::size_t oc = 0; oc < s.co; ++oc) {
    for (std::size_t y = 0; y < s.rows.out; ++y) {
      for (std::size_t x = 0; x < s.cols.out; ++x) {
        double sum = 0.0;
        for (std::size_t ic = 0; ic < s.ci; ++ic) {
          for (std::size_t ky = 0; ky < s.kh; ++ky) {
            const auto iy = source_index(y, ky, stride, s.rows, s.h);
            if (iy < 0) continue;
            for (std::size_t kx = 0; kx < s.kw; ++kx) {
              const auto ix = source_index(x, kx, stride, s.cols, s.w);
              if (ix < 0) continue;
              sum += weights.data[((oc * s.ci + ic) * s.kh + ky) * s.kw + kx] *
                     input.data[(ic * s.h + static_cast<std::size_t>(iy)) * s.w +
                                static_cast<std::size_t>(ix)];
            }
          }
        }
        if (activation == Activation::ReLU) sum = std::max(sum, 0.0);
        out.data[(oc * s.rows.out + y) * s.cols.out + x] = sum;
      }
    }
  }
  return out;
}

QTensor conv2d_quantized(const QTensor& input, const QTensor& weights, const LayerSpec& spec,
                         RoundingMode mode, int threads) {
  require_valid(spec);
  check_qtensor(input);
  check_qtensor(weights);
  const ConvGeometry geom = ConvGeometry::of(spec);
  const ConvShape s = conv_shape(input.dims, weights.dims, geom);
  if (s.ci != static_cast<std::size_t>(spec.in_channels) ||
      s.co != static_cast<std::size_t>(spec.out_channels) ||
      s.kh != static_cast<std::size_t>(spec.kernel_h) ||
      s.kw != static_cast<std::size_t>(spec.kernel_w)) {
    throw UsageError("conv2d_quantized: tensor shapes do not match layer '" + spec.name + "'");
  }
  if (input.formats != spec.input_formats) {
    throw UsageError("conv2d_quantized: input formats differ from layer '" + spec.name + "'");
  }
  const std::vector<QFormat> kfmt = kernel_formats(spec);
  if (weights.formats != kfmt) {
    throw UsageError("conv2d_quantized: weight formats differ from layer '" + spec.name + "'");
  }

  const QFormat acc_fmt = spec.accumulator_format;
  const int acc_bits = precision(acc_fmt);
  const auto stride = static_cast<std::size_t>(spec.stride);
  QTensor out{{s.co, s.rows.out, s.cols.out},
              std::vector<std::int32_t>(s.co * s.rows.out * s.cols.out),
              spec.output_formats};

  parallel_for(s.co, threads, [&](std::size_t oc) {
    const QFormat out_fmt = spec.output_formats[oc];
    for (std::size_t y = 0; y < s.rows.out; ++y) {
      for (std::size_t x = 0; x < s.cols.out; ++x) {
        std::int64_t acc = 0;
        for (std::size_t ic = 0; ic < s.ci; ++ic) {
          WideInt partial = 0;
          const std::int32_t* w = &weights.codes[(oc * s.ci + ic) * s.kh * s.kw];
          const std::int32_t* plane = &input.codes[ic * s.h * s.w];
          for (std::size_t ky = 0; ky < s.kh; ++ky) {
            const auto iy = source_index(y, ky, stride, s.rows, s.h);
            if (iy < 0) continue;
            for (std::size_t kx = 0; kx < s.kw; ++kx) {
              const auto ix = source_index(x, kx, stride, s.cols, s.w);
              if (ix < 0) continue;
              partial += WideInt{w[ky * s.kw + kx]} *
                         plane[static_cast<std::size_t>(iy) * s.w + static_cast<std::size_t>(ix)];
            }
          }
          const int product_lsb = product_format(kfmt[oc * s.ci + ic], input.formats[ic]).lsb;
          const std::int64_t aligned = align_wide(partial, product_lsb, acc_fmt, mode);
          acc = saturate(WideInt{acc} + aligned, acc_bits);
        }
        if (spec.activation == Activation::ReLU) acc = std::max<std::int64_t>(acc, 0);
        out.codes[(oc * s.rows.out + y) * s.cols.out + x] =
            static_cast<std::int32_t>(align_wide(acc, acc_fmt.lsb, out_fmt, mode));
      }
    }
  });
  return out;
}

double sqnr_db(std::span<const double> ref, std::span<const double> test) {
  if (ref.size() != test.size()) throw UsageError("sqnr_db: length mismatch");
  long double signal = 0;
  long double noise = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const long double r = ref[i];
    const long double e = r - static_cast<long double>(test[i]);
    signal += r * r;
    noise += e * e;
  }
  if (noise == 0) return std::numeric_limits<double>::infinity();
  if (signal == 0) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(10.0L * std::log10(signal / noise));
}

LayerErrorReport error_report(const FloatTensor& ref, const FloatTensor& test) {
  if (ref.dims != test.dims || ref.size() != test.size()) {
    throw UsageError("error_report: dimension mismatch");
  }
  LayerErrorReport r;
  r.sqnr_db = sqnr_db(ref.data, test.data);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double err = std::abs(ref.data[i] - test.data[i]);
    r.max_abs_err = std::max(r.max_abs_err, err);
    if (err != 0.0) ++r.mismatch_count;
  }
  return r;
}

LayerErrorReport error_report(const FloatTensor& ref, const QTensor& test) {
  if (ref.dims != test.dims) throw UsageError("error_report: dimension mismatch");
  const FloatTensor deq = dequantize(test);
  LayerErrorReport r = error_report(ref, deq);
  r.mismatch_count = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (quantize(ref.data[i], test.format_at(i)).code != test.codes[i]) ++r.mismatch_count;
  }
  return r;
}

NetworkRun run_network(const NetworkSpec& net, const std::vector<QTensor>& weights,
                       const FloatTensor& input, RoundingMode mode, int threads,
                       const std::vector<FloatTensor>& reference_weights) {
  require_valid(net);
  if (net.layers.empty()) throw UsageError("run_network: network has no layers");
  if (weights.size() != net.layers.size()) {
    throw UsageError("run_network: " + std::to_string(net.layers.size()) + " layers but " +
                     std::to_string(weights.size()) + " weight tensors");
  }
  if (!reference_weights.empty() && reference_weights.size() != net.layers.size()) {
    throw UsageError("run_network: reference weight count does not match layer count");
  }

  NetworkRun run;
  QTensor current = quantize_data(input, net.layers.front().input_formats, mode);
  FloatTensor ref = input;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const LayerSpec& spec = net.layers[l];
    if (l > 0) {
      QTensor next{current.dims, current.codes, spec.input_formats};
      for (std::size_t i = 0; i < next.codes.size(); ++i) {
        next.codes[i] = static_cast<std::int32_t>(
            align(current.at(i), next.format_at(i), mode).code);
      }
      current = std::move(next);
    }
    current = conv2d_quantized(current, weights[l], spec, mode, threads);
    const FloatTensor wref = reference_weights.empty() ? dequantize(weights[l]) : reference_weights[l];
    ref = conv2d_float(ref, wref, ConvGeometry::of(spec), spec.activation);
    run.reports.push_back(error_report(ref, current));
    run.outputs.push_back(current);
    run.reference.push_back(ref);
  }
  return run;
}

}  // namespace hpq
