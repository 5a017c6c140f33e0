#pragma once

// Exact rational reference for fixed-point semantics. Shares no code with the
// shift-based implementation: values are built as exact fractions and rounded
// by comparing the fractional part against 1/2.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdint>
#include <vector>

#include "hpq/fixedpoint.hpp"
#include "hpq/model.hpp"

namespace hpq::oracle {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational pow2(int e) {
  BigInt one = 1;
  if (e >= 0) return Rational(BigInt(one << e));
  return Rational(BigInt(1), BigInt(one << -e));
}

inline Rational value_of(std::int64_t code, int lsb) { return Rational(code) * pow2(lsb); }

inline BigInt floor_of(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);  // always positive
  BigInt quot = num / den;                                 // truncates toward zero
  if (num < 0 && quot * den != num) quot -= 1;
  return quot;
}

inline BigInt round_rational(const Rational& q, RoundingMode mode) {
  const BigInt fl = floor_of(q);
  if (mode == RoundingMode::TruncateTowardNegInfinity) return fl;
  const Rational frac = q - Rational(fl);
  const Rational half(1, 2);
  if (frac > half) return fl + 1;
  if (frac < half) return fl;
  if (mode == RoundingMode::NearestEven) return (fl % 2 == 0) ? fl : fl + 1;
  return q > 0 ? fl + 1 : fl;
}

inline std::int64_t clamp_code(const BigInt& v, int bits) {
  const BigInt lo = -(BigInt(1) << (bits - 1));
  const BigInt hi = (BigInt(1) << (bits - 1)) - 1;
  return static_cast<std::int64_t>(std::clamp(v, lo, hi));
}

/// Code of `v` in `f`: round(v / 2^lsb) then clamp.
inline std::int64_t quantize(const Rational& v, QFormat f, RoundingMode mode) {
  return clamp_code(round_rational(v / pow2(f.lsb), mode), precision(f));
}

/// Output code of every (oc, y, x) of a quantized convolution, computed with fractions.
inline std::vector<std::int64_t> conv2d(const QTensor& in, const QTensor& w, const LayerSpec& spec,
                                        RoundingMode mode) {
  const int ci = spec.in_channels, co = spec.out_channels;
  const int kh = spec.kernel_h, kw = spec.kernel_w, s = spec.stride;
  const int h = static_cast<int>(in.dims[1]), wd = static_cast<int>(in.dims[2]);
  int oh, ow, pad_top = 0, pad_left = 0;
  if (spec.padding == Padding::Valid) {
    oh = (h - kh) / s + 1;
    ow = (wd - kw) / s + 1;
  } else {
    oh = (h + s - 1) / s;
    ow = (wd + s - 1) / s;
    pad_top = std::max((oh - 1) * s + kh - h, 0) / 2;
    pad_left = std::max((ow - 1) * s + kw - wd, 0) / 2;
  }
  const QFormat acc_fmt = spec.accumulator_format;
  std::vector<std::int64_t> out;
  for (int oc = 0; oc < co; ++oc) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        Rational acc = 0;
        for (int ic = 0; ic < ci; ++ic) {
          const QFormat wf = format_for(spec, ic, oc);
          const QFormat xf = spec.input_formats[static_cast<std::size_t>(ic)];
          Rational partial = 0;
          for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
              const int iy = y * s + ky - pad_top;
              const int ix = x * s + kx - pad_left;
              if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
              const auto wi = static_cast<std::size_t>(((oc * ci + ic) * kh + ky) * kw + kx);
              const auto xi = static_cast<std::size_t>((ic * h + iy) * wd + ix);
              partial += value_of(w.codes[wi], wf.lsb) * value_of(in.codes[xi], xf.lsb);
            }
          }
          const std::int64_t part_code = quantize(partial, acc_fmt, mode);
          const std::int64_t acc_code =
              quantize(acc + value_of(part_code, acc_fmt.lsb), acc_fmt, mode);
          acc = value_of(acc_code, acc_fmt.lsb);
        }
        if (spec.activation == Activation::ReLU && acc < 0) acc = 0;
        out.push_back(quantize(acc, spec.output_formats[static_cast<std::size_t>(oc)], mode));
      }
    }
  }
  return out;
}

}  // namespace hpq::oracle
