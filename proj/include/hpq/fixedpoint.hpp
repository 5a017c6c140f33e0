#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace hpq {

/// Wide integer used for every intermediate so shifts and sums stay exact.
using WideInt = __int128;

enum class RoundingMode { NearestEven, NearestAway, TruncateTowardNegInfinity };

/// Signed fixed-point format `<msb:lsb>`.
///
/// The sign bit is implicit: magnitude bits carry weights 2^msb down to 2^lsb,
/// so a code occupies msb - lsb + 2 bits and represents code * 2^lsb.
/// Example: <2:-4> is `sgn b2 b1 b0 . b-1 b-2 b-3 b-4`, 8 bits, range [-8, 7.9375].
struct QFormat {
  int msb = 0;
  int lsb = 0;

  static constexpr int kMinPrecision = 2;
  static constexpr int kMaxPrecision = 32;
  static constexpr int kMaxExponent = 64;

  friend constexpr bool operator==(const QFormat&, const QFormat&) = default;
  friend constexpr auto operator<=>(const QFormat&, const QFormat&) = default;
};

constexpr int precision(QFormat f) noexcept { return f.msb - f.lsb + 2; }

/// msb >= lsb, precision within [2, 32], exponents within [-64, 64].
bool is_valid(QFormat f) noexcept;

/// Throws UsageError naming the violated constraint.
void require_valid(QFormat f);

/// Smallest and largest code of a `bits`-wide two's-complement integer.
constexpr std::int64_t min_code(int bits) noexcept { return -(std::int64_t{1} << (bits - 1)); }
constexpr std::int64_t max_code(int bits) noexcept { return (std::int64_t{1} << (bits - 1)) - 1; }
constexpr std::int64_t min_code(QFormat f) noexcept { return min_code(precision(f)); }
constexpr std::int64_t max_code(QFormat f) noexcept { return max_code(precision(f)); }

struct ValueRange {
  double min;
  double max;
};

/// [-2^(msb+1), 2^(msb+1) - 2^lsb]
ValueRange value_range(QFormat f);

/// A two's-complement code together with the format that interprets it.
struct QCode {
  std::int64_t code = 0;
  QFormat fmt;

  friend bool operator==(const QCode&, const QCode&) = default;
};

QCode quantize(double x, QFormat f, RoundingMode mode = RoundingMode::NearestEven);
double dequantize(const QCode& c);

/// Requantizes a code into `target` using integer shifts only.
QCode align(const QCode& c, QFormat target, RoundingMode mode = RoundingMode::NearestEven);

/// Saturating add; both operands must share a format.
QCode sat_add(const QCode& a, const QCode& b);

/// Exact container for products of codes in f1 and f2.
/// The result may be wider than kMaxPrecision; it is only used for intermediates.
constexpr QFormat product_format(QFormat f1, QFormat f2) noexcept {
  return QFormat{f1.msb + f2.msb + 2, f1.lsb + f2.lsb};
}

/// Low-level building blocks shared with the engine.

/// round(x / 2^shift) under `mode` for shift >= 0.
WideInt shift_right_round(WideInt x, int shift, RoundingMode mode) noexcept;

/// Clamps to the code range of `bits`.
std::int64_t saturate(WideInt x, int bits) noexcept;

/// Converts an exact value code * 2^src_lsb into a code of `target`.
std::int64_t align_wide(WideInt code, int src_lsb, QFormat target, RoundingMode mode) noexcept;

/// Renders `<msb:lsb>`.
std::string to_string(QFormat f);

/// Parses exactly `<msb:lsb>` with optional spaces around the numbers.
std::optional<QFormat> parse_format(std::string_view text);

std::string_view to_string(RoundingMode mode) noexcept;

}  // namespace hpq
