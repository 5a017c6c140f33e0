#include "hpq/fixedpoint.hpp"

#include <charconv>
#include <cmath>

#include "hpq/error.hpp"

namespace hpq {

bool is_valid(QFormat f) noexcept {
  const int p = precision(f);
  return f.msb >= f.lsb && p >= QFormat::kMinPrecision && p <= QFormat::kMaxPrecision &&
         f.msb <= QFormat::kMaxExponent && f.lsb >= -QFormat::kMaxExponent;
}

void require_valid(QFormat f) {
  if (f.msb < f.lsb) throw UsageError("format " + to_string(f) + ": msb < lsb");
  const int p = precision(f);
  if (p < QFormat::kMinPrecision || p > QFormat::kMaxPrecision) {
    throw UsageError("format " + to_string(f) + ": precision " + std::to_string(p) +
                     "b outside [2, 32]");
  }
  if (f.msb > QFormat::kMaxExponent || f.lsb < -QFormat::kMaxExponent) {
    throw UsageError("format " + to_string(f) + ": exponent outside [-64, 64]");
  }
}

ValueRange value_range(QFormat f) {
  require_valid(f);
  return {std::ldexp(static_cast<double>(min_code(f)), f.lsb),
          std::ldexp(static_cast<double>(max_code(f)), f.lsb)};
}

std::int64_t saturate(WideInt x, int bits) noexcept {
  const WideInt lo = min_code(bits);
  const WideInt hi = max_code(bits);
  if (x < lo) return static_cast<std::int64_t>(lo);
  if (x > hi) return static_cast<std::int64_t>(hi);
  return static_cast<std::int64_t>(x);
}

WideInt shift_right_round(WideInt x, int shift, RoundingMode mode) noexcept {
  if (shift <= 0) return x;
  // Callers keep |x| < 2^125, so beyond this shift every value rounds to 0 (or -1 when truncating).
  if (shift >= 126) {
    if (mode == RoundingMode::TruncateTowardNegInfinity) return x < 0 ? -1 : 0;
    return 0;
  }
  const WideInt floor = x >> shift;  // arithmetic shift: floor division
  if (mode == RoundingMode::TruncateTowardNegInfinity) return floor;
  const WideInt rem = x - (floor << shift);
  const WideInt half = WideInt{1} << (shift - 1);
  if (rem > half) return floor + 1;
  if (rem < half) return floor;
  if (mode == RoundingMode::NearestEven) return floor + (floor & 1);
  return x >= 0 ? floor + 1 : floor;  // ties away from zero
}

std::int64_t align_wide(WideInt code, int src_lsb, QFormat target, RoundingMode mode) noexcept {
  const int bits = precision(target);
  const int down = target.lsb - src_lsb;
  if (down >= 0) return saturate(shift_right_round(code, down, mode), bits);
  if (code == 0) return 0;
  const int up = -down;
  constexpr WideInt kLimit = WideInt{1} << 62;
  if (up >= 64 || code >= kLimit || code <= -kLimit) {
    return code > 0 ? max_code(bits) : min_code(bits);
  }
  return saturate(code * (WideInt{1} << up), bits);
}

QCode quantize(double x, QFormat f, RoundingMode mode) {
  if (!std::isfinite(x)) throw DomainError("quantize: non-finite input");
  require_valid(f);
  const double scaled = std::ldexp(x, -f.lsb);
  constexpr double kHuge = 4611686018427387904.0;  // 2^62
  if (scaled >= kHuge) return {max_code(f), f};
  if (scaled <= -kHuge) return {min_code(f), f};

  const double fl = std::floor(scaled);
  const double frac = scaled - fl;
  auto code = static_cast<WideInt>(fl);
  switch (mode) {
    case RoundingMode::NearestEven:
      if (frac > 0.5 || (frac == 0.5 && (code & 1) != 0)) ++code;
      break;
    case RoundingMode::NearestAway:
      if (frac > 0.5 || (frac == 0.5 && scaled > 0)) ++code;
      break;
    case RoundingMode::TruncateTowardNegInfinity:
      break;
  }
  return {saturate(code, precision(f)), f};
}

double dequantize(const QCode& c) { return std::ldexp(static_cast<double>(c.code), c.fmt.lsb); }

QCode align(const QCode& c, QFormat target, RoundingMode mode) {
  require_valid(target);
  return {align_wide(c.code, c.fmt.lsb, target, mode), target};
}

QCode sat_add(const QCode& a, const QCode& b) {
  if (a.fmt != b.fmt) {
    throw UsageError("sat_add: format mismatch " + to_string(a.fmt) + " vs " + to_string(b.fmt));
  }
  return {saturate(WideInt{a.code} + b.code, precision(a.fmt)), a.fmt};
}

std::string to_string(QFormat f) {
  return "<" + std::to_string(f.msb) + ":" + std::to_string(f.lsb) + ">";
}

namespace {

void skip_spaces(std::string_view& s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
}

bool take_int(std::string_view& s, int& out) {
  skip_spaces(s);
  const char* begin = s.data();
  if (!s.empty() && s.front() == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
  if (ec != std::errc{}) return false;
  s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
  skip_spaces(s);
  return true;
}

bool take_char(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

}  // namespace

std::optional<QFormat> parse_format(std::string_view text) {
  QFormat f;
  if (!take_char(text, '<') || !take_int(text, f.msb) || !take_char(text, ':') ||
      !take_int(text, f.lsb) || !take_char(text, '>') || !text.empty()) {
    return std::nullopt;
  }
  return f;
}

std::string_view to_string(RoundingMode mode) noexcept {
  switch (mode) {
    case RoundingMode::NearestEven: return "even";
    case RoundingMode::NearestAway: return "away";
    case RoundingMode::TruncateTowardNegInfinity: return "trunc";
  }
  return "?";
}

}  // namespace hpq
