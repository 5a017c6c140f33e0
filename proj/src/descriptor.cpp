#include "hpq/descriptor.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <optional>
#include <set>
#include <sstream>

#include "hpq/error.hpp"

namespace hpq {

std::string_view to_string(ParseErrorKind kind) noexcept {
  switch (kind) {
    case ParseErrorKind::Syntax: return "syntax error";
    case ParseErrorKind::UnknownField: return "unknown field";
    case ParseErrorKind::DuplicateAssignment: return "duplicate assignment";
    case ParseErrorKind::IncompleteCoverage: return "incomplete coverage";
    case ParseErrorKind::PrecisionMismatch: return "precision mismatch";
    case ParseErrorKind::BadIndexRange: return "bad index range";
  }
  return "error";
}

std::string render(const ParseError& e, std::string_view filename) {
  std::ostringstream os;
  os << filename << ':' << e.span.line << ':' << e.span.column << ": " << to_string(e.kind)
     << ": " << e.message;
  return os.str();
}

namespace {

constexpr std::string_view kName = "name";
constexpr std::string_view kInChannels = "number of input channels";
constexpr std::string_view kOutChannels = "number of output channels";
constexpr std::string_view kKernelSize = "kernel size";
constexpr std::string_view kScheme = "quantization structure";
constexpr std::string_view kCoeffPrecision = "coeff_precision";
constexpr std::string_view kCoeffFormat = "coeff_format";
constexpr std::string_view kInputPrecision = "input_data_precision";
constexpr std::string_view kInputFormat = "input_data_format";
constexpr std::string_view kAccPrecision = "accumulator_precision";
constexpr std::string_view kAccFormat = "accumulator_format";
constexpr std::string_view kOutputPrecision = "output_data_precision";
constexpr std::string_view kOutputFormat = "output_data_format";
constexpr std::string_view kStride = "stride";
constexpr std::string_view kPadding = "padding";
constexpr std::string_view kActivation = "activation";

constexpr std::array kKnownKeys{kName,         kInChannels,  kOutChannels,    kKernelSize,
                                kScheme,       kCoeffPrecision, kCoeffFormat, kInputPrecision,
                                kInputFormat,  kAccPrecision, kAccFormat,      kOutputPrecision,
                                kOutputFormat, kStride,       kPadding,        kActivation};

/// Inclusive index range; a single index n is {n, n}.
struct IndexRange {
  int lo = 0;
  int hi = 0;

  bool covers(int first, int last) const { return lo == first && hi == last; }
};

std::string describe(const IndexRange& r) {
  return r.lo == r.hi ? std::to_string(r.lo) : std::to_string(r.lo) + ":" + std::to_string(r.hi);
}

template <class T>
struct Scalar {
  T value{};
  SourceSpan span;
};

struct FormatAssignment {
  SourceSpan span;
  std::vector<IndexRange> indices;
  QFormat fmt;
};

struct LayerDraft {
  SourceSpan header;
  std::optional<Scalar<std::string>> name;
  std::optional<Scalar<int>> in_channels, out_channels, stride;
  std::optional<Scalar<std::pair<int, int>>> kernel;  // (h, w)
  std::optional<Scalar<QuantScheme>> scheme;
  std::optional<Scalar<int>> coeff_bits, input_bits, acc_bits, output_bits;
  std::optional<Scalar<Padding>> padding;
  std::optional<Scalar<Activation>> activation;
  std::optional<Scalar<QFormat>> acc_format;
  std::vector<FormatAssignment> coeff, input, output;
};

/// Cursor over one line of text.
class LineCursor {
 public:
  LineCursor(std::string_view line, int line_no) : line_(line), line_no_(line_no) {}

  SourceSpan span() const { return {line_no_, static_cast<int>(pos_) + 1}; }
  SourceSpan span_at(std::size_t pos) const { return {line_no_, static_cast<int>(pos) + 1}; }
  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= line_.size(); }
  char peek() const { return at_end() ? '\0' : line_[pos_]; }
  std::string_view rest() const { return line_.substr(std::min(pos_, line_.size())); }

  void skip_spaces() {
    while (!at_end() && (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r')) ++pos_;
  }

  bool take(char c) {
    skip_spaces();
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  std::optional<int> take_int() {
    skip_spaces();
    const char* begin = line_.data() + pos_;
    const char* end = line_.data() + line_.size();
    int value = 0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{}) return std::nullopt;
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  std::string_view take_word() {
    skip_spaces();
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_')) {
      ++pos_;
    }
    return line_.substr(start, pos_ - start);
  }

  /// True when only whitespace or a `%` comment remains.
  bool only_comment_left() {
    skip_spaces();
    return at_end() || peek() == '%';
  }

  void advance(std::size_t n) { pos_ += n; }

 private:
  std::string_view line_;
  int line_no_;
  std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_ignorable(std::string_view line) {
  line = trim(line);
  if (line.empty() || line.front() == '%') return true;
  // "....." elision lines.
  return std::all_of(line.begin(), line.end(), [](char c) { return c == '.'; });
}

class Parser {
 public:
  explicit Parser(std::string_view text) {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      lines_.push_back(text.substr(start, nl - start));
      start = nl + 1;
    }
  }

  ParseResult run() {
    std::size_t i = 0;
    while (i < lines_.size()) {
      if (is_ignorable(lines_[i])) {
        ++i;
        continue;
      }
      i = parse_layer(i);
    }
    if (result_.network.layers.empty() && result_.errors.empty()) {
      error({1, 1}, ParseErrorKind::Syntax, "no layers");
    }
    std::stable_sort(result_.errors.begin(), result_.errors.end(),
                     [](const ParseError& a, const ParseError& b) {
                       return std::pair(a.span.line, a.span.column) <
                              std::pair(b.span.line, b.span.column);
                     });
    if (!result_.errors.empty()) result_.network.layers.clear();
    return std::move(result_);
  }

 private:
  void error(SourceSpan span, ParseErrorKind kind, std::string message) {
    result_.errors.push_back({span, kind, std::move(message)});
  }

  int line_no(std::size_t i) const { return static_cast<int>(i) + 1; }

  // Returns the index of the first line after the layer (or after the skipped garbage line).
  std::size_t parse_layer(std::size_t i) {
    LineCursor cur(lines_[i], line_no(i));
    cur.skip_spaces();
    const SourceSpan header = cur.span();
    if (cur.take_word() != "layer") {
      error(header, ParseErrorKind::Syntax,
            "expected 'layer', found '" + std::string(trim(lines_[i])) + "'");
      return i + 1;
    }
    if (!cur.take('{')) {
      // Allow the brace on the following line.
      if (!cur.only_comment_left()) {
        error(cur.span(), ParseErrorKind::Syntax, "expected '{' after 'layer'");
        return i + 1;
      }
      std::size_t j = i + 1;
      while (j < lines_.size() && is_ignorable(lines_[j])) ++j;
      LineCursor brace(j < lines_.size() ? lines_[j] : std::string_view{}, line_no(j));
      if (j >= lines_.size() || !brace.take('{')) {
        error(header, ParseErrorKind::Syntax, "expected '{' after 'layer'");
        return i + 1;
      }
      cur = brace;
      i = j;
    }
    if (!cur.only_comment_left()) {
      error(cur.span(), ParseErrorKind::Syntax,
            "unexpected text after '{': '" + std::string(trim(cur.rest())) + "'");
    }

    LayerDraft draft;
    draft.header = header;
    for (++i; i < lines_.size(); ++i) {
      if (is_ignorable(lines_[i])) continue;
      LineCursor line(lines_[i], line_no(i));
      if (line.take('}')) {
        if (!line.only_comment_left()) {
          error(line.span(), ParseErrorKind::Syntax,
                "unexpected text after '}': '" + std::string(trim(line.rest())) + "'");
        }
        finish_layer(draft);
        return i + 1;
      }
      parse_field(line, draft);
    }
    error(header, ParseErrorKind::Syntax, "unterminated layer: missing '}'");
    return i;
  }

  template <class T>
  void assign(std::optional<Scalar<T>>& slot, T value, SourceSpan span, std::string_view key) {
    if (slot) {
      error(span, ParseErrorKind::DuplicateAssignment,
            "duplicate assignment to '" + std::string(key) + "' (first set on line " +
                std::to_string(slot->span.line) + ")");
      return;
    }
    slot = Scalar<T>{std::move(value), span};
  }

  std::optional<std::vector<IndexRange>> parse_indices(LineCursor& cur) {
    std::vector<IndexRange> out;
    do {
      const SourceSpan at = cur.span();
      auto lo = cur.take_int();
      if (!lo) {
        cur.skip_spaces();
        error(cur.span(), ParseErrorKind::Syntax, "expected integer index");
        return std::nullopt;
      }
      IndexRange r{*lo, *lo};
      if (cur.take(':')) {
        auto hi = cur.take_int();
        if (!hi) {
          cur.skip_spaces();
          error(cur.span(), ParseErrorKind::Syntax, "expected range end after ':'");
          return std::nullopt;
        }
        r.hi = *hi;
      }
      if (r.hi < r.lo) {
        error(at, ParseErrorKind::BadIndexRange, "empty index range " + describe(r));
        return std::nullopt;
      }
      out.push_back(r);
    } while (cur.take(','));
    if (!cur.take(']')) {
      cur.skip_spaces();
      error(cur.span(), ParseErrorKind::Syntax, "expected ']' to close index list");
      return std::nullopt;
    }
    return out;
  }

  std::optional<QFormat> parse_fmt(LineCursor& cur) {
    cur.skip_spaces();
    const SourceSpan at = cur.span();
    QFormat f;
    std::optional<int> msb, lsb;
    if (cur.take('<') && (msb = cur.take_int()) && cur.take(':') && (lsb = cur.take_int()) &&
        cur.take('>')) {
      f.msb = *msb;
      f.lsb = *lsb;
      return f;
    }
    error(at, ParseErrorKind::Syntax, "expected format literal '<msb:lsb>'");
    return std::nullopt;
  }

  std::optional<int> parse_bits(LineCursor& cur) {
    cur.skip_spaces();
    const SourceSpan at = cur.span();
    auto bits = cur.take_int();
    if (!bits) {
      error(at, ParseErrorKind::Syntax, "expected precision such as '8b'");
      return std::nullopt;
    }
    if (cur.peek() == 'b') cur.advance(1);
    if (*bits < QFormat::kMinPrecision || *bits > QFormat::kMaxPrecision) {
      error(at, ParseErrorKind::Syntax,
            "precision " + std::to_string(*bits) + "b outside [2, 32]");
      return std::nullopt;
    }
    return bits;
  }

  std::optional<int> parse_positive(LineCursor& cur, std::string_view key) {
    cur.skip_spaces();
    const SourceSpan at = cur.span();
    auto v = cur.take_int();
    if (!v || *v <= 0) {
      error(at, ParseErrorKind::Syntax, "'" + std::string(key) + "' expects a positive integer");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::string> parse_quoted(LineCursor& cur) {
    cur.skip_spaces();
    const SourceSpan at = cur.span();
    if (!cur.take('"')) {
      error(at, ParseErrorKind::Syntax, "expected quoted string");
      return std::nullopt;
    }
    std::string out;
    while (!cur.at_end()) {
      char c = cur.peek();
      cur.advance(1);
      if (c == '"') return out;
      if (c == '\\') {
        if (cur.at_end()) break;
        char e = cur.peek();
        cur.advance(1);
        out.push_back(e == 'n' ? '\n' : e);
      } else {
        out.push_back(c);
      }
    }
    error(at, ParseErrorKind::Syntax, "unterminated string");
    return std::nullopt;
  }

  void parse_field(LineCursor& cur, LayerDraft& draft) {
    cur.skip_spaces();
    const SourceSpan key_span = cur.span();
    const std::string_view rest = cur.rest();
    const std::size_t key_end = rest.find_first_of("[:");
    if (key_end == std::string_view::npos) {
      error(key_span, ParseErrorKind::Syntax,
            "expected 'key: value', found '" + std::string(trim(rest)) + "'");
      return;
    }
    const std::string_view key = trim(rest.substr(0, key_end));
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
      error(key_span, ParseErrorKind::UnknownField, "unknown field '" + std::string(key) + "'");
      return;
    }
    cur.advance(key_end);

    std::vector<IndexRange> indices;
    const bool has_indices = cur.take('[');
    if (has_indices) {
      auto parsed = parse_indices(cur);
      if (!parsed) return;
      indices = std::move(*parsed);
    }
    if (!cur.take(':')) {
      cur.skip_spaces();
      error(cur.span(), ParseErrorKind::Syntax, "expected ':' after '" + std::string(key) + "'");
      return;
    }

    const bool indexed_key = key == kCoeffFormat || key == kInputFormat || key == kOutputFormat;
    if (has_indices && !indexed_key) {
      error(key_span, ParseErrorKind::BadIndexRange,
            "field '" + std::string(key) + "' takes no index");
      return;
    }
    if (indexed_key) {
      const std::size_t want = key == kCoeffFormat ? 4 : 1;
      if (indices.size() != want) {
        error(key_span, ParseErrorKind::BadIndexRange,
              "'" + std::string(key) + "' needs " + std::to_string(want) + " index" +
                  (want == 1 ? "" : "es") + ", got " + std::to_string(indices.size()));
        return;
      }
    }

    bool prose_allowed = false;
    if (key == kName) {
      auto v = parse_quoted(cur);
      if (!v) return;
      assign(draft.name, std::move(*v), key_span, key);
    } else if (key == kInChannels || key == kOutChannels || key == kStride) {
      auto v = parse_positive(cur, key);
      if (!v) return;
      auto& slot = key == kInChannels ? draft.in_channels
                                      : (key == kOutChannels ? draft.out_channels : draft.stride);
      assign(slot, *v, key_span, key);
    } else if (key == kKernelSize) {
      cur.skip_spaces();
      const SourceSpan at = cur.span();
      auto h = cur.take_int();
      std::optional<int> w;
      if (h && (cur.peek() == 'x' || cur.peek() == 'X')) {
        cur.advance(1);
        w = cur.take_int();
      }
      if (!h || !w || *h <= 0 || *w <= 0) {
        error(at, ParseErrorKind::Syntax, "expected kernel size such as '5x5'");
        return;
      }
      assign(draft.kernel, std::pair(*h, *w), key_span, key);
      prose_allowed = true;
    } else if (key == kScheme) {
      cur.skip_spaces();
      const SourceSpan at = cur.span();
      const std::string_view word = cur.take_word();
      QuantScheme s;
      if (word == "2D") {
        s = QuantScheme::TwoD;
      } else if (word == "3D") {
        s = QuantScheme::ThreeD;
      } else if (word == "4D") {
        s = QuantScheme::FourD;
      } else {
        error(at, ParseErrorKind::Syntax,
              "expected quantization structure 2D, 3D or 4D, found '" + std::string(word) + "'");
        return;
      }
      assign(draft.scheme, s, key_span, key);
    } else if (key == kCoeffPrecision || key == kInputPrecision || key == kAccPrecision ||
               key == kOutputPrecision) {
      auto v = parse_bits(cur);
      if (!v) return;
      auto& slot = key == kCoeffPrecision   ? draft.coeff_bits
                   : key == kInputPrecision ? draft.input_bits
                   : key == kAccPrecision   ? draft.acc_bits
                                            : draft.output_bits;
      assign(slot, *v, key_span, key);
    } else if (key == kPadding) {
      cur.skip_spaces();
      const SourceSpan at = cur.span();
      const std::string_view word = cur.take_word();
      if (word != "valid" && word != "same") {
        error(at, ParseErrorKind::Syntax,
              "expected padding 'valid' or 'same', found '" + std::string(word) + "'");
        return;
      }
      assign(draft.padding, word == "valid" ? Padding::Valid : Padding::SameZero, key_span, key);
    } else if (key == kActivation) {
      cur.skip_spaces();
      const SourceSpan at = cur.span();
      const std::string_view word = cur.take_word();
      if (word != "none" && word != "relu") {
        error(at, ParseErrorKind::Syntax,
              "expected activation 'none' or 'relu', found '" + std::string(word) + "'");
        return;
      }
      assign(draft.activation, word == "none" ? Activation::None : Activation::ReLU, key_span,
             key);
    } else {
      auto f = parse_fmt(cur);
      if (!f) return;
      prose_allowed = true;
      if (key == kAccFormat) {
        assign(draft.acc_format, *f, key_span, key);
      } else {
        auto& list = key == kCoeffFormat ? draft.coeff
                     : key == kInputFormat ? draft.input
                                           : draft.output;
        list.push_back({key_span, std::move(indices), *f});
      }
    }

    if (!prose_allowed && !cur.only_comment_left()) {
      error(cur.span(), ParseErrorKind::Syntax,
            "unexpected text after value: '" + std::string(trim(cur.rest())) + "'");
    }
  }

  void check_precision(const FormatAssignment& a, const std::optional<Scalar<int>>& bits,
                       std::string_view role) {
    if (bits && precision(a.fmt) != bits->value) {
      error(a.span, ParseErrorKind::PrecisionMismatch,
            to_string(a.fmt) + " is " + std::to_string(precision(a.fmt)) + "b but " +
                std::string(role) + " is " + std::to_string(bits->value) + "b");
    } else if (!is_valid(a.fmt)) {
      error(a.span, ParseErrorKind::Syntax, "invalid format " + to_string(a.fmt));
    }
  }

  bool in_bounds(const IndexRange& r, int count) const { return r.lo >= 0 && r.hi < count; }

  // Per-channel data formats: returns the channel list when complete.
  std::optional<std::vector<QFormat>> collect_channels(const std::vector<FormatAssignment>& list,
                                                       int count, std::string_view key,
                                                       const std::optional<Scalar<int>>& bits,
                                                       std::string_view bits_key,
                                                       const LayerDraft& draft) {
    std::vector<std::optional<QFormat>> slots(static_cast<std::size_t>(count));
    std::vector<int> first_line(static_cast<std::size_t>(count), 0);
    bool failed = false;
    for (const FormatAssignment& a : list) {
      check_precision(a, bits, bits_key);
      const IndexRange& r = a.indices[0];
      if (!in_bounds(r, count)) {
        error(a.span, ParseErrorKind::BadIndexRange,
              "'" + std::string(key) + "[" + describe(r) + "]' outside channels 0.." +
                  std::to_string(count - 1));
        failed = true;
        continue;
      }
      for (int c = r.lo; c <= r.hi; ++c) {
        auto idx = static_cast<std::size_t>(c);
        if (slots[idx]) {
          error(a.span, ParseErrorKind::DuplicateAssignment,
                "duplicate assignment to '" + std::string(key) + "[" + std::to_string(c) +
                    "]' (first set on line " + std::to_string(first_line[idx]) + ")");
          continue;
        }
        slots[idx] = a.fmt;
        first_line[idx] = a.span.line;
      }
    }
    const SourceSpan where = list.empty() ? draft.header : list.front().span;
    std::vector<QFormat> out;
    for (int c = 0; c < count; ++c) {
      if (!slots[static_cast<std::size_t>(c)]) {
        error(where, ParseErrorKind::IncompleteCoverage,
              "missing '" + std::string(key) + "[" + std::to_string(c) + "]'");
        failed = true;
      } else {
        out.push_back(*slots[static_cast<std::size_t>(c)]);
      }
    }
    if (failed) return std::nullopt;
    return out;
  }

  std::optional<FormatTable> collect_coeffs(const LayerDraft& draft, QuantScheme scheme, int ci,
                                            int co, int kh, int kw) {
    FormatTable table{scheme, {}};
    std::map<PartitionKey, int> first_line;
    bool failed = false;
    const auto full_ic = IndexRange{0, ci - 1};
    const auto full_oc = IndexRange{0, co - 1};
    for (const FormatAssignment& a : draft.coeff) {
      check_precision(a, draft.coeff_bits, kCoeffPrecision);
      const IndexRange& xr = a.indices[0];
      const IndexRange& yr = a.indices[1];
      const IndexRange& icr = a.indices[2];
      const IndexRange& ocr = a.indices[3];
      if (!xr.covers(1, kw) || !yr.covers(1, kh)) {
        error(a.span, ParseErrorKind::BadIndexRange,
              "spatial ranges [" + describe(xr) + ", " + describe(yr) +
                  "] must cover the whole kernel [1:" + std::to_string(kw) + ", 1:" +
                  std::to_string(kh) + "]");
        failed = true;
        continue;
      }
      if (!in_bounds(icr, ci) || !in_bounds(ocr, co)) {
        error(a.span, ParseErrorKind::BadIndexRange,
              "channel indices [" + describe(icr) + ", " + describe(ocr) + "] outside " +
                  std::to_string(ci) + " input x " + std::to_string(co) + " output channels");
        failed = true;
        continue;
      }
      if (scheme == QuantScheme::ThreeD && !icr.covers(0, ci - 1)) {
        error(a.span, ParseErrorKind::BadIndexRange,
              "3D structure needs the full input-channel range " + describe(full_ic) +
                  ", got " + describe(icr));
        failed = true;
        continue;
      }
      if (scheme == QuantScheme::FourD && (!icr.covers(0, ci - 1) || !ocr.covers(0, co - 1))) {
        error(a.span, ParseErrorKind::BadIndexRange,
              "4D structure needs full channel ranges [" + describe(full_ic) + ", " +
                  describe(full_oc) + "], got [" + describe(icr) + ", " + describe(ocr) + "]");
        failed = true;
        continue;
      }
      std::set<PartitionKey> keys;
      for (int ic = icr.lo; ic <= icr.hi; ++ic) {
        for (int oc = ocr.lo; oc <= ocr.hi; ++oc) keys.insert(partition_key(scheme, ic, oc));
      }
      for (const PartitionKey& k : keys) {
        if (auto it = first_line.find(k); it != first_line.end()) {
          error(a.span, ParseErrorKind::DuplicateAssignment,
                "duplicate coeff_format for kernel " + key_text(k) + " (first set on line " +
                    std::to_string(it->second) + ")");
          continue;
        }
        first_line[k] = a.span.line;
        table.entries[k] = a.fmt;
      }
    }
    const SourceSpan where = draft.coeff.empty() ? draft.header : draft.coeff.front().span;
    std::set<PartitionKey> expected;
    for (int ic = 0; ic < ci; ++ic) {
      for (int oc = 0; oc < co; ++oc) expected.insert(partition_key(scheme, ic, oc));
    }
    for (const PartitionKey& k : expected) {
      if (!table.entries.contains(k)) {
        error(where, ParseErrorKind::IncompleteCoverage,
              "missing coeff_format for kernel " + key_text(k));
        failed = true;
      }
    }
    if (failed) return std::nullopt;
    return table;
  }

  static std::string key_text(const PartitionKey& k) {
    auto part = [](int v) { return v == PartitionKey::kAll ? std::string("all") : std::to_string(v); };
    return "(" + part(k.ic) + "," + part(k.oc) + ")";
  }

  void finish_layer(const LayerDraft& d) {
    const std::size_t errors_before = result_.errors.size();
    auto require = [&](bool present, std::string_view key) {
      if (!present) {
        error(d.header, ParseErrorKind::Syntax, "layer is missing field '" + std::string(key) + "'");
      }
    };
    require(d.name.has_value(), kName);
    require(d.in_channels.has_value(), kInChannels);
    require(d.out_channels.has_value(), kOutChannels);
    require(d.kernel.has_value(), kKernelSize);
    require(d.scheme.has_value(), kScheme);
    require(d.coeff_bits.has_value(), kCoeffPrecision);
    require(d.input_bits.has_value(), kInputPrecision);
    require(d.acc_bits.has_value(), kAccPrecision);
    require(d.acc_format.has_value(), kAccFormat);
    require(d.output_bits.has_value(), kOutputPrecision);

    if (d.acc_format) {
      FormatAssignment a{d.acc_format->span, {}, d.acc_format->value};
      check_precision(a, d.acc_bits, kAccPrecision);
    }

    std::optional<FormatTable> coeffs;
    std::optional<std::vector<QFormat>> inputs, outputs;
    if (d.in_channels && d.out_channels && d.kernel && d.scheme) {
      coeffs = collect_coeffs(d, d.scheme->value, d.in_channels->value, d.out_channels->value,
                              d.kernel->value.first, d.kernel->value.second);
    }
    if (d.in_channels) {
      inputs = collect_channels(d.input, d.in_channels->value, kInputFormat, d.input_bits,
                                kInputPrecision, d);
    }
    if (d.out_channels) {
      outputs = collect_channels(d.output, d.out_channels->value, kOutputFormat, d.output_bits,
                                 kOutputPrecision, d);
    }
    if (result_.errors.size() != errors_before) return;

    LayerSpec spec;
    spec.name = d.name->value;
    spec.in_channels = d.in_channels->value;
    spec.out_channels = d.out_channels->value;
    spec.kernel_h = d.kernel->value.first;
    spec.kernel_w = d.kernel->value.second;
    spec.stride = d.stride ? d.stride->value : 1;
    spec.padding = d.padding ? d.padding->value : Padding::Valid;
    spec.activation = d.activation ? d.activation->value : Activation::None;
    spec.scheme = d.scheme->value;
    spec.coeff_precision = d.coeff_bits->value;
    spec.coeff_formats = std::move(*coeffs);
    spec.input_data_precision = d.input_bits->value;
    spec.input_formats = std::move(*inputs);
    spec.accumulator_precision = d.acc_bits->value;
    spec.accumulator_format = d.acc_format->value;
    spec.output_data_precision = d.output_bits->value;
    spec.output_formats = std::move(*outputs);

    auto& layers = result_.network.layers;
    if (!layers.empty() && layers.back().out_channels != spec.in_channels) {
      error(d.header, ParseErrorKind::Syntax,
            "layer '" + spec.name + "' has " + std::to_string(spec.in_channels) +
                " input channels but layer '" + layers.back().name + "' produces " +
                std::to_string(layers.back().out_channels));
    }
    for (const Violation& v : validate(spec)) {
      error(d.header, ParseErrorKind::Syntax, v.field + ": " + v.message);
    }
    layers.push_back(std::move(spec));
  }

  std::vector<std::string_view> lines_;
  ParseResult result_;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

std::string full_range(int count) {
  return count == 1 ? "0" : "0:" + std::to_string(count - 1);
}

}  // namespace

ParseResult parse_descriptor(std::string_view text) { return Parser(text).run(); }

std::string serialize(const NetworkSpec& net) {
  require_valid(net);
  std::ostringstream os;
  bool first = true;
  for (const LayerSpec& l : net.layers) {
    if (!first) os << '\n';
    first = false;
    const std::string spatial =
        "1:" + std::to_string(l.kernel_w) + ", 1:" + std::to_string(l.kernel_h) + ", ";
    os << "layer {\n";
    os << "  name: " << quote(l.name) << '\n';
    os << "  number of input channels: " << l.in_channels << '\n';
    os << "  number of output channels: " << l.out_channels << '\n';
    os << "  kernel size: " << l.kernel_h << 'x' << l.kernel_w << '\n';
    os << "  quantization structure: " << to_string(l.scheme) << '\n';
    os << "  coeff_precision: " << l.coeff_precision << "b\n";
    switch (l.scheme) {
      case QuantScheme::TwoD:
        for (int ic = 0; ic < l.in_channels; ++ic) {
          for (int oc = 0; oc < l.out_channels; ++oc) {
            os << "  coeff_format[" << spatial << ic << ", " << oc
               << "]: " << to_string(format_for(l, ic, oc)) << '\n';
          }
        }
        break;
      case QuantScheme::ThreeD:
        for (int oc = 0; oc < l.out_channels; ++oc) {
          os << "  coeff_format[" << spatial << full_range(l.in_channels) << ", " << oc
             << "]: " << to_string(format_for(l, 0, oc)) << '\n';
        }
        break;
      case QuantScheme::FourD:
        os << "  coeff_format[" << spatial << full_range(l.in_channels) << ", "
           << full_range(l.out_channels) << "]: " << to_string(format_for(l, 0, 0)) << '\n';
        break;
    }
    os << "  input_data_precision: " << l.input_data_precision << "b\n";
    for (std::size_t c = 0; c < l.input_formats.size(); ++c) {
      os << "  input_data_format[" << c << "]: " << to_string(l.input_formats[c]) << '\n';
    }
    os << "  accumulator_precision: " << l.accumulator_precision << "b\n";
    os << "  accumulator_format: " << to_string(l.accumulator_format) << '\n';
    os << "  output_data_precision: " << l.output_data_precision << "b\n";
    for (std::size_t c = 0; c < l.output_formats.size(); ++c) {
      os << "  output_data_format[" << c << "]: " << to_string(l.output_formats[c]) << '\n';
    }
    os << "  stride: " << l.stride << '\n';
    os << "  padding: " << to_string(l.padding) << '\n';
    os << "  activation: " << to_string(l.activation) << '\n';
    os << "}\n";
  }
  return os.str();
}

}  // namespace hpq
