#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hpq/model.hpp"

namespace hpq {

/// 1-based position in descriptor text. Columns count bytes.
struct SourceSpan {
  int line = 1;
  int column = 1;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class ParseErrorKind {
  Syntax,
  UnknownField,
  DuplicateAssignment,
  IncompleteCoverage,
  PrecisionMismatch,
  BadIndexRange,
};

std::string_view to_string(ParseErrorKind kind) noexcept;

struct ParseError {
  SourceSpan span;
  ParseErrorKind kind = ParseErrorKind::Syntax;
  std::string message;
};

struct ParseResult {
  NetworkSpec network;
  std::vector<ParseError> errors;  // sorted by position

  bool ok() const noexcept { return errors.empty(); }
};

/// Parses `.hpq` descriptor text: a sequence of `layer { key[indices]: value }` blocks.
/// Collects as many errors as recovery allows; `network` is meaningful only when ok().
ParseResult parse_descriptor(std::string_view text);

/// Canonical text: fields in fixed order, one assignment per line, LF endings, no comments.
/// Throws UsageError if the network does not validate.
std::string serialize(const NetworkSpec& net);

/// "file:line:col: kind: message"
std::string render(const ParseError& e, std::string_view filename);

}  // namespace hpq
