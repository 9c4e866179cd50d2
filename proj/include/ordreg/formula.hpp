#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ordreg {

/// Parsed `response ~ 1 + term + ... (+ (1|group))`.
struct FormulaSpec {
  std::string response;
  std::vector<std::string> location;
  std::optional<std::string> random_group;

  /// Canonical text, e.g. "score ~ 1 + condition + (1 | participant_id)".
  std::string to_string() const;
};

/// Throws ParseError (with a character offset) on malformed input.
FormulaSpec parse_formula(std::string_view text);

/// Parses `term (+ term)*` as used by the --scale and --nominal flags.
/// Empty or whitespace-only text yields an empty list.
std::vector<std::string> parse_term_list(std::string_view text);

}  // namespace ordreg
