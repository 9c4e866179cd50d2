#include "ordreg/formula.hpp"

#include <algorithm>
#include <cctype>

#include "ordreg/errors.hpp"

namespace ordreg {
namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
bool ident_char(char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c, const char* what) {
    if (!accept(c)) throw ParseError(std::string("expected ") + what, pos_);
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  std::string identifier(const char* what) {
    skip_ws();
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) {
      throw ParseError(std::string("expected ") + what, pos_);
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }
  std::size_t position() const { return pos_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string FormulaSpec::to_string() const {
  std::string out = response + " ~ 1";
  for (const auto& t : location) out += " + " + t;
  if (random_group) out += " + (1 | " + *random_group + ")";
  return out;
}

FormulaSpec parse_formula(std::string_view text) {
  Lexer lex(text);
  FormulaSpec spec;
  spec.response = lex.identifier("response name before '~'");
  if (!lex.accept('~')) throw ParseError("missing '~' after the response", lex.position());

  bool intercept = false;
  std::size_t intercept_pos = lex.position();
  std::vector<std::pair<std::string, std::size_t>> randoms;
  bool first = true;
  do {
    lex.skip_ws();
    const std::size_t term_pos = lex.position();
    if (lex.accept('(')) {
      lex.expect('1', "'1' in random intercept term");
      lex.expect('|', "'|' in random intercept term");
      randoms.emplace_back(lex.identifier("grouping factor name"), term_pos);
      lex.expect(')', "')' closing the random term");
    } else if (lex.accept('1')) {
      if (intercept) throw ParseError("intercept '1' given twice", term_pos);
      if (!first) throw ParseError("the intercept '1' must be the first term", term_pos);
      intercept = true;
    } else {
      std::string term = lex.identifier("a term");
      if (std::find(spec.location.begin(), spec.location.end(), term) != spec.location.end()) {
        throw ParseError("term '" + term + "' appears twice", term_pos);
      }
      if (term == spec.response) {
        throw ParseError("response '" + term + "' reused as a predictor", term_pos);
      }
      spec.location.push_back(std::move(term));
    }
    first = false;
  } while (lex.accept('+'));
  if (!lex.at_end()) throw ParseError("unexpected text after the formula", lex.position());

  if (randoms.size() > 1) {
    throw ParseError("only one random term (1|group) is allowed", randoms[1].second);
  }
  if (!intercept) {
    throw ParseError("the formula must start with the intercept '1' (e.g. y ~ 1 + x)",
                     intercept_pos);
  }
  if (!randoms.empty()) {
    const auto& [group, pos] = randoms.front();
    if (group == spec.response) throw ParseError("response reused as grouping factor", pos);
    if (std::find(spec.location.begin(), spec.location.end(), group) != spec.location.end()) {
      throw ParseError("grouping factor '" + group + "' also used as a fixed term", pos);
    }
    spec.random_group = group;
  }
  return spec;
}

std::vector<std::string> parse_term_list(std::string_view text) {
  Lexer lex(text);
  std::vector<std::string> terms;
  if (lex.at_end()) return terms;
  do {
    lex.skip_ws();
    const std::size_t pos = lex.position();
    std::string term = lex.identifier("a term");
    if (std::find(terms.begin(), terms.end(), term) != terms.end()) {
      throw ParseError("term '" + term + "' appears twice", pos);
    }
    terms.push_back(std::move(term));
  } while (lex.accept('+'));
  if (!lex.at_end()) throw ParseError("unexpected text in term list", lex.position());
  return terms;
}

}  // namespace ordreg
