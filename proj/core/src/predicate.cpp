#include "petacat/predicate.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "petacat/errors.hpp"

namespace petacat {

namespace {

class Lexer {
public:
  explicit Lexer(const std::string& s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() {
    skip_ws();
    return pos_ >= s_.size();
  }
  std::string word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    return s_.substr(start, pos_ - start);
  }
  bool accept(std::string_view tok) {
    skip_ws();
    if (s_.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  double number() {
    skip_ws();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc() || !std::isfinite(v)) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("predicate '" + s_ + "' at column " + std::to_string(pos_ + 1) + ": " + what);
  }

private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Predicate Predicate::parse(const std::string& text) {
  Lexer lx(text);
  Predicate pred;
  if (lx.done()) return pred;
  bool first = true;
  while (true) {
    if (!first) {
      if (lx.done()) break;
      if (!lx.accept("&&")) {
        const std::string conj = lx.word();
        if (conj != "and" && conj != "AND") lx.fail("expected 'and'");
      }
    }
    first = false;
    const std::string name = lx.word();
    if (name.empty()) lx.fail("expected a field name");
    if (name == "true") continue;
    if (name == "false") {
      pred.never_ = true;
      continue;
    }
    Comparison c{};
    try {
      c.field = field_from_name(name);
    } catch (const ValidationError&) {
      lx.fail("unknown field '" + name + "'");
    }
    if (lx.accept("<=")) c.op = Op::kLe;
    else if (lx.accept(">=")) c.op = Op::kGe;
    else if (lx.accept("==")) c.op = Op::kEq;
    else if (lx.accept("!=")) c.op = Op::kNe;
    else if (lx.accept("<")) c.op = Op::kLt;
    else if (lx.accept(">")) c.op = Op::kGt;
    else if (lx.accept("=")) c.op = Op::kEq;
    else lx.fail("expected a comparison operator");
    c.value = lx.number();
    pred.terms_.push_back(c);
  }
  return pred;
}

}  // namespace petacat
