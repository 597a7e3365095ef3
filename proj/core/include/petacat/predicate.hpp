#pragma once

#include <string>
#include <vector>

#include "petacat/record.hpp"

namespace petacat {

/// Conjunction of numeric comparisons over detection fields, e.g.
/// `flux>10 and pass_id<=25`. `true` and `false` are accepted on their own.
/// Operators: < <= > >= == !=. Conjunctions use `and` or `&&`.
class Predicate {
public:
  enum class Op { kLt, kLe, kGt, kGe, kEq, kNe };

  struct Comparison {
    Field field;
    Op op;
    double value;
  };

  /// Throws ValidationError on syntax errors or unknown field names.
  static Predicate parse(const std::string& text);
  static Predicate always() { return Predicate{}; }
  static Predicate never() {
    Predicate p;
    p.never_ = true;
    return p;
  }

  bool operator()(const Detection& d) const {
    if (never_) return false;
    for (const auto& c : terms_) {
      const double v = field_value(d, c.field);
      bool ok = false;
      switch (c.op) {
        case Op::kLt: ok = v < c.value; break;
        case Op::kLe: ok = v <= c.value; break;
        case Op::kGt: ok = v > c.value; break;
        case Op::kGe: ok = v >= c.value; break;
        case Op::kEq: ok = v == c.value; break;
        case Op::kNe: ok = v != c.value; break;
      }
      if (!ok) return false;
    }
    return true;
  }

  const std::vector<Comparison>& terms() const { return terms_; }
  bool is_never() const { return never_; }

private:
  std::vector<Comparison> terms_;
  bool never_ = false;
};

}  // namespace petacat
