#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

#include "kc/risk_eval.hpp"

namespace kc {
namespace {

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool done() {
    skip_space();
    return pos_ >= text_.size();
  }
  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool peek_number() {
    skip_space();
    return pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.');
  }
  double number() {
    skip_space();
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return value;
  }
  std::string word() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected x<i>, norm1, norm2, norminf or sqnorm");
    return text_.substr(start, pos_ - start);
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ConfigParse, "cost expression '" + text_ + "' at column " + std::to_string(pos_) + ": " + what);
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

CostExpression CostExpression::parse(const std::string& text) {
  CostExpression expr;
  expr.text_ = text;
  Lexer lex(expr.text_);
  if (lex.done()) lex.fail("empty expression");
  bool first = true;
  while (!lex.done()) {
    double sign = 1.0;
    if (lex.accept('+')) {
    } else if (lex.accept('-')) {
      sign = -1.0;
    } else if (!first) {
      lex.fail("expected '+' or '-'");
    }
    first = false;

    double coefficient = 1.0;
    if (lex.peek_number()) {
      coefficient = lex.number();
      if (!lex.accept('*')) {
        expr.terms_.push_back({sign * coefficient, Atom::Constant, 0});
        continue;
      }
    }
    const std::string name = lex.word();
    Term term{sign * coefficient, Atom::Constant, 0};
    if (name == "norm1") {
      term.atom = Atom::Norm1;
    } else if (name == "norm2") {
      term.atom = Atom::Norm2;
    } else if (name == "norminf") {
      term.atom = Atom::NormInf;
    } else if (name == "sqnorm") {
      term.atom = Atom::SquaredNorm;
    } else if (name.size() > 1 && name[0] == 'x' &&
               name.find_first_not_of("0123456789", 1) == std::string::npos) {
      term.atom = Atom::Coordinate;
      term.index = std::stoul(name.substr(1));
    } else {
      lex.fail("unknown atom '" + name + "'");
    }
    expr.terms_.push_back(term);
  }
  return expr;
}

double CostExpression::operator()(const Point& x) const {
  double total = 0.0;
  for (const auto& term : terms_) {
    double value = 1.0;
    switch (term.atom) {
      case Atom::Constant:
        value = 1.0;
        break;
      case Atom::Coordinate:
        if (term.index >= x.dim()) {
          throw Error(ErrorCode::DimensionMismatch, "cost term x" + std::to_string(term.index) + " on a point of dimension " +
                                                        std::to_string(x.dim()));
        }
        value = x[term.index];
        break;
      case Atom::Norm1:
        value = 0.0;
        for (double c : x.coords()) value += std::abs(c);
        break;
      case Atom::Norm2:
      case Atom::SquaredNorm:
        value = 0.0;
        for (double c : x.coords()) value += c * c;
        if (term.atom == Atom::Norm2) value = std::sqrt(value);
        break;
      case Atom::NormInf:
        value = 0.0;
        for (double c : x.coords()) value = std::max(value, std::abs(c));
        break;
    }
    total += term.coefficient * value;
  }
  return total;
}

}  // namespace kc
