#include <cctype>
#include <string>

#include "deltasym/expr.hpp"

namespace deltasym {

namespace {

// Recursive-descent parser for the expression grammar:
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := ('+'|'-') unary | power
//   power := base ('^' unary)?
//   base  := number | ident | ident '[' int ']' | func '(' expr ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr parse_expr() {
    std::vector<Expr> terms{parse_term()};
    for (;;) {
      if (accept('+')) {
        terms.push_back(parse_term());
      } else if (accept('-')) {
        terms.push_back(-parse_term());
      } else {
        break;
      }
    }
    return Expr::add(std::move(terms));
  }

  Expr parse_term() {
    Expr acc = parse_unary();
    for (;;) {
      if (accept('*')) {
        acc = acc * parse_unary();
      } else if (accept('/')) {
        acc = acc / parse_unary();
      } else {
        break;
      }
    }
    return acc;
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_base();
    if (accept('^')) return pow(base, parse_unary());
    return base;
  }

  Expr parse_number() {
    std::size_t start = pos_;
    std::string digits;
    long scale = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      digits += text_[pos_++];
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        digits += text_[pos_++];
        ++scale;
      }
    }
    if (digits.empty()) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      int sign = 1;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        sign = text_[pos_++] == '-' ? -1 : 1;
      }
      std::string exp_digits;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        exp_digits += text_[pos_++];
      }
      if (exp_digits.empty() || exp_digits.size() > 4) {
        pos_ = save;
        fail("malformed exponent");
      }
      scale -= sign * std::stol(exp_digits);
    }
    mpz_class num(digits);
    mpz_class ten = 10;
    mpz_class p;
    mpz_pow_ui(p.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(scale < 0 ? -scale : scale));
    Rational q = scale >= 0 ? Rational(num, p) : Rational(num * p);
    q.canonicalize();
    return Expr(q);
  }

  Expr parse_base() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  Expr parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    std::string name(text_.substr(start, pos_ - start));
    skip_space();
    bool call = pos_ < text_.size() && text_[pos_] == '(';
    bool index = pos_ < text_.size() && text_[pos_] == '[';
    if (call) {
      auto f = func_from_name(name);
      if (!f) {
        pos_ = start;
        fail("unknown function '" + name + "'");
      }
      ++pos_;
      Expr arg = parse_expr();
      expect(')');
      return Expr::fn(*f, arg);
    }
    if (func_from_name(name)) {
      pos_ = start;
      fail("function '" + name + "' used without argument");
    }
    if (index) {
      if (name != "x" && name != "u") {
        pos_ = start;
        fail("only x and u take a shift index, got '" + name + "'");
      }
      ++pos_;
      int k = parse_shift();
      expect(']');
      return name == "x" ? Expr(Symbol::x(k)) : Expr(Symbol::u(k));
    }
    if (name == "x") return Expr(Symbol::x(0));
    if (name == "u") return Expr(Symbol::u(0));
    if (name == "t") return Expr(Symbol::t());
    if (name == "ut") return Expr(Symbol::ut());
    if (name == "utt") return Expr(Symbol::utt());
    if (name == "ux") return Expr(Symbol::ux());
    if (name == "uxt") return Expr(Symbol::uxt());
    return Expr(Symbol::param(name));
  }

  int parse_shift() {
    skip_space();
    std::size_t start = pos_;
    int sign = 1;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      sign = text_[pos_++] == '-' ? -1 : 1;
    }
    std::string digits;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      digits += text_[pos_++];
    }
    skip_space();
    if (digits.empty() || digits.size() > 6 || (pos_ < text_.size() && text_[pos_] != ']')) {
      pos_ = start;
      fail("shift index must be an integer");
    }
    return sign * std::stoi(digits);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

}  // namespace deltasym
