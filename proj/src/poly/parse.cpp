#include "momentctl/poly/parse.hpp"

#include <cctype>
#include <charconv>
#include <string>

#include "momentctl/errors.hpp"

namespace momentctl::poly {

namespace {

class Parser {
 public:
  Parser(std::string_view text, int n, int m) : text_(text), n_(n), m_(m) {}

  Polynomial parse() {
    Polynomial p = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return p;
  }

 private:
  int num_vars() const { return n_ + m_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("polynomial \"" + std::string(text_) + "\" at column " +
                     std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Polynomial expression() {
    Polynomial acc = term();
    for (char c = peek(); c == '+' || c == '-'; c = peek()) {
      ++pos_;
      Polynomial t = term();
      acc = c == '+' ? acc + t : acc - t;
    }
    return acc;
  }

  bool starts_factor(char c) const {
    return c == '(' || c == '.' || std::isdigit(static_cast<unsigned char>(c)) ||
           std::isalpha(static_cast<unsigned char>(c));
  }

  Polynomial term() {
    Polynomial acc = unary();
    while (true) {
      char c = peek();
      if (c == '*') {
        ++pos_;
        acc = acc * unary();
      } else if (starts_factor(c)) {
        acc = acc * unary();
      } else {
        return acc;
      }
    }
  }

  Polynomial unary() {
    char c = peek();
    if (c == '-') {
      ++pos_;
      return -unary();
    }
    if (c == '+') {
      ++pos_;
      return unary();
    }
    return power();
  }

  Polynomial power() {
    Polynomial base = primary();
    if (peek() != '^') return base;
    ++pos_;
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a nonnegative integer exponent");
    int e = 0;
    std::from_chars(text_.data() + start, text_.data() + pos_, e);
    Polynomial r = Polynomial::constant(num_vars(), 1.0);
    for (int k = 0; k < e; ++k) r = r * base;
    return r;
  }

  Polynomial primary() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      Polynomial p = expression();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return variable();
    if (c == '\0') fail("unexpected end of input");
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Polynomial number() {
    std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      std::size_t exp_start = pos_;
      digits();
      if (exp_start == pos_) pos_ = save;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) fail("malformed number");
    return Polynomial::constant(num_vars(), v);
  }

  Polynomial variable() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    char kind = name[0];
    if ((kind != 'x' && kind != 'u') || name.size() == 1) {
      if (name == "x" && n_ == 1) return Polynomial::variable(num_vars(), 0);
      if (name == "u" && m_ == 1) return Polynomial::variable(num_vars(), n_);
      if (name != "x" && name != "u") fail("unknown variable '" + name + "'");
      fail("ambiguous variable '" + name + "'; use an indexed name");
    }
    int idx = 0;
    auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
    if (ec != std::errc() || ptr != name.data() + name.size()) fail("unknown variable '" + name + "'");
    const int limit = kind == 'x' ? n_ : m_;
    if (idx < 1 || idx > limit) fail("variable '" + name + "' out of range");
    return Polynomial::variable(num_vars(), kind == 'x' ? idx - 1 : n_ + idx - 1);
  }

  std::string_view text_;
  int n_, m_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(std::string_view text, int n, int m) {
  if (n < 1 || m < 0) throw InputError("parse_polynomial: need n >= 1 and m >= 0");
  return Parser(text, n, m).parse();
}

}  // namespace momentctl::poly
