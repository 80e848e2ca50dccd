#pragma once

// Tokenizer and expression/predicate parsing shared by the program, invariant,
// certificate and derivation readers.

#include <string>
#include <string_view>
#include <vector>

#include "dsmv/errors.hpp"
#include "dsmv/linear_expr.hpp"
#include "dsmv/polyhedron.hpp"

namespace dsmv::detail {

enum class Tok {
  Ident,
  Number,
  Assign,     // :=
  Semi,       // ;
  Colon,      // :
  Comma,      // ,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Plus,
  Minus,
  Star,       // * or x-sign or star
  Slash,
  Le,
  Lt,
  Ge,
  Gt,
  Eq,         // = or ==
  Bar,        // |
  Amp,        // &
  Bang,       // !
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

std::vector<Token> tokenize(std::string_view text);

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const;
  const Token& next();
  bool at(Tok kind) const { return peek().kind == kind; }
  bool at_keyword(std::string_view word) const;
  bool accept(Tok kind);
  bool accept_keyword(std::string_view word);
  const Token& expect(Tok kind, std::string_view what);
  void expect_keyword(std::string_view word);
  [[noreturn]] void fail(const std::string& message) const;
  [[noreturn]] void fail_at(const Token& token, const std::string& message) const;

  std::size_t position() const { return pos_; }
  void reset(std::size_t pos) { pos_ = pos; }

  /// Affine arithmetic: + - * / with constants, parentheses, unary minus.
  LinearExpr parse_expr();
  /// Signed number literal, including "6/13" and decimals.
  Rational parse_number();
  /// Boolean combination of comparison atoms with and/or/not (also & | !).
  BoolExprPtr parse_bexpr();

 private:
  LinearExpr parse_term();
  LinearExpr parse_factor();
  BoolExprPtr parse_or();
  BoolExprPtr parse_and();
  BoolExprPtr parse_unary();
  BoolExprPtr parse_comparison();

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

bool is_keyword(std::string_view word);

}  // namespace dsmv::detail
