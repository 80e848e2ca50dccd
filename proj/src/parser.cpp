#include "parser.hpp"

#include <array>
#include <cctype>

namespace dsmv::detail {

namespace {

struct Symbol {
  std::string_view text;
  Tok kind;
};

// Longest match first.
constexpr std::array<Symbol, 30> kSymbols{{
    {"\xE2\x89\xA5", Tok::Ge},   // >= sign
    {"\xE2\x89\xA4", Tok::Le},   // <= sign
    {"\xC3\x97", Tok::Star},     // multiplication sign
    {"\xC2\xB7", Tok::Star},     // middle dot
    {"\xE2\x8B\x86", Tok::Star}, // star operator
    {"\xE2\x88\xA7", Tok::Amp},  // logical and
    {"\xE2\x88\xA8", Tok::Bar},  // logical or
    {"\xC2\xAC", Tok::Bang},     // logical not
    {":=", Tok::Assign},
    {"<=", Tok::Le},
    {">=", Tok::Ge},
    {"==", Tok::Eq},
    {"&&", Tok::Amp},
    {"||", Tok::Bar},
    {"<", Tok::Lt},
    {">", Tok::Gt},
    {"=", Tok::Eq},
    {";", Tok::Semi},
    {":", Tok::Colon},
    {",", Tok::Comma},
    {"(", Tok::LParen},
    {")", Tok::RParen},
    {"{", Tok::LBrace},
    {"}", Tok::RBrace},
    {"[", Tok::LBracket},
    {"]", Tok::RBracket},
    {"+", Tok::Plus},
    {"-", Tok::Minus},
    {"*", Tok::Star},
    {"/", Tok::Slash},
}};

constexpr std::array<std::string_view, 17> kKeywords{
    "skip", "if", "then", "else", "fi", "while", "do", "od", "prob",
    "and", "or", "not", "true", "false", "dist", "star", "tm"};

}  // namespace

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords) {
    if (k == word) return true;
  }
  return false;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  int line = 1;
  int column = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
        ++column;
      }
      ++i;
    }
  };
  while (i < text.size()) {
    char ch = text[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      advance(1);
      continue;
    }
    if (ch == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    int tok_line = line;
    int tok_col = column;
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(text.substr(i, j - i)), tok_line, tok_col});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j + 1 < text.size() && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      out.push_back({Tok::Number, std::string(text.substr(i, j - i)), tok_line, tok_col});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const auto& sym : kSymbols) {
      if (text.substr(i, sym.text.size()) == sym.text) {
        out.push_back({sym.kind, std::string(sym.text), tok_line, tok_col});
        advance(sym.text.size());
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw SyntaxError("unexpected character '" + std::string(1, ch) + "'", tok_line, tok_col);
    }
  }
  out.push_back({Tok::End, "", line, column});
  return out;
}

const Token& TokenStream::peek(std::size_t ahead) const {
  std::size_t idx = std::min(pos_ + ahead, tokens_.size() - 1);
  return tokens_[idx];
}

const Token& TokenStream::next() {
  const Token& t = tokens_[pos_];
  if (pos_ + 1 < tokens_.size()) ++pos_;
  return t;
}

bool TokenStream::at_keyword(std::string_view word) const {
  return peek().kind == Tok::Ident && peek().text == word;
}

bool TokenStream::accept(Tok kind) {
  if (!at(kind)) return false;
  next();
  return true;
}

bool TokenStream::accept_keyword(std::string_view word) {
  if (!at_keyword(word)) return false;
  next();
  return true;
}

const Token& TokenStream::expect(Tok kind, std::string_view what) {
  if (!at(kind)) fail("expected " + std::string(what));
  return next();
}

void TokenStream::expect_keyword(std::string_view word) {
  if (!at_keyword(word)) fail("expected '" + std::string(word) + "'");
  next();
}

void TokenStream::fail(const std::string& message) const { fail_at(peek(), message); }

void TokenStream::fail_at(const Token& token, const std::string& message) const {
  std::string found = token.kind == Tok::End ? "end of input" : "'" + token.text + "'";
  throw SyntaxError(message + ", found " + found, token.line, token.column);
}

Rational TokenStream::parse_number() {
  bool negative = accept(Tok::Minus);
  if (!negative) accept(Tok::Plus);
  const Token& num = expect(Tok::Number, "number");
  Rational value = parse_rational(num.text);
  if (accept(Tok::Slash)) {
    const Token& den = expect(Tok::Number, "denominator");
    Rational d = parse_rational(den.text);
    if (d == 0) fail_at(den, "division by zero");
    value /= d;
  }
  return negative ? Rational(-value) : value;
}

LinearExpr TokenStream::parse_expr() {
  LinearExpr acc = parse_term();
  while (true) {
    if (accept(Tok::Plus)) {
      acc += parse_term();
    } else if (accept(Tok::Minus)) {
      acc -= parse_term();
    } else {
      return acc;
    }
  }
}

LinearExpr TokenStream::parse_term() {
  LinearExpr acc = parse_factor();
  while (true) {
    if (at(Tok::Star)) {
      const Token& op = next();
      LinearExpr rhs = parse_factor();
      if (acc.is_constant()) {
        acc = rhs * acc.constant();
      } else if (rhs.is_constant()) {
        acc *= rhs.constant();
      } else {
        throw NonlinearError(std::to_string(op.line) + ":" + std::to_string(op.column) +
                             ": product of non-constant expressions is not affine");
      }
    } else if (at(Tok::Slash)) {
      const Token& op = next();
      LinearExpr rhs = parse_factor();
      if (!rhs.is_constant()) {
        throw NonlinearError(std::to_string(op.line) + ":" + std::to_string(op.column) +
                             ": division by a non-constant expression is not affine");
      }
      if (rhs.constant() == 0) fail_at(op, "division by zero");
      acc *= Rational(1) / rhs.constant();
    } else {
      return acc;
    }
  }
}

LinearExpr TokenStream::parse_factor() {
  if (accept(Tok::Minus)) return -parse_factor();
  if (accept(Tok::Plus)) return parse_factor();
  if (at(Tok::Number)) return LinearExpr(parse_rational(next().text));
  if (at(Tok::Ident) && !is_keyword(peek().text)) return LinearExpr::variable(next().text);
  if (accept(Tok::LParen)) {
    LinearExpr inner = parse_expr();
    expect(Tok::RParen, "')'");
    return inner;
  }
  fail("expected arithmetic expression");
}

BoolExprPtr TokenStream::parse_bexpr() { return parse_or(); }

BoolExprPtr TokenStream::parse_or() {
  std::vector<BoolExprPtr> parts{parse_and()};
  while (accept_keyword("or") || accept(Tok::Bar)) parts.push_back(parse_and());
  return make_or(std::move(parts));
}

BoolExprPtr TokenStream::parse_and() {
  std::vector<BoolExprPtr> parts{parse_unary()};
  while (accept_keyword("and") || accept(Tok::Amp)) parts.push_back(parse_unary());
  return make_and(std::move(parts));
}

BoolExprPtr TokenStream::parse_unary() {
  if (accept_keyword("not") || accept(Tok::Bang)) return make_not(parse_unary());
  if (accept_keyword("true")) return make_bool(true);
  if (accept_keyword("false")) return make_bool(false);
  if (at(Tok::LParen)) {
    std::size_t saved = position();
    try {
      return parse_comparison();
    } catch (const SyntaxError&) {
      reset(saved);
    }
    expect(Tok::LParen, "'('");
    BoolExprPtr inner = parse_bexpr();
    expect(Tok::RParen, "')'");
    return inner;
  }
  return parse_comparison();
}

BoolExprPtr TokenStream::parse_comparison() {
  auto read_op = [this](CmpOp& op) {
    switch (peek().kind) {
      case Tok::Le: op = CmpOp::Le; break;
      case Tok::Lt: op = CmpOp::Lt; break;
      case Tok::Ge: op = CmpOp::Ge; break;
      case Tok::Gt: op = CmpOp::Gt; break;
      case Tok::Eq: op = CmpOp::Eq; break;
      default: return false;
    }
    next();
    return true;
  };
  LinearExpr lhs = parse_expr();
  CmpOp op;
  if (!read_op(op)) fail("expected comparison operator");
  LinearExpr rhs = parse_expr();
  std::vector<BoolExprPtr> atoms{make_atom(lhs, op, rhs)};
  // Chains such as 1 <= y <= 9.
  while (read_op(op)) {
    LinearExpr third = parse_expr();
    atoms.push_back(make_atom(rhs, op, third));
    rhs = std::move(third);
  }
  return make_and(std::move(atoms));
}

}  // namespace dsmv::detail
