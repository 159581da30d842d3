#pragma once

#include <cctype>
#include <cstdint>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "regula/ast.hpp"

namespace regula {

// Raised on malformed rule source. Carries the 1-based position and the
// token set the parser would have accepted there.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, int line, int column, std::vector<std::string> expected)
      : std::runtime_error(std::move(message)),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  int line_;
  int column_;
  std::vector<std::string> expected_;
};

namespace detail {

enum class TokenKind {
  Identifier,
  Keyword,
  Integer,
  CodeLiteral,
  DateLiteral,
  Symbol,
  EndOfInput,
};

struct Token {
  TokenKind kind = TokenKind::EndOfInput;
  std::string text;        // identifier / keyword / symbol spelling / code body
  std::int64_t number = 0;
  Date date;
  int line = 1;
  int column = 1;
};

inline bool is_keyword(std::string_view s) {
  static const char* kw[] = {"rule",  "agg",   "when",       "check",    "severity", "error",
                             "warning", "implies", "and",    "or",       "in",       "notIn",
                             "startswith", "endswith", "substring", "else", "dubious", "null"};
  for (const char* k : kw)
    if (s == k) return true;
  return false;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t = next_token();
      bool end = t.kind == TokenKind::EndOfInput;
      out.push_back(std::move(t));
      if (end) break;
    }
    return out;
  }

 private:
  void fail(const std::string& msg) { throw ParseError(msg, line_, column_, {}); }

  char peek(size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space_and_comments() {
    for (;;) {
      char c = peek();
      if (c == '#') {
        while (peek() != '\n' && peek() != '\0') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        return;
      }
    }
  }

  Token next_token() {
    Token t;
    t.line = line_;
    t.column = column_;
    char c = peek();
    if (c == '\0') {
      t.kind = TokenKind::EndOfInput;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')
        word.push_back(advance());
      t.kind = is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier;
      t.text = std::move(word);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      std::string digits;
      if (c == '-') digits.push_back(advance());
      while (std::isdigit(static_cast<unsigned char>(peek()))) digits.push_back(advance());
      t.kind = TokenKind::Integer;
      t.number = std::stoll(digits);
      t.text = std::move(digits);
      return t;
    }
    if (c == '\'') {
      advance();
      std::string body;
      while (peek() != '\'' ) {
        if (peek() == '\0' || peek() == '\n') fail("unterminated code literal");
        body.push_back(advance());
      }
      advance();
      t.kind = TokenKind::CodeLiteral;
      t.text = std::move(body);
      return t;
    }
    if (c == '@') {
      advance();
      std::string body;
      while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '-')
        body.push_back(advance());
      auto d = parse_date(body);
      if (!d) fail("invalid date literal '@" + body + "' (expected calendar-valid YYYY-MM-DD)");
      t.kind = TokenKind::DateLiteral;
      t.date = *d;
      t.text = std::move(body);
      return t;
    }
    // multi-char symbols first
    auto sym2 = [&](const char* s) {
      return peek() == s[0] && peek(1) == s[1];
    };
    if (sym2("=>") || sym2("->") || sym2("!=") || sym2("<=") || sym2(">=")) {
      std::string s;
      s.push_back(advance());
      s.push_back(advance());
      t.kind = TokenKind::Symbol;
      t.text = std::move(s);
      return t;
    }
    if (std::string_view("=<>:;,()[]").find(c) != std::string_view::npos) {
      t.kind = TokenKind::Symbol;
      t.text = std::string(1, advance());
      return t;
    }
    fail(std::string("unexpected character '") + c + "'");
    return t;  // unreachable
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(Lexer(src).run()) {}

  // Parses declarations until end of input.
  std::vector<Rule> parse_all() {
    std::vector<Rule> rules;
    while (!at_end()) rules.push_back(parse_declaration());
    return rules;
  }

  Rule parse_declaration() {
    if (match_keyword("rule")) return parse_validation();
    if (match_keyword("agg")) return parse_aggregation();
    fail({"rule", "agg"});
  }

  bool at_end() const { return tokens_[pos_].kind == TokenKind::EndOfInput; }

  void expect_end() {
    if (!at_end()) fail({"end of input"});
  }

 private:
  ValidationRule parse_validation() {
    ValidationRule r;
    r.id = expect_identifier("rule id");
    expect_symbol(":");
    if (match_keyword("when")) r.applicability = parse_expr();
    expect_keyword("check");
    r.check = parse_expr();
    expect_keyword("severity");
    if (match_keyword("error"))
      r.severity = Severity::Error;
    else if (match_keyword("warning"))
      r.severity = Severity::Warning;
    else
      fail({"error", "warning"});
    return r;
  }

  AggregationRule parse_aggregation() {
    AggregationRule r;
    r.id = expect_identifier("rule id");
    expect_symbol("->");
    r.output_variable = expect_identifier("output variable");
    expect_symbol(":");
    for (;;) {
      if (match_keyword("else")) {
        AggBranch fb;
        expect_symbol("=>");
        fb.output = parse_output_literal();
        fb.flag = match_keyword("dubious") ? BranchFlag::Dubious : BranchFlag::Ok;
        r.fallback = std::move(fb);
        break;
      }
      AggBranch b;
      b.guard = parse_expr();
      expect_symbol("=>");
      b.output = parse_output_literal();
      b.flag = match_keyword("dubious") ? BranchFlag::Dubious : BranchFlag::Ok;
      r.branches.push_back(std::move(b));
      if (!match_symbol(";")) break;
    }
    if (r.branches.empty()) fail({"guard expression"});
    return r;
  }

  std::optional<Literal> parse_output_literal() {
    if (match_keyword("null")) return std::nullopt;
    return parse_literal();
  }

  // implication is right-associative and binds loosest; then or, then and.
  ExprPtr parse_expr() { return parse_implication(); }

  ExprPtr parse_implication() {
    ExprPtr lhs = parse_or();
    if (match_keyword("implies")) {
      ExprPtr rhs = parse_implication();
      return make_expr<Implication>(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (match_keyword("or")) {
      ExprPtr rhs = parse_and();
      lhs = make_expr<Connective>(ConnectiveOp::Or, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_atom();
    while (match_keyword("and")) {
      ExprPtr rhs = parse_atom();
      lhs = make_expr<Connective>(ConnectiveOp::And, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_atom() {
    if (match_symbol("(")) {
      ExprPtr inner = parse_expr();
      expect_symbol(")");
      return inner;
    }
    if (match_keyword("startswith")) return parse_string_fn(StringFnKind::StartsWith);
    if (match_keyword("endswith")) return parse_string_fn(StringFnKind::EndsWith);

    ExprPtr subject = parse_operand();
    const Token& t = tokens_[pos_];
    if (t.kind == TokenKind::Symbol) {
      CompareOp op = CompareOp::Eq;
      bool is_cmp = true;
      if (t.text == "=")
        op = CompareOp::Eq;
      else if (t.text == "!=")
        op = CompareOp::Ne;
      else if (t.text == "<")
        op = CompareOp::Lt;
      else if (t.text == "<=")
        op = CompareOp::Le;
      else if (t.text == ">")
        op = CompareOp::Gt;
      else if (t.text == ">=")
        op = CompareOp::Ge;
      else
        is_cmp = false;
      if (is_cmp) {
        ++pos_;
        ExprPtr rhs = parse_operand();
        return make_expr<Comparison>(op, std::move(subject), std::move(rhs));
      }
    }
    if (match_keyword("in")) return parse_membership(MemberOp::In, std::move(subject));
    if (match_keyword("notIn")) return parse_membership(MemberOp::NotIn, std::move(subject));
    fail({"=", "!=", "<", "<=", ">", ">=", "in", "notIn"});
  }

  ExprPtr parse_string_fn(StringFnKind fn) {
    expect_symbol("(");
    std::string var = expect_identifier("variable");
    expect_symbol(",");
    const Token& t = tokens_[pos_];
    if (t.kind != TokenKind::CodeLiteral) fail({"code literal"});
    Literal needle = Literal::make_code(t.text);
    ++pos_;
    expect_symbol(")");
    return make_expr<StringFn>(fn, std::move(var), std::move(needle));
  }

  ExprPtr parse_membership(MemberOp op, ExprPtr subject) {
    expect_symbol("[");
    std::vector<Literal> values;
    values.push_back(parse_literal());
    while (match_symbol(",")) values.push_back(parse_literal());
    expect_symbol("]");
    return make_expr<Membership>(op, std::move(subject), std::move(values));
  }

  ExprPtr parse_operand() {
    const Token& t = tokens_[pos_];
    if (t.kind == TokenKind::Identifier) {
      ++pos_;
      return make_expr<VarRef>(t.text);
    }
    if (match_keyword("substring")) {
      expect_symbol("(");
      std::string var = expect_identifier("variable");
      expect_symbol(",");
      std::int64_t from = expect_index();
      expect_symbol(",");
      std::int64_t to = expect_index();
      expect_symbol(")");
      return make_expr<SubstringExpr>(std::move(var), from, to);
    }
    if (t.kind == TokenKind::Integer || t.kind == TokenKind::CodeLiteral ||
        t.kind == TokenKind::DateLiteral) {
      return make_expr<LiteralExpr>(parse_literal());
    }
    fail({"variable", "literal", "substring"});
  }

  Literal parse_literal() {
    const Token& t = tokens_[pos_];
    switch (t.kind) {
      case TokenKind::Integer:
        ++pos_;
        return Literal::make_integer(t.number);
      case TokenKind::CodeLiteral:
        ++pos_;
        return Literal::make_code(t.text);
      case TokenKind::DateLiteral:
        ++pos_;
        return Literal::make_date(t.date);
      default:
        fail({"integer", "code literal", "date literal"});
    }
  }

  std::int64_t expect_index() {
    const Token& t = tokens_[pos_];
    if (t.kind != TokenKind::Integer || t.number < 0) fail({"non-negative integer"});
    ++pos_;
    return t.number;
  }

  std::string expect_identifier(const char* what) {
    const Token& t = tokens_[pos_];
    if (t.kind != TokenKind::Identifier) fail({what});
    ++pos_;
    return t.text;
  }

  bool match_keyword(std::string_view kw) {
    const Token& t = tokens_[pos_];
    if (t.kind == TokenKind::Keyword && t.text == kw) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_keyword(std::string_view kw) {
    if (!match_keyword(kw)) fail({std::string(kw)});
  }

  bool match_symbol(std::string_view s) {
    const Token& t = tokens_[pos_];
    if (t.kind == TokenKind::Symbol && t.text == s) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_symbol(std::string_view s) {
    if (!match_symbol(s)) fail({std::string(s)});
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    const Token& t = tokens_[pos_];
    std::ostringstream msg;
    msg << "syntax error at line " << t.line << ", column " << t.column << ": ";
    if (t.kind == TokenKind::EndOfInput)
      msg << "unexpected end of input";
    else
      msg << "unexpected '" << t.text << "'";
    if (!expected.empty()) {
      msg << "; expected ";
      for (size_t i = 0; i < expected.size(); ++i) {
        if (i) msg << (i + 1 == expected.size() ? " or " : ", ");
        msg << expected[i];
      }
    }
    throw ParseError(msg.str(), t.line, t.column, std::move(expected));
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
};

}  // namespace detail

// Parses one complete rule declaration.
inline Rule parse_rule(std::string_view source) {
  detail::Parser p(source);
  Rule r = p.parse_declaration();
  p.expect_end();
  return r;
}

// Parses a rule source file: any number of declarations, '#' line comments.
inline std::vector<Rule> parse_rules(std::string_view source) {
  return detail::Parser(source).parse_all();
}

}  // namespace regula
