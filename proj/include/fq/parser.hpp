#ifndef FQ_PARSER_HPP
#define FQ_PARSER_HPP

#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fq/ast.hpp"
#include "fq/diag.hpp"

namespace fq {

// ---------------------------------------------------------------------------
// Lexer.  Comments run from "--" to end of line.

enum class TokKind { Ident, Const, Sym, End };

struct Token {
  TokKind kind;
  std::string text;
  Span span;
};

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto push = [&](TokKind k, std::string text, int l, int c) {
    out.push_back(Token{k, std::move(text), Span{l, c}});
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    int l = line, cl = col;
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      push(TokKind::Ident, src.substr(i, j - i), l, cl);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (c == '`') {
      std::size_t j = i + 1;
      if (j >= src.size() || !is_ident_start(src[j]))
        fail(diag_code::parse, Span{l, cl}, "expected element label after `");
      while (j < src.size() && is_ident_char(src[j])) ++j;
      push(TokKind::Const, src.substr(i + 1, j - i - 1), l, cl);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    auto two = [&](const char* s) { return i + 1 < src.size() && src[i] == s[0] && src[i + 1] == s[1]; };
    const char* two_syms[] = {"\\/", "/\\", "->", ":=", "<:", "=>"};
    bool matched = false;
    for (const char* s : two_syms) {
      if (two(s)) {
        push(TokKind::Sym, s, l, cl);
        i += 2;
        col += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string("![]{}().,:#").find(c) != std::string::npos) {
      push(TokKind::Sym, std::string(1, c), l, cl);
      ++i;
      ++col;
      continue;
    }
    fail(diag_code::parse, Span{l, cl}, std::string("unexpected character '") + c + "'");
  }
  // End-of-input diagnostics point at the last real token.
  int el = line, ec = col;
  if (!out.empty()) {
    el = out.back().span.line;
    ec = out.back().span.col;
  }
  push(TokKind::End, "", el, ec);
  return out;
}

// ---------------------------------------------------------------------------
// Parser.

struct ParseOptions {
  Calculus calculus = Calculus::Fq;
  std::optional<QualPtr> default_tag;  // per-file pragma
};

class Parser {
 public:
  Parser(const std::string& src, ParseOptions opts = {}) : toks_(lex(src)), opts_(opts) {}

  QualPtr parse_qual_all() {
    QualPtr q = parse_qual();
    expect_end();
    return q;
  }
  TypePtr parse_stype_all() {
    TypePtr t = parse_stype();
    expect_end();
    return t;
  }
  QualType parse_qualtype_all() {
    QualType t = parse_qualtype();
    expect_end();
    return t;
  }
  TermPtr parse_term_all() {
    TermPtr t = parse_term();
    expect_end();
    return t;
  }

  // --- qualifiers ---------------------------------------------------------
  QualPtr parse_qual() {
    QualPtr q = parse_qual_meet();
    while (at_sym("\\/")) {
      next();
      q = Qual::join(q, parse_qual_meet());
    }
    return q;
  }

  QualPtr parse_qual_meet() {
    QualPtr q = parse_qual_atom();
    while (at_sym("/\\")) {
      next();
      q = Qual::meet(q, parse_qual_atom());
    }
    return q;
  }

  QualPtr parse_qual_atom() {
    const Token& t = peek();
    if (t.kind == TokKind::Const) {
      next();
      return Qual::cst(t.text);
    }
    if (t.kind == TokKind::Ident) {
      if (t.text == "top") {
        next();
        return Qual::top();
      }
      if (t.text == "bot") {
        next();
        return Qual::bot();
      }
      if (is_keyword(t.text)) err("unexpected keyword '" + t.text + "' in qualifier");
      next();
      return Qual::var(t.text);
    }
    if (at_sym("(")) {
      next();
      QualPtr q = parse_qual();
      expect_sym(")");
      return q;
    }
    err("expected qualifier");
  }

  // --- types ---------------------------------------------------------------
  QualType parse_qualtype() {
    expect_sym("{");
    QualPtr q = parse_qual();
    expect_sym("}");
    TypePtr s = parse_stype();
    return qt(q, s);
  }

  TypePtr parse_stype() {
    const Token& t = peek();
    if (at_sym("{")) {
      QualType lhs = parse_qualtype();
      expect_sym("->");
      QualType rhs = parse_qualtype();
      return t_arrow(lhs, rhs);
    }
    if (at_sym("(")) {
      // Dependent arrow "(x <: Q : S) -> T" vs parenthesized shape.
      if (peek(1).kind == TokKind::Ident && !is_keyword(peek(1).text) && peek2_is("<:")) {
        if (opts_.calculus != Calculus::Fc) err("dependent arrow types are only available in fc");
        next();
        std::string x = expect_ident();
        expect_sym("<:");
        QualPtr bound = parse_qual();
        expect_sym(":");
        TypePtr shape = parse_stype();
        expect_sym(")");
        expect_sym("->");
        QualType result = parse_qualtype();
        return t_dep_arrow(x, qt(bound, shape), result);
      }
      next();
      TypePtr inner = parse_stype();
      expect_sym(")");
      return inner;
    }
    if (t.kind == TokKind::Ident) {
      if (t.text == "Top") {
        next();
        return t_top();
      }
      if (t.text == "Unit") {
        next();
        return t_unit();
      }
      if (t.text == "Box") {
        next();
        return t_box(parse_qualtype());
      }
      if (t.text == "all") {
        next();
        expect_sym("(");
        std::string x = expect_ident();
        expect_sym("<:");
        TypePtr bound = parse_stype();
        expect_sym(")");
        expect_sym(".");
        return t_all(x, bound, parse_qualtype());
      }
      if (t.text == "qall") {
        next();
        expect_sym("(");
        std::string y = expect_ident();
        expect_sym("<:");
        QualPtr bound = parse_qual();
        expect_sym(")");
        expect_sym(".");
        return t_qall(y, bound, parse_qualtype());
      }
      if (is_keyword(t.text)) err("unexpected keyword '" + t.text + "' in type");
      next();
      return t_var(t.text);
    }
    err("expected type");
  }

  // --- terms ---------------------------------------------------------------
  TermPtr parse_term() {
    const Token& t = peek();
    if (t.kind == TokKind::Ident && (t.text == "fn" || t.text == "tfn" || t.text == "qfn"))
      return parse_lambda();
    TermPtr lhs = parse_app();
    if (at_sym(":=")) {
      if (opts_.calculus != Calculus::Fm) err("assignment is only available in fm");
      Span sp = peek().span;
      next();
      TermPtr rhs = parse_app();
      return with_span(e_assign(lhs, rhs), sp);
    }
    return lhs;
  }

  TermPtr parse_lambda() {
    Token head = peek();
    next();
    QualPtr tag = parse_tag(head.span);
    expect_sym("(");
    std::string x = expect_ident();
    if (head.text == "fn") {
      if (at_sym("<:")) {
        if (opts_.calculus != Calculus::Fc) err("capture binders fn[P](x <: Q : S) are only available in fc");
        next();
        QualPtr bound = parse_qual();
        expect_sym(":");
        TypePtr shape = parse_stype();
        expect_sym(")");
        expect_sym("=>");
        return with_span(e_cabs(tag, x, qt(bound, shape), parse_term()), head.span);
      }
      if (opts_.calculus == Calculus::Fc) err("fc binders take a qualifier bound: fn[P](x <: Q : S)");
      expect_sym(":");
      QualType pt = parse_qualtype();
      expect_sym(")");
      expect_sym("=>");
      return with_span(e_abs(tag, x, pt, parse_term()), head.span);
    }
    if (head.text == "tfn") {
      expect_sym("<:");
      TypePtr bound = parse_stype();
      expect_sym(")");
      expect_sym("=>");
      return with_span(e_tabs(tag, x, bound, parse_term()), head.span);
    }
    expect_sym("<:");
    QualPtr bound = parse_qual();
    expect_sym(")");
    expect_sym("=>");
    return with_span(e_qabs(tag, x, bound, parse_term()), head.span);
  }

  TermPtr parse_app() {
    TermPtr t = parse_prefix();
    if (opts_.calculus == Calculus::Fc) {
      if (starts_atom()) err("fc application takes a qualifier argument: s [{Q}] t");
      return t;
    }
    while (starts_atom()) {
      Span sp = peek().span;
      t = with_span(e_app(t, parse_prefix_nonapp()), sp);
    }
    return t;
  }

  TermPtr parse_prefix() { return parse_prefix_impl(); }
  // Application arguments sit at postfix level.
  TermPtr parse_prefix_nonapp() { return parse_postfix(); }

  TermPtr parse_prefix_impl() {
    const Token& t = peek();
    if (t.kind == TokKind::Ident && t.text == "upqual") {
      next();
      QualPtr q = parse_qual_atom();
      return with_span(e_upqual(q, parse_postfix()), t.span);
    }
    if (t.kind == TokKind::Ident && t.text == "assert") {
      next();
      QualPtr q = parse_qual_atom();
      return with_span(e_assert(q, parse_postfix()), t.span);
    }
    if (t.kind == TokKind::Ident && t.text == "ref") {
      if (opts_.calculus != Calculus::Fm) err("references are only available in fm");
      next();
      QualPtr tag = parse_tag(t.span);
      return with_span(e_ref(tag, parse_postfix()), t.span);
    }
    return parse_postfix();
  }

  TermPtr parse_postfix() {
    TermPtr t = parse_atom();
    while (at_sym("[")) {
      Span sp = peek().span;
      next();
      if (at_sym("{")) {
        next();
        QualPtr q = parse_qual();
        expect_sym("}");
        expect_sym("]");
        // In fc a following atom makes this a three-argument application;
        // otherwise it is a plain qualifier application in every calculus.
        if (opts_.calculus == Calculus::Fc && starts_atom()) {
          TermPtr arg = parse_atom();
          t = with_span(e_capp(t, q, arg), sp);
        } else {
          t = with_span(e_qapp(t, q), sp);
        }
      } else {
        TypePtr s = parse_stype();
        expect_sym("]");
        t = with_span(e_tapp(t, s), sp);
      }
    }
    return t;
  }

  TermPtr parse_atom() {
    const Token& t = peek();
    if (at_sym("!")) {
      if (opts_.calculus != Calculus::Fm) err("dereference is only available in fm");
      next();
      return with_span(e_deref(parse_atom()), t.span);
    }
    if (at_sym("(")) {
      next();
      TermPtr inner = parse_term();
      expect_sym(")");
      return inner;
    }
    if (t.kind == TokKind::Ident) {
      if (t.text == "unit") {
        if (opts_.calculus != Calculus::Fm) err("unit is only available in fm");
        next();
        if (at_sym("[")) {
          next();
          QualPtr q = parse_qual();
          expect_sym("]");
          return with_span(e_unit_tagged(q), t.span);
        }
        return with_span(e_unit(), t.span);
      }
      if (t.text == "fn" || t.text == "tfn" || t.text == "qfn")
        err("lambdas need parentheses in this position");
      if (is_keyword(t.text)) err("unexpected keyword '" + t.text + "'");
      next();
      return with_span(e_var(t.text), t.span);
    }
    err("expected a term");
  }

 private:
  QualPtr parse_tag(const Span& sp) {
    if (at_sym("[")) {
      next();
      QualPtr q = parse_qual();
      expect_sym("]");
      return q;
    }
    if (opts_.default_tag) return *opts_.default_tag;
    fail(diag_code::parse, sp, "missing value tag [P] (no default_tag pragma in effect)");
  }

  bool starts_atom() {
    const Token& t = peek();
    if (t.kind == TokKind::Ident)
      return !is_keyword(t.text) || t.text == "unit";
    return at_sym("(") || at_sym("!");
  }

  static bool is_keyword(const std::string& s) {
    static const char* kws[] = {"fn",  "tfn",  "qfn",    "all",    "qall", "ref",  "Top", "Box",
                                "Unit", "top", "bot",    "upqual", "assert", "unit"};
    for (const char* k : kws)
      if (s == k) return true;
    return false;
  }

  const Token& peek(int ahead = 0) const {
    std::size_t i = pos_ + static_cast<std::size_t>(ahead);
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool peek2_is(const std::string& sym) const {
    return peek(2).kind == TokKind::Sym && peek(2).text == sym;
  }
  void next() { ++pos_; }
  bool at_sym(const std::string& s) const {
    return peek().kind == TokKind::Sym && peek().text == s;
  }
  void expect_sym(const std::string& s) {
    if (!at_sym(s)) err("expected '" + s + "'");
    next();
  }
  std::string expect_ident() {
    const Token& t = peek();
    if (t.kind != TokKind::Ident || is_keyword(t.text)) err("expected an identifier");
    next();
    return t.text;
  }
  void expect_end() {
    if (peek().kind != TokKind::End) err("unexpected trailing input");
  }
  [[noreturn]] void err(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.kind == TokKind::End ? "end of input" : "'" + t.text + "'";
    fail(diag_code::parse, t.span, msg + ", found " + got);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ParseOptions opts_;
};

// ---------------------------------------------------------------------------
// Convenience entry points.

inline TermPtr parse_term(const std::string& src, ParseOptions opts = {}) {
  return Parser(src, opts).parse_term_all();
}
inline QualPtr parse_qual(const std::string& src, ParseOptions opts = {}) {
  return Parser(src, opts).parse_qual_all();
}
inline TypePtr parse_stype(const std::string& src, ParseOptions opts = {}) {
  return Parser(src, opts).parse_stype_all();
}
inline QualType parse_qualtype(const std::string& src, ParseOptions opts = {}) {
  return Parser(src, opts).parse_qualtype_all();
}

// ---------------------------------------------------------------------------
// Source files.  Pragma lines at the top start with '#':
//   #calculus fq|fm|fa|fc
//   #lattice PATH
//   #default_tag bot|top
// Pragma lines are blanked (not removed) so spans stay correct.

struct SourceFile {
  Calculus calculus = Calculus::Fq;
  std::string lattice_path;
  std::optional<QualPtr> default_tag;
  std::string body;
};

inline SourceFile split_pragmas(const std::string& text) {
  SourceFile out;
  std::size_t pos = 0;
  std::string body = text;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos && line[first] == '#') {
      std::istringstream is(line.substr(first + 1));
      std::string key, value;
      is >> key >> value;
      Span sp{line_no, static_cast<int>(first) + 1};
      if (key == "calculus") {
        if (value == "fq") out.calculus = Calculus::Fq;
        else if (value == "fm") out.calculus = Calculus::Fm;
        else if (value == "fa") out.calculus = Calculus::Fa;
        else if (value == "fc") out.calculus = Calculus::Fc;
        else fail(diag_code::parse, sp, "unknown calculus '" + value + "'");
      } else if (key == "lattice") {
        if (value.empty())
          fail(diag_code::parse, sp, "missing lattice path");
        out.lattice_path = value;
      } else if (key == "default_tag") {
        if (value == "bot") out.default_tag = Qual::bot();
        else if (value == "top") out.default_tag = Qual::top();
        else fail(diag_code::parse, sp, "default_tag must be bot or top");
      } else {
        fail(diag_code::parse, sp, "unknown pragma '" + key + "'");
      }
      for (std::size_t i = pos; i < (eol == std::string::npos ? text.size() : eol); ++i) body[i] = ' ';
      if (eol == std::string::npos) break;
      pos = eol + 1;
      continue;
    }
    if (first != std::string::npos) break;  // first real content line
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  out.body = body;
  return out;
}

// ---------------------------------------------------------------------------
// CLI environment strings: comma-separated entries.
//   name<:bound   qualifier variable when the bound parses as a qualifier,
//                 otherwise a type variable
//   name:{Q}S     term binding (fc)

inline Env parse_env_string(const std::string& text, ParseOptions opts = {}) {
  Env env;
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  for (const std::string& part : parts) {
    std::size_t nstart = part.find_first_not_of(" \t");
    if (nstart == std::string::npos) continue;
    std::size_t sub = part.find("<:");
    std::size_t col = part.find(':');
    if (sub != std::string::npos && sub <= col) {
      std::string name = part.substr(0, sub);
      std::string bound = part.substr(sub + 2);
      name.erase(name.find_last_not_of(" \t") + 1);
      name.erase(0, name.find_first_not_of(" \t"));
      try {
        env = env.with_qual_var(name, Parser(bound, opts).parse_qual_all());
      } catch (const TypeError&) {
        env = env.with_type_var(name, Parser(bound, opts).parse_stype_all());
      }
    } else if (col != std::string::npos) {
      std::string name = part.substr(0, col);
      std::string ty = part.substr(col + 1);
      name.erase(name.find_last_not_of(" \t") + 1);
      name.erase(0, name.find_first_not_of(" \t"));
      env = env.with_term_var(name, Parser(ty, opts).parse_qualtype_all());
    } else {
      fail(diag_code::parse, Span{}, "environment entry must be name<:bound or name:{Q}S: " + part);
    }
  }
  return env;
}

}  // namespace fq

#endif  // FQ_PARSER_HPP
