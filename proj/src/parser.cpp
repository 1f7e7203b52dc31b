#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "amc/formula.hpp"

namespace amc {

namespace {

enum class Tok {
  LParen,
  RParen,
  Question,
  Colon,
  LBracket,
  Pipe,
  RBracket,
  At,
  Tilde,
  Amp,
  OrKw,
  Arrow,
  Caret,
  LBrace,
  Slash,
  RBrace,
  Ident,
  Nat,
  Top,
  Bot,
  ExpectAt,
  BoxAt,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skip_space();
    int line = line_, col = col_;
    if (pos_ >= src_.size()) return {Tok::End, "", line, col};
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident(line, col);
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string text;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        text += advance();
      return {Tok::Nat, text, line, col};
    }
    switch (c) {
      case '(':
        advance();
        return {Tok::LParen, "(", line, col};
      case ')':
        advance();
        return {Tok::RParen, ")", line, col};
      case '?':
        advance();
        return {Tok::Question, "?", line, col};
      case ':':
        advance();
        return {Tok::Colon, ":", line, col};
      case '[':
        advance();
        return {Tok::LBracket, "[", line, col};
      case '|':
        advance();
        return {Tok::Pipe, "|", line, col};
      case ']':
        advance();
        return {Tok::RBracket, "]", line, col};
      case '@':
        advance();
        return {Tok::At, "@", line, col};
      case '~':
        advance();
        return {Tok::Tilde, "~", line, col};
      case '&':
        advance();
        return {Tok::Amp, "&", line, col};
      case '^':
        advance();
        return {Tok::Caret, "^", line, col};
      case '{':
        advance();
        return {Tok::LBrace, "{", line, col};
      case '/':
        advance();
        return {Tok::Slash, "/", line, col};
      case '}':
        advance();
        return {Tok::RBrace, "}", line, col};
      case '-':
        advance();
        if (pos_ < src_.size() && src_[pos_] == '>') {
          advance();
          return {Tok::Arrow, "->", line, col};
        }
        throw ParseError(line, col, "expected '->'");
      default:
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
  }

 private:
  Token ident(int line, int col) {
    std::string text;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                  src_[pos_] == '_'))
      text += advance();
    if (text == "T") return {Tok::Top, text, line, col};
    if (text == "F") return {Tok::Bot, text, line, col};
    if (text == "v") return {Tok::OrKw, text, line, col};
    if ((text == "E" || text == "B") && pos_ < src_.size() && src_[pos_] == '@') {
      advance();
      return {text == "E" ? Tok::ExpectAt : Tok::BoxAt, text + "@", line, col};
    }
    return {Tok::Ident, text, line, col};
  }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      advance();
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lexer_(src) { shift(); }

  Formula parse_all() {
    Formula f = impl();
    expect(Tok::End, "trailing input after formula");
    return f;
  }

 private:
  // impl := or ("->" impl)?        (right associative)
  Formula impl() {
    Formula lhs = disj();
    if (cur_.kind == Tok::Arrow) {
      shift();
      return Formula::implies(lhs, impl());
    }
    return lhs;
  }

  // or := and ("v" and)*
  Formula disj() {
    Formula lhs = conj();
    while (cur_.kind == Tok::OrKw) {
      shift();
      lhs = Formula::disj(lhs, conj());
    }
    return lhs;
  }

  // and := unary ("&" unary)*
  Formula conj() {
    Formula lhs = unary();
    while (cur_.kind == Tok::Amp) {
      shift();
      lhs = Formula::conj(lhs, unary());
    }
    return lhs;
  }

  Formula unary() {
    if (cur_.kind == Tok::Tilde) {
      shift();
      return Formula::neg(unary());
    }
    if (cur_.kind == Tok::ExpectAt || cur_.kind == Tok::BoxAt) {
      bool is_expect = cur_.kind == Tok::ExpectAt;
      shift();
      std::string agent = expect_ident("agent name after '" +
                                       std::string(is_expect ? "E@" : "B@") + "'");
      Formula body = unary();
      return is_expect ? Formula::expect(agent, body) : Formula::box(agent, body);
    }
    return postfix();
  }

  // postfix := atom ("^" "{" nat "/" nat "}")*
  Formula postfix() {
    Formula f = atom();
    while (cur_.kind == Tok::Caret) {
      shift();
      expect(Tok::LBrace, "'{' after '^'");
      unsigned long lo = nat();
      expect(Tok::Slash, "'/' in repetition bound");
      unsigned long hi = nat();
      expect(Tok::RBrace, "'}' closing repetition bound");
      f = Formula::repeat(f, lo, hi);
    }
    return f;
  }

  Formula atom() {
    switch (cur_.kind) {
      case Tok::Top:
        shift();
        return Formula::top();
      case Tok::Bot:
        shift();
        return Formula::bot();
      case Tok::Ident: {
        std::string name = cur_.text;
        shift();
        return Formula::var(name);
      }
      case Tok::LParen: {
        shift();
        Formula first = impl();
        if (cur_.kind == Tok::Question) {
          shift();
          Formula then = impl();
          expect(Tok::Colon, "':' in conditional");
          Formula els = impl();
          expect(Tok::RParen, "')' closing conditional");
          return Formula::ite(first, then, els);
        }
        expect(Tok::RParen, "')' or '?'");
        return first;
      }
      case Tok::LBracket: {
        shift();
        Formula target = impl();
        expect(Tok::Pipe, "'|' in conditional belief term");
        Formula given = impl();
        expect(Tok::RBracket, "']' closing conditional belief term");
        if (cur_.kind != Tok::At)
          throw ParseError(cur_.line, cur_.col,
                           "missing agent subscript: expected '@' after ']'");
        shift();
        std::string agent = expect_ident("agent name after '@'");
        return Formula::cond(target, given, agent);
      }
      default:
        throw ParseError(cur_.line, cur_.col, "expected a formula, got '" + cur_.text + "'");
    }
  }

  unsigned long nat() {
    if (cur_.kind != Tok::Nat)
      throw ParseError(cur_.line, cur_.col, "expected a natural number, got '" + cur_.text + "'");
    unsigned long value = std::stoul(cur_.text);
    shift();
    return value;
  }

  std::string expect_ident(const std::string& what) {
    if (cur_.kind != Tok::Ident) throw ParseError(cur_.line, cur_.col, "expected " + what);
    std::string name = cur_.text;
    shift();
    return name;
  }

  void expect(Tok kind, const std::string& what) {
    if (cur_.kind != kind)
      throw ParseError(cur_.line, cur_.col, "expected " + what + ", got '" +
                                                (cur_.kind == Tok::End ? "end of input" : cur_.text) +
                                                "'");
    shift();
  }

  void shift() { cur_ = lexer_.next(); }

  Lexer lexer_;
  Token cur_{Tok::End, "", 0, 0};
};

// Precedence levels for printing, loosest first.
enum Level { kImpl = 0, kOr = 1, kAnd = 2, kUnary = 3, kPostfix = 4, kAtom = 5 };

int level_of(const Formula& f) {
  switch (f.op()) {
    case Op::Implies:
      return kImpl;
    case Op::Or:
      return kOr;
    case Op::And:
      return kAnd;
    case Op::Not:
    case Op::Expect:
    case Op::Box:
      return kUnary;
    case Op::Repeat:
      return kPostfix;
    default:
      return kAtom;
  }
}

void render(const Formula& f, int min_level, std::string& out) {
  const bool parens = level_of(f) < min_level;
  if (parens) out += "(";
  switch (f.op()) {
    case Op::Top:
      out += "T";
      break;
    case Op::Bot:
      out += "F";
      break;
    case Op::Var:
      out += f.id();
      break;
    case Op::Ite:
      out += "(";
      render(f.child(0), kImpl, out);
      out += " ? ";
      render(f.child(1), kImpl, out);
      out += " : ";
      render(f.child(2), kImpl, out);
      out += ")";
      break;
    case Op::Cond:
      out += "[";
      render(f.child(0), kImpl, out);
      out += " | ";
      render(f.child(1), kImpl, out);
      out += "]@";
      out += f.id();
      break;
    case Op::And:
      render(f.child(0), kAnd, out);
      out += " & ";
      render(f.child(1), kUnary, out);
      break;
    case Op::Or:
      render(f.child(0), kOr, out);
      out += " v ";
      render(f.child(1), kAnd, out);
      break;
    case Op::Implies:
      render(f.child(0), kOr, out);
      out += " -> ";
      render(f.child(1), kImpl, out);
      break;
    case Op::Not:
      out += "~";
      render(f.child(0), kUnary, out);
      break;
    case Op::Expect:
    case Op::Box:
      out += f.op() == Op::Expect ? "E@" : "B@";
      out += f.id();
      out += " ";
      render(f.child(0), kUnary, out);
      break;
    case Op::Repeat:
      render(f.child(0), kPostfix, out);
      out += "^{" + std::to_string(f.repeat_lo()) + "/" + std::to_string(f.repeat_hi()) + "}";
      break;
  }
  if (parens) out += ")";
}

}  // namespace

Formula parse(const std::string& text) { return Parser(text).parse_all(); }

std::string print(const Formula& f) {
  std::string out;
  render(f, kImpl, out);
  return out;
}

}  // namespace amc
