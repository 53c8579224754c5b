#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memlab {

struct SourceLoc {
  int line = 1;
  int column = 1;

  bool operator==(const SourceLoc&) const = default;
};

enum class Severity { Error, Warning, Note };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;
  SourceLoc loc;
};

inline std::string to_string(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Note: return "note";
  }
  return "error";
}

inline std::string to_string(const Diagnostic& d) {
  return std::to_string(d.loc.line) + ":" + std::to_string(d.loc.column) + ": " +
         to_string(d.severity) + ": " + d.message;
}

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds)
    if (d.severity == Severity::Error) return true;
  return false;
}

enum class TokenKind { Ident, Quoted, Nat, Punct, End, Invalid };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  SourceLoc loc;

  bool is(std::string_view punct) const { return kind == TokenKind::Punct && text == punct; }
  bool is_word(std::string_view w) const { return kind == TokenKind::Ident && text == w; }
  bool is_name() const { return kind == TokenKind::Ident || kind == TokenKind::Quoted; }
};

/// Tokenizer shared by the `.mem`, `.amb` and `.brn` readers. Line comments
/// start with `#` or `//`. Multi-character punctuation: `->`.
class Lexer {
public:
  explicit Lexer(std::string_view src, bool dots_in_identifiers = false)
      : src_(src), dots_(dots_in_identifiers) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    for (;;) {
      Token t = next();
      out.push_back(t);
      if (t.kind == TokenKind::End || t.kind == TokenKind::Invalid) break;
    }
    return out;
  }

private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++loc_.line;
      loc_.column = 1;
    } else {
      ++loc_.column;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char ch = peek();
      if (std::isspace(static_cast<unsigned char>(ch))) {
        advance();
      } else if (ch == '#' || (ch == '/' && peek(1) == '/')) {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  bool ident_char(char ch) const {
    auto u = static_cast<unsigned char>(ch);
    return std::isalnum(u) || ch == '_' || ch == '\'' || (dots_ && ch == '.');
  }

  Token next() {
    skip_space();
    Token t;
    t.loc = loc_;
    if (pos_ >= src_.size()) return t;
    char ch = peek();
    auto u = static_cast<unsigned char>(ch);
    if (std::isdigit(u)) {
      t.kind = TokenKind::Nat;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        t.text += peek();
        advance();
      }
      // a digit-led word such as `0abc` is not a number
      if (ident_char(peek()) && !std::isdigit(static_cast<unsigned char>(peek()))) {
        t.kind = TokenKind::Invalid;
        t.text = "malformed number";
      }
      return t;
    }
    if (std::isalpha(u) || ch == '_') {
      t.kind = TokenKind::Ident;
      while (pos_ < src_.size() && ident_char(peek())) {
        t.text += peek();
        advance();
      }
      return t;
    }
    if (ch == '"') {
      advance();
      t.kind = TokenKind::Quoted;
      while (pos_ < src_.size() && peek() != '"') {
        if (peek() == '\n') break;
        if (peek() == '\\' && pos_ + 1 < src_.size()) advance();
        t.text += peek();
        advance();
      }
      if (peek() != '"') {
        t.kind = TokenKind::Invalid;
        t.text = "unterminated quoted name";
        return t;
      }
      advance();
      if (t.text.empty()) {
        t.kind = TokenKind::Invalid;
        t.text = "empty quoted name";
      }
      return t;
    }
    if (ch == '-' && peek(1) == '>') {
      t.kind = TokenKind::Punct;
      t.text = "->";
      advance();
      advance();
      return t;
    }
    static constexpr std::string_view kPunct = "{}()[]<>;,~@|.-&!*";
    if (kPunct.find(ch) != std::string_view::npos) {
      t.kind = TokenKind::Punct;
      t.text = std::string(1, ch);
      advance();
      return t;
    }
    t.kind = TokenKind::Invalid;
    t.text = std::string("unexpected character '") + ch + "'";
    return t;
  }

  std::string_view src_;
  bool dots_;
  std::size_t pos_ = 0;
  SourceLoc loc_;
};

/// Cursor over a token vector with located diagnostics. Parsers throw
/// `ParseFailure` to unwind on the first hard error.
struct ParseFailure {
  Diagnostic diag;
};

/// Outcome of reading a term: a value, or the diagnostics explaining why not.
template <class T>
struct Parsed {
  std::optional<T> value;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return value.has_value() && !has_errors(diagnostics); }
};

class TokenCursor {
public:
  explicit TokenCursor(std::vector<Token> toks) : toks_(std::move(toks)) {
    if (!toks_.empty() && toks_.back().kind == TokenKind::Invalid)
      fail_at(toks_.back(), "lexical error: " + toks_.back().text);
  }

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& take() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == TokenKind::End; }
  std::size_t mark() const { return pos_; }
  void reset(std::size_t m) { pos_ = m; }

  bool accept(std::string_view punct) {
    if (peek().is(punct)) {
      take();
      return true;
    }
    return false;
  }
  bool accept_word(std::string_view w) {
    if (peek().is_word(w)) {
      take();
      return true;
    }
    return false;
  }

  void expect(std::string_view punct) {
    if (!accept(punct)) fail("expected '" + std::string(punct) + "'");
  }
  void expect_word(std::string_view w) {
    if (!accept_word(w)) fail("expected '" + std::string(w) + "'");
  }

  std::string expect_name(std::string_view what = "identifier") {
    if (!peek().is_name()) fail("expected " + std::string(what));
    return take().text;
  }

  int expect_nat() {
    if (peek().kind != TokenKind::Nat) fail("expected a natural number");
    const Token& t = take();
    if (t.text.size() > 9) fail_at(t, "number too large");
    return std::stoi(t.text);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string found = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    fail_at(t, msg + ", found " + found);
  }
  [[noreturn]] static void fail_at(const Token& t, const std::string& msg) {
    throw ParseFailure{Diagnostic{Severity::Error, msg, t.loc}};
  }

private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace memlab
