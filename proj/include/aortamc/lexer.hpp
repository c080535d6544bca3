#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>

#include "aortamc/errors.hpp"

namespace aortamc {

enum class TokenKind { Atom, Variable, Integer, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;

  bool is(std::string_view punct) const { return kind == TokenKind::Punct && text == punct; }
  bool is_word(std::string_view word) const {
    return (kind == TokenKind::Atom || kind == TokenKind::Variable) && text == word;
  }
};

/// Shared tokenizer for terms, reasoning rules, agent programs and
/// properties. Identifiers starting with a lowercase letter are atoms,
/// identifiers starting with an uppercase letter or '_' are variables.
class Lexer {
public:
  explicit Lexer(std::string_view source, char comment = '%')
      : src_(source), comment_(comment) {
    current_ = scan();
  }

  const Token& peek() const { return current_; }

  Token next() {
    Token t = std::move(current_);
    current_ = scan();
    return t;
  }

  bool accept(std::string_view punct) {
    if (current_.is(punct)) {
      next();
      return true;
    }
    return false;
  }

  Token expect(std::string_view punct) {
    if (!current_.is(punct))
      fail("expected '" + std::string(punct) + "' but found " + describe(current_));
    return next();
  }

  bool at_end() const { return current_.kind == TokenKind::End; }

  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(what, current_.line, current_.column);
  }

  static std::string describe(const Token& t) {
    if (t.kind == TokenKind::End) return "end of input";
    return "'" + t.text + "'";
  }

private:
  Token scan() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= src_.size()) return t;

    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      t.text = std::string(src_.substr(start, pos_ - start));
      t.kind = (std::islower(static_cast<unsigned char>(c))) ? TokenKind::Atom : TokenKind::Variable;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      t.text = std::string(src_.substr(start, pos_ - start));
      t.kind = TokenKind::Integer;
      return t;
    }
    static constexpr std::array<std::string_view, 8> multi = {"\\=", "=>", "<-", "->",
                                                              "&&", "||", "<>", ":="};
    for (auto m : multi) {
      if (src_.substr(pos_, m.size()) == m) {
        for (std::size_t i = 0; i < m.size(); ++i) advance();
        t.kind = TokenKind::Punct;
        t.text = std::string(m);
        return t;
      }
    }
    if (std::string_view("()[]{},.:;~!+-=|&<>\\@").find(c) != std::string_view::npos) {
      advance();
      t.kind = TokenKind::Punct;
      t.text = std::string(1, c);
      return t;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", line_, column_);
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == comment_) {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view src_;
  char comment_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
  Token current_;
};

} // namespace aortamc
