#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "procshade/glsl/diag.hpp"

namespace procshade::glsl {

enum class TokKind : std::uint8_t { Ident, FloatLit, IntLit, Punct, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  double fval = 0;
  std::int64_t ival = 0;
  int line = 1;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> toks;
  int line = 1;
  std::size_t i = 0;
  const std::size_t n = src.size();

  auto is_ident_start = [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  };
  auto is_ident_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };

  while (i < n) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
      ++i;
      continue;
    }
    Token t;
    t.line = line;
    if (is_ident_start(c)) {
      std::size_t e = i;
      while (e < n && is_ident_char(src[e])) ++e;
      t.kind = TokKind::Ident;
      t.text.assign(src.substr(i, e - i));
      i = e;
      toks.push_back(std::move(t));
      continue;
    }
    if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(src[i + 1]))) {
      std::size_t e = i;
      bool is_float = false;
      bool is_hex = false;
      if (src[e] == '0' && e + 1 < n && (src[e + 1] == 'x' || src[e + 1] == 'X')) {
        is_hex = true;
        e += 2;
        while (e < n && std::isxdigit(static_cast<unsigned char>(src[e]))) ++e;
      } else {
        while (e < n && is_digit(src[e])) ++e;
        if (e < n && src[e] == '.') {
          is_float = true;
          ++e;
          while (e < n && is_digit(src[e])) ++e;
        }
        if (e < n && (src[e] == 'e' || src[e] == 'E')) {
          std::size_t save = e;
          ++e;
          if (e < n && (src[e] == '+' || src[e] == '-')) ++e;
          if (e < n && is_digit(src[e])) {
            is_float = true;
            while (e < n && is_digit(src[e])) ++e;
          } else {
            e = save;  // "e" belongs to a following identifier
          }
        }
      }
      std::string text(src.substr(i, e - i));
      // suffixes
      if (e < n && (src[e] == 'f' || src[e] == 'F') && !is_hex) {
        is_float = true;
        ++e;
      } else if (e < n && (src[e] == 'u' || src[e] == 'U') && !is_float) {
        ++e;  // unsigned literal: treated as int
      }
      if (is_float) {
        t.kind = TokKind::FloatLit;
        try {
          t.fval = std::stod(text);
        } catch (...) {
          fail(line, "malformed float literal '" + text + "'");
        }
      } else {
        t.kind = TokKind::IntLit;
        try {
          t.ival = std::stoll(text, nullptr, 0);
        } catch (...) {
          fail(line, "malformed integer literal '" + text + "'");
        }
      }
      t.text = std::move(text);
      i = e;
      toks.push_back(std::move(t));
      continue;
    }
    // punctuation, longest match first
    static const char* kThree[] = {"<<=", ">>="};
    static const char* kTwo[] = {"<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "^^",
                                 "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "++", "--"};
    std::string_view rest = src.substr(i);
    std::string matched;
    for (const char* p : kThree)
      if (rest.starts_with(p)) {
        matched = p;
        break;
      }
    if (matched.empty())
      for (const char* p : kTwo)
        if (rest.starts_with(p)) {
          matched = p;
          break;
        }
    if (matched.empty()) {
      static const std::string_view kSingle = "+-*/%<>=!&|^~?:;,.()[]{}";
      if (kSingle.find(c) == std::string_view::npos)
        fail(line, std::string("unexpected character '") + c + "'");
      matched = std::string(1, c);
    }
    t.kind = TokKind::Punct;
    t.text = matched;
    i += matched.size();
    toks.push_back(std::move(t));
  }
  Token end;
  end.kind = TokKind::End;
  end.line = line;
  toks.push_back(std::move(end));
  return toks;
}

}  // namespace procshade::glsl
