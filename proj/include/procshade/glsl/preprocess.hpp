#pragma once

#include <cctype>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "procshade/glsl/diag.hpp"

namespace procshade::glsl {

// Minimal GLSL preprocessor: comments, line continuations, #version capture,
// object- and function-like #define/#undef, #ifdef/#ifndef/#else/#endif.
// #extension/#pragma/#line are ignored; #if/#elif/#include are reported as
// compile errors so affected shaders are rejected rather than mis-expanded.
class Preprocessor {
 public:
  struct Result {
    std::string text;
    std::string version;  // contents of the #version directive, if any
  };

  static Result run(std::string_view source) {
    Preprocessor pp;
    return pp.process(source);
  }

  // Comment removal alone; used for lexical scans that must not fail on
  // snippets that would not survive full preprocessing.
  static std::string run_comment_strip(std::string_view source) {
    return strip_comments(source);
  }

 private:
  struct Macro {
    bool function_like = false;
    std::vector<std::string> params;
    std::string body;
  };

  std::map<std::string, Macro, std::less<>> macros_;

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  static std::string strip_comments(std::string_view src) {
    std::string out;
    out.reserve(src.size());
    std::size_t i = 0;
    while (i < src.size()) {
      if (src[i] == '/' && i + 1 < src.size() && src[i + 1] == '/') {
        while (i < src.size() && src[i] != '\n') ++i;
      } else if (src[i] == '/' && i + 1 < src.size() && src[i + 1] == '*') {
        i += 2;
        out.push_back(' ');
        while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) {
          if (src[i] == '\n') out.push_back('\n');
          ++i;
        }
        i = (i + 1 < src.size()) ? i + 2 : src.size();
      } else {
        out.push_back(src[i]);
        ++i;
      }
    }
    return out;
  }

  // Joins backslash-continued lines; emits an empty line per splice so later
  // line numbers stay aligned with the original source.
  static std::vector<std::string> split_logical_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    int spliced = 0;
    auto flush = [&] {
      lines.push_back(cur);
      cur.clear();
      for (; spliced > 0; --spliced) lines.emplace_back();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
      char c = text[i];
      if (c == '\\' && i + 1 < text.size() && text[i + 1] == '\n') {
        ++i;
        ++spliced;
        cur.push_back(' ');
        continue;
      }
      if (c == '\n') {
        flush();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty() || spliced > 0) flush();
    return lines;
  }

  Result process(std::string_view source) {
    Result res;
    const std::string clean = strip_comments(source);
    const std::vector<std::string> lines = split_logical_lines(clean);

    // condition stack: {parent_active, this_branch_taken}
    std::vector<std::pair<bool, bool>> conds;
    auto active = [&] {
      for (auto& c : conds)
        if (!c.second || !c.first) return false;
      return true;
    };

    std::string out;
    int line_no = 0;
    for (const std::string& raw : lines) {
      ++line_no;
      std::size_t p = raw.find_first_not_of(" \t");
      if (p != std::string::npos && raw[p] == '#') {
        handle_directive(raw.substr(p + 1), line_no, conds, active(), res);
        out.push_back('\n');
        continue;
      }
      if (!active()) {
        out.push_back('\n');
        continue;
      }
      std::set<std::string> guard;
      out += expand(raw, guard, 0, line_no);
      out.push_back('\n');
    }
    if (!conds.empty()) fail(line_no, "unterminated #ifdef/#ifndef");
    res.text = std::move(out);
    return res;
  }

  void handle_directive(const std::string& rest, int line_no,
                        std::vector<std::pair<bool, bool>>& conds, bool currently_active,
                        Result& res) {
    std::size_t p = rest.find_first_not_of(" \t");
    if (p == std::string::npos) return;  // null directive
    std::size_t e = p;
    while (e < rest.size() && ident_char(rest[e])) ++e;
    const std::string word = rest.substr(p, e - p);
    const std::string tail = e < rest.size() ? rest.substr(e) : std::string();

    if (word == "ifdef" || word == "ifndef") {
      const std::string name = first_ident(tail);
      if (name.empty()) fail(line_no, "#" + word + " without a macro name");
      bool defined = macros_.count(name) > 0;
      bool taken = (word == "ifdef") ? defined : !defined;
      conds.emplace_back(currently_active, taken);
      return;
    }
    if (word == "else") {
      if (conds.empty()) fail(line_no, "#else without #ifdef");
      conds.back().second = !conds.back().second;
      return;
    }
    if (word == "endif") {
      if (conds.empty()) fail(line_no, "#endif without #ifdef");
      conds.pop_back();
      return;
    }
    if (!currently_active) return;  // other directives in dead branches are skipped

    if (word == "version") {
      std::size_t q = tail.find_first_not_of(" \t");
      res.version = q == std::string::npos ? "" : tail.substr(q);
      return;
    }
    if (word == "define") {
      parse_define(tail, line_no);
      return;
    }
    if (word == "undef") {
      macros_.erase(first_ident(tail));
      return;
    }
    if (word == "extension" || word == "pragma" || word == "line") return;
    fail(line_no, "unsupported preprocessor directive #" + word);
  }

  static std::string first_ident(const std::string& s) {
    std::size_t p = s.find_first_not_of(" \t");
    if (p == std::string::npos || !ident_start(s[p])) return "";
    std::size_t e = p;
    while (e < s.size() && ident_char(s[e])) ++e;
    return s.substr(p, e - p);
  }

  void parse_define(const std::string& tail, int line_no) {
    std::size_t p = tail.find_first_not_of(" \t");
    if (p == std::string::npos || !ident_start(tail[p])) fail(line_no, "malformed #define");
    std::size_t e = p;
    while (e < tail.size() && ident_char(tail[e])) ++e;
    Macro m;
    std::string name = tail.substr(p, e - p);
    if (e < tail.size() && tail[e] == '(') {
      m.function_like = true;
      ++e;
      std::string param;
      for (; e < tail.size(); ++e) {
        char c = tail[e];
        if (c == ')' || c == ',') {
          std::string trimmed = trim(param);
          if (!trimmed.empty()) m.params.push_back(trimmed);
          param.clear();
          if (c == ')') {
            ++e;
            break;
          }
        } else {
          param.push_back(c);
        }
      }
    }
    m.body = e < tail.size() ? trim(tail.substr(e)) : std::string();
    macros_[std::move(name)] = std::move(m);
  }

  static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  }

  std::string expand(const std::string& text, std::set<std::string>& guard, int depth,
                     int line_no) {
    if (depth > 64) fail(line_no, "macro expansion too deep");
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
      if (!ident_start(text[i])) {
        out.push_back(text[i]);
        ++i;
        continue;
      }
      std::size_t e = i;
      while (e < text.size() && ident_char(text[e])) ++e;
      const std::string word = text.substr(i, e - i);
      auto it = macros_.find(word);
      if (it == macros_.end() || guard.count(word)) {
        out += word;
        i = e;
        continue;
      }
      const Macro& m = it->second;
      if (!m.function_like) {
        guard.insert(word);
        out += expand(m.body, guard, depth + 1, line_no);
        guard.erase(word);
        i = e;
        continue;
      }
      // function-like: require '(' (otherwise leave the name untouched)
      std::size_t q = e;
      while (q < text.size() && (text[q] == ' ' || text[q] == '\t')) ++q;
      if (q >= text.size() || text[q] != '(') {
        out += word;
        i = e;
        continue;
      }
      std::vector<std::string> args;
      std::string arg;
      int par = 1;
      ++q;
      for (; q < text.size() && par > 0; ++q) {
        char c = text[q];
        if (c == '(') ++par;
        if (c == ')') {
          --par;
          if (par == 0) break;
        }
        if (c == ',' && par == 1) {
          args.push_back(trim(arg));
          arg.clear();
          continue;
        }
        arg.push_back(c);
      }
      if (par != 0) fail(line_no, "unterminated arguments for macro " + word);
      if (!trim(arg).empty() || !args.empty()) args.push_back(trim(arg));
      if (args.size() != m.params.size())
        fail(line_no, "macro " + word + " expects " + std::to_string(m.params.size()) +
                          " arguments, got " + std::to_string(args.size()));
      std::string body = substitute_params(m.body, m.params, args);
      guard.insert(word);
      out += expand(body, guard, depth + 1, line_no);
      guard.erase(word);
      i = q + 1;
    }
    return out;
  }

  static std::string substitute_params(const std::string& body,
                                       const std::vector<std::string>& params,
                                       const std::vector<std::string>& args) {
    std::string out;
    std::size_t i = 0;
    while (i < body.size()) {
      if (!ident_start(body[i])) {
        out.push_back(body[i]);
        ++i;
        continue;
      }
      std::size_t e = i;
      while (e < body.size() && ident_char(body[e])) ++e;
      const std::string word = body.substr(i, e - i);
      bool replaced = false;
      for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k] == word) {
          out += args[k];
          replaced = true;
          break;
        }
      }
      if (!replaced) out += word;
      i = e;
    }
    return out;
  }
};

}  // namespace procshade::glsl
