#pragma once

#include <array>
#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "procshade/core/error.hpp"
#include "procshade/corpus/record.hpp"
#include "procshade/glsl/preprocess.hpp"

namespace procshade::corpus {

// All corpus shaders are normalized to one pinned GLSL version.
inline constexpr std::string_view kGlslVersionLine = "#version 330 core";

// Shadertoy inputs that need textures, audio, mouse or keyboard state. A
// source mentioning any of these identifiers is rejected at adaptation; the
// corpus only feeds shaders whose single stochastic input is the timestep.
inline const std::vector<std::string>& external_input_identifiers() {
  static const std::vector<std::string> kList = {
      "iChannel0", "iChannel1",    "iChannel2",          "iChannel3",
      "iMouse",    "iChannelTime", "iChannelResolution", "iSampleRate",
  };
  return kList;
}

namespace detail {

// Tolerant identifier scan over comment-stripped text; never throws, so it
// is safe on snippets that would not even lex.
inline std::vector<std::string> scan_identifiers(std::string_view source) {
  const std::string clean = glsl::Preprocessor::run_comment_strip(source);
  std::vector<std::string> words;
  std::size_t i = 0;
  auto start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto cont = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while (i < clean.size()) {
    if (!start(clean[i])) {
      ++i;
      continue;
    }
    std::size_t e = i;
    while (e < clean.size() && cont(clean[e])) ++e;
    words.emplace_back(clean.substr(i, e - i));
    i = e;
  }
  return words;
}

inline bool has_word_pair(const std::vector<std::string>& words, std::string_view first,
                          std::string_view second) {
  for (std::size_t i = 0; i + 1 < words.size(); ++i)
    if (words[i] == first && words[i + 1] == second) return true;
  return false;
}

// Drops any #version line: normalization pins its own.
inline std::string strip_version_directive(std::string_view source) {
  std::string out;
  out.reserve(source.size());
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t nl = source.find('\n', pos);
    std::string_view line =
        source.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    std::size_t p = line.find_first_not_of(" \t");
    bool is_version = false;
    if (p != std::string_view::npos && line[p] == '#') {
      std::size_t q = line.find_first_not_of(" \t", p + 1);
      if (q != std::string_view::npos && line.substr(q).starts_with("version")) is_version = true;
    }
    if (!is_version) {
      out += line;
      out += '\n';
    } else {
      out += '\n';  // keep line numbering
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  // trim the artificial trailing newline growth
  while (out.size() >= 2 && out[out.size() - 1] == '\n' && out[out.size() - 2] == '\n')
    out.pop_back();
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// TwiGL. The fixed abbreviation table (documented in the README):
//
//   time uniform            -> `t`   (alias uniform; `time` is also declared)
//   resolution uniform      -> `r`   (alias uniform; `resolution` also declared)
//   fragment coordinate     -> `FC`  (macro for gl_FragCoord)
//   output color variable   -> `o`   (declared out vec4)
//
// `t`, `r` and `o` are declarations rather than macros: object-like macros
// with those names would also rewrite swizzle members such as `.r` or `.t`.
// ---------------------------------------------------------------------------

inline std::string twigl_preamble() {
  std::string p;
  p += kGlslVersionLine;
  p +=
      "\n"
      "precision highp float;\n"
      "uniform float time;\n"
      "uniform vec2 resolution;\n"
      "uniform float t;\n"
      "uniform vec2 r;\n"
      "out vec4 o;\n"
      "#define FC gl_FragCoord\n"
      "#define gl_FragColor o\n";
  return p;
}

// Wraps a TwiGL-style body or expression sequence into a standalone fragment
// shader. Bodies that already define main are passed through with only the
// preamble prepended. No errors are reported here: anything the mapping table
// does not cover surfaces verbatim at validate time.
inline std::string transpile_twigl(std::string_view source) {
  const std::string body = detail::strip_version_directive(source);
  const auto words = detail::scan_identifiers(body);
  std::string out = twigl_preamble();
  if (detail::has_word_pair(words, "void", "main")) {
    out += body;
    if (out.empty() || out.back() != '\n') out += '\n';
    return out;
  }
  out += "void main() {\n";
  out += body;
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += "}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Shadertoy: standard OpenGL syntax with a mainImage entry point and iTime /
// iResolution style uniforms. Time-derived inputs are mapped onto the engine
// uniforms; external inputs are rejected.
// ---------------------------------------------------------------------------

inline std::string shadertoy_preamble() {
  std::string p;
  p += kGlslVersionLine;
  p +=
      "\n"
      "precision highp float;\n"
      "uniform float time;\n"
      "uniform vec2 resolution;\n"
      "out vec4 outColor;\n"
      "#define gl_FragColor outColor\n"
      "#define iTime time\n"
      "#define iGlobalTime time\n"
      "#define iResolution vec3(resolution, 1.0)\n"
      "#define iTimeDelta (0.25)\n"
      "#define iFrameRate (4.0)\n"
      "#define iFrame int(time * 4.0)\n"
      "#define iDate vec4(0.0, 0.0, 0.0, time)\n";
  return p;
}

inline std::string adapt_shadertoy(std::string_view source) {
  const std::string body = detail::strip_version_directive(source);
  const auto words = detail::scan_identifiers(body);

  std::vector<std::string> found;
  for (const std::string& bad : external_input_identifiers())
    for (const std::string& w : words)
      if (w == bad) {
        found.push_back(bad);
        break;
      }
  if (!found.empty()) {
    std::string list;
    for (const std::string& f : found) {
      if (!list.empty()) list += ", ";
      list += f;
    }
    raise(Errc::RequiresExternalInput, "source references external inputs: " + list);
  }

  bool has_main_image = false;
  for (std::size_t i = 0; i + 1 < words.size(); ++i)
    if (words[i] == "void" && words[i + 1] == "mainImage") has_main_image = true;
  if (!has_main_image)
    raise(Errc::MissingEntryPoint, "no 'void mainImage(out vec4, in vec2)' entry point found");

  std::string out = shadertoy_preamble();
  out += body;
  if (out.empty() || out.back() != '\n') out += '\n';
  if (!detail::has_word_pair(words, "void", "main")) {
    out +=
        "void main() {\n"
        "    vec4 psh_color = vec4(0.0);\n"
        "    mainImage(psh_color, gl_FragCoord.xy);\n"
        "    outColor = psh_color;\n"
        "}\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Raw GLSL fragment shaders: only the pinned preamble is prepended.
// ---------------------------------------------------------------------------

inline std::string raw_preamble() {
  std::string p;
  p += kGlslVersionLine;
  p +=
      "\n"
      "precision highp float;\n"
      "uniform float time;\n"
      "uniform vec2 resolution;\n"
      "out vec4 outColor;\n"
      "#define gl_FragColor outColor\n";
  return p;
}

inline std::string normalize_raw(std::string_view source) {
  std::string out = raw_preamble();
  out += detail::strip_version_directive(source);
  if (out.empty() || out.back() != '\n') out += '\n';
  return out;
}

// Deterministic: same source bytes produce byte-identical GLSL.
inline std::string normalize(std::string_view source, Dialect dialect) {
  switch (dialect) {
    case Dialect::Twigl: return transpile_twigl(source);
    case Dialect::Shadertoy: return adapt_shadertoy(source);
    case Dialect::RawGlsl: return normalize_raw(source);
  }
  raise(Errc::InvalidArgument, "bad dialect");
}

}  // namespace procshade::corpus
