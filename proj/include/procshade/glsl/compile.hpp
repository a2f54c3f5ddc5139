#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "procshade/glsl/diag.hpp"
#include "procshade/glsl/ir.hpp"
#include "procshade/glsl/parser.hpp"
#include "procshade/glsl/preprocess.hpp"
#include "procshade/glsl/resolve.hpp"

namespace procshade::glsl {

struct Compiled {
  std::shared_ptr<const ShaderProgram> program;
  std::string version;  // from the #version directive, if present
};

// Full front end: preprocess, parse, resolve. Throws CompileFailure with a
// GL-style log on any error.
inline Compiled compile_shader(std::string_view source) {
  Preprocessor::Result pp = Preprocessor::run(source);
  ShaderProgram prog = Parser::parse(std::move(pp.text));
  Resolver::run(prog);
  Compiled out;
  out.program = std::make_shared<const ShaderProgram>(std::move(prog));
  out.version = std::move(pp.version);
  return out;
}

}  // namespace procshade::glsl
