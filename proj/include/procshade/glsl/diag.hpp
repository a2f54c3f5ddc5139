#pragma once

#include <string>

namespace procshade::glsl {

// Internal compile-stage failure; carries the log text in the driver style
// "ERROR: 0:<line>: <message>". Converted to Error(Errc::CompileError) at the
// render-context boundary.
struct CompileFailure {
  std::string log;
};

[[noreturn]] inline void fail(int line, const std::string& msg) {
  throw CompileFailure{"ERROR: 0:" + std::to_string(line) + ": " + msg};
}

}  // namespace procshade::glsl
