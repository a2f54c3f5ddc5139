#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "procshade/core/error.hpp"
#include "procshade/core/image.hpp"

namespace procshade::render {

enum class Backend { Auto, Cpu, Gl };

inline const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Auto: return "auto";
    case Backend::Cpu: return "cpu";
    case Backend::Gl: return "gl";
  }
  return "?";
}

inline Backend parse_backend(const std::string& s) {
  if (s == "auto") return Backend::Auto;
  if (s == "cpu" || s == "software") return Backend::Cpu;
  if (s == "gl" || s == "gpu") return Backend::Gl;
  raise(Errc::InvalidArgument, "unknown backend '" + s + "'");
}

// A compiled shader, owned by the context that created it. Handles are
// confined to their creating worker; they are never shared across contexts.
class ProgramHandle {
 public:
  virtual ~ProgramHandle() = default;
  const std::string& compile_log() const { return log_; }

 protected:
  std::string log_;
};

struct ContextInfo {
  std::string backend;
  std::string device;
};

// Headless rendering context. Rendering is a pure function of
// (glsl, t, resolution) on a fixed context; throughput measurements always
// include readback to host memory.
class RenderContext {
 public:
  virtual ~RenderContext() = default;

  virtual ContextInfo info() const = 0;

  // Throws Error(CompileError) with the compile log on failure.
  virtual std::shared_ptr<ProgramHandle> compile(const std::string& glsl) = 0;

  // Full-viewport render with the time uniform set to `t`, read back to host
  // memory. Throws Error(RenderTimeout) when the frame exceeds the wall-clock
  // cap (runaway-shader guard).
  virtual Image render(ProgramHandle& handle, double t, int width, int height) = 0;

  void set_frame_timeout(std::chrono::milliseconds ms) { frame_timeout_ = ms; }
  std::chrono::milliseconds frame_timeout() const { return frame_timeout_; }

 protected:
  std::chrono::milliseconds frame_timeout_{2000};
};

}  // namespace procshade::render
