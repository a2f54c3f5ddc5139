#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "procshade/core/error.hpp"
#include "procshade/core/image.hpp"
#include "procshade/core/parallel.hpp"
#include "procshade/glsl/compile.hpp"
#include "procshade/glsl/eval.hpp"
#include "procshade/render/context.hpp"

namespace procshade::render {

// Software rasterizer: evaluates the fragment shader per pixel with the
// built-in GLSL interpreter. Always available, bit-deterministic on any host,
// which is what dedup and the determinism contracts rely on.
class CpuRenderContext final : public RenderContext {
 public:
  explicit CpuRenderContext(unsigned threads = 1) : threads_(std::max(1u, threads)) {}

  ContextInfo info() const override { return {"cpu", "glsl-interpreter"}; }

  class CpuHandle final : public ProgramHandle {
   public:
    explicit CpuHandle(glsl::Compiled compiled) : compiled_(std::move(compiled)) {}
    const glsl::ShaderProgram& program() const { return *compiled_.program; }

   private:
    glsl::Compiled compiled_;
  };

  std::shared_ptr<ProgramHandle> compile(const std::string& source) override {
    try {
      return std::make_shared<CpuHandle>(glsl::compile_shader(source));
    } catch (const glsl::CompileFailure& f) {
      raise(Errc::CompileError, f.log);
    }
  }

  Image render(ProgramHandle& handle, double t, int width, int height) override {
    if (width < 1 || height < 1) raise(Errc::InvalidArgument, "resolution must be >= 1x1");
    auto& cpu = dynamic_cast<CpuHandle&>(handle);
    const glsl::ShaderProgram& prog = cpu.program();

    Image img;
    img.width = width;
    img.height = height;
    img.t = t;
    img.pixels.resize(static_cast<std::size_t>(width) * height * 3);

    const auto deadline = std::chrono::steady_clock::now() + frame_timeout();
    std::atomic<bool> timed_out{false};
    std::string error_message;
    std::mutex error_mu;

    parallel_for(0, height, threads_, [&](std::int64_t y0, std::int64_t y1) {
      glsl::ShaderExec exec(prog);
      exec.set_uniform("time", {static_cast<float>(t)});
      exec.set_uniform("t", {static_cast<float>(t)});
      exec.set_uniform("resolution", {static_cast<float>(width), static_cast<float>(height)});
      exec.set_uniform("r", {static_cast<float>(width), static_cast<float>(height)});
      exec.set_deadline(deadline);
      try {
        for (std::int64_t y = y0; y < y1 && !timed_out.load(std::memory_order_relaxed); ++y) {
          // image row 0 is the top; gl_FragCoord has a bottom-left origin
          const float fy = static_cast<float>(height - 1 - y) + 0.5f;
          std::uint8_t* row = img.pixels.data() + static_cast<std::size_t>(y) * width * 3;
          for (int x = 0; x < width; ++x) {
            const auto rgb = exec.run_pixel_rgb8(static_cast<float>(x) + 0.5f, fy);
            row[x * 3] = rgb[0];
            row[x * 3 + 1] = rgb[1];
            row[x * 3 + 2] = rgb[2];
          }
        }
      } catch (const glsl::EvalTimeout&) {
        timed_out.store(true, std::memory_order_relaxed);
      } catch (const glsl::EvalRuntimeError& e) {
        timed_out.store(true, std::memory_order_relaxed);
        std::lock_guard<std::mutex> lock(error_mu);
        if (error_message.empty()) error_message = e.message;
      }
    });

    if (timed_out.load()) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!error_message.empty()) raise(Errc::DeviceLost, "shader fault: " + error_message);
      raise(Errc::RenderTimeout,
            "frame exceeded " + std::to_string(frame_timeout().count()) + " ms");
    }
    return img;
  }

 private:
  unsigned threads_;
};

}  // namespace procshade::render
