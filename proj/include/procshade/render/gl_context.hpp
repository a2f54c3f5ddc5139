#pragma once

#include <dlfcn.h>

#include <cstdint>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "procshade/core/error.hpp"
#include "procshade/core/image.hpp"
#include "procshade/render/context.hpp"

namespace procshade::render {

// Headless OpenGL backend over EGL (surfaceless/pbuffer). EGL and GL entry
// points are loaded with dlopen/dlsym so the build carries no link-time GL
// dependency; on hosts without a usable EGL stack construction throws
// Error(ContextUnavailable) and callers fall back to the CPU backend.
class GlRenderContext final : public RenderContext {
  // Minimal EGL/GL declarations (headers are not assumed to be installed).
  using EGLDisplay = void*;
  using EGLConfig = void*;
  using EGLContext = void*;
  using EGLSurface = void*;
  using EGLBoolean = unsigned int;
  using EGLint = std::int32_t;
  using GLenum = std::uint32_t;
  using GLuint = std::uint32_t;
  using GLint = std::int32_t;
  using GLsizei = std::int32_t;
  using GLchar = char;
  using GLbitfield = std::uint32_t;
  using GLfloat = float;

  static constexpr EGLint EGL_SURFACE_TYPE = 0x3033, EGL_PBUFFER_BIT = 0x0001,
                          EGL_RENDERABLE_TYPE = 0x3040, EGL_OPENGL_BIT = 0x0008,
                          EGL_RED_SIZE = 0x3024, EGL_GREEN_SIZE = 0x3023, EGL_BLUE_SIZE = 0x3022,
                          EGL_NONE = 0x3038, EGL_OPENGL_API = 0x30A2, EGL_WIDTH = 0x3057,
                          EGL_HEIGHT = 0x3056, EGL_CONTEXT_MAJOR_VERSION = 0x3098,
                          EGL_CONTEXT_MINOR_VERSION = 0x30FB;
  static constexpr GLenum GL_FRAGMENT_SHADER = 0x8B30, GL_VERTEX_SHADER = 0x8B31,
                          GL_COMPILE_STATUS = 0x8B81, GL_LINK_STATUS = 0x8B82,
                          GL_FRAMEBUFFER = 0x8D40, GL_COLOR_ATTACHMENT0 = 0x8CE0,
                          GL_RENDERBUFFER = 0x8D41, GL_RGBA8 = 0x8058,
                          GL_FRAMEBUFFER_COMPLETE = 0x8CD5, GL_TRIANGLES = 0x0004,
                          GL_RGB = 0x1907, GL_UNSIGNED_BYTE = 0x1401, GL_PACK_ALIGNMENT = 0x0D05;
  static constexpr GLbitfield GL_COLOR_BUFFER_BIT = 0x4000;

 public:
  GlRenderContext() {
    egl_lib_ = dlopen("libEGL.so.1", RTLD_NOW | RTLD_LOCAL);
    if (!egl_lib_) egl_lib_ = dlopen("libEGL.so", RTLD_NOW | RTLD_LOCAL);
    if (!egl_lib_)
      raise(Errc::ContextUnavailable, "libEGL is not available on this host");
    load_egl();

    display_ = open_display();
    if (!display_) die("no EGL display");
    EGLint maj = 0, min = 0;
    if (!eglInitialize_(display_, &maj, &min)) die("eglInitialize failed");
    if (!eglBindAPI_(EGL_OPENGL_API)) die("eglBindAPI(OpenGL) failed");

    const EGLint cfg_attribs[] = {EGL_SURFACE_TYPE, EGL_PBUFFER_BIT,
                                  EGL_RENDERABLE_TYPE, EGL_OPENGL_BIT,
                                  EGL_RED_SIZE, 8, EGL_GREEN_SIZE, 8, EGL_BLUE_SIZE, 8,
                                  EGL_NONE};
    EGLConfig config = nullptr;
    EGLint n_configs = 0;
    if (!eglChooseConfig_(display_, cfg_attribs, &config, 1, &n_configs) || n_configs < 1)
      die("no usable EGLConfig");

    const EGLint ctx_attribs[] = {EGL_CONTEXT_MAJOR_VERSION, 3, EGL_CONTEXT_MINOR_VERSION, 3,
                                  EGL_NONE};
    context_ = eglCreateContext_(display_, config, nullptr, ctx_attribs);
    if (!context_) die("eglCreateContext(3.3) failed");

    const EGLint pbuf_attribs[] = {EGL_WIDTH, 16, EGL_HEIGHT, 16, EGL_NONE};
    surface_ = eglCreatePbufferSurface_(display_, config, pbuf_attribs);
    // surfaceless contexts are fine if pbuffers are unsupported
    if (!eglMakeCurrent_(display_, surface_, surface_, context_)) die("eglMakeCurrent failed");

    load_gl();
    glGenVertexArrays_(1, &vao_);
    glBindVertexArray_(vao_);
    glGenFramebuffers_(1, &fbo_);
    glGenRenderbuffers_(1, &rbo_);
    vertex_shader_ = build_vertex_shader();
  }

  ~GlRenderContext() override {
    if (display_) {
      if (eglMakeCurrent_) eglMakeCurrent_(display_, nullptr, nullptr, nullptr);
      if (context_ && eglDestroyContext_) eglDestroyContext_(display_, context_);
      if (surface_ && eglDestroySurface_) eglDestroySurface_(display_, surface_);
      if (eglTerminate_) eglTerminate_(display_);
    }
    if (egl_lib_) dlclose(egl_lib_);
    if (gl_lib_) dlclose(gl_lib_);
  }

  ContextInfo info() const override { return {"gl", device_}; }

  class GlHandle final : public ProgramHandle {
   public:
    GLuint program = 0;
    GLint loc_time = -1, loc_t = -1, loc_resolution = -1, loc_r = -1;
  };

  std::shared_ptr<ProgramHandle> compile(const std::string& glsl) override {
    GLuint fs = glCreateShader_(GL_FRAGMENT_SHADER);
    const GLchar* src = glsl.c_str();
    glShaderSource_(fs, 1, &src, nullptr);
    glCompileShader_(fs);
    GLint ok = 0;
    glGetShaderiv_(fs, GL_COMPILE_STATUS, &ok);
    if (!ok) {
      std::string log = shader_log(fs);
      glDeleteShader_(fs);
      raise(Errc::CompileError, log.empty() ? "shader compile failed" : log);
    }
    GLuint prog = glCreateProgram_();
    glAttachShader_(prog, vertex_shader_);
    glAttachShader_(prog, fs);
    glLinkProgram_(prog);
    glDeleteShader_(fs);
    glGetProgramiv_(prog, GL_LINK_STATUS, &ok);
    if (!ok) {
      std::string log = program_log(prog);
      glDeleteProgram_(prog);
      raise(Errc::CompileError, log.empty() ? "program link failed" : log);
    }
    auto handle = std::make_shared<GlHandle>();
    handle->program = prog;
    handle->loc_time = glGetUniformLocation_(prog, "time");
    handle->loc_t = glGetUniformLocation_(prog, "t");
    handle->loc_resolution = glGetUniformLocation_(prog, "resolution");
    handle->loc_r = glGetUniformLocation_(prog, "r");
    return handle;
  }

  Image render(ProgramHandle& handle, double t, int width, int height) override {
    auto& gh = dynamic_cast<GlHandle&>(handle);
    ensure_target(width, height);
    glUseProgram_(gh.program);
    const GLfloat ft = static_cast<GLfloat>(t);
    if (gh.loc_time >= 0) glUniform1f_(gh.loc_time, ft);
    if (gh.loc_t >= 0) glUniform1f_(gh.loc_t, ft);
    if (gh.loc_resolution >= 0)
      glUniform2f_(gh.loc_resolution, static_cast<GLfloat>(width), static_cast<GLfloat>(height));
    if (gh.loc_r >= 0)
      glUniform2f_(gh.loc_r, static_cast<GLfloat>(width), static_cast<GLfloat>(height));
    glViewport_(0, 0, width, height);
    glClearColor_(0, 0, 0, 1);
    glClear_(GL_COLOR_BUFFER_BIT);
    glDrawArrays_(GL_TRIANGLES, 0, 3);

    std::vector<std::uint8_t> bottom_up(static_cast<std::size_t>(width) * height * 3);
    glPixelStorei_(GL_PACK_ALIGNMENT, 1);
    glReadPixels_(0, 0, width, height, GL_RGB, GL_UNSIGNED_BYTE, bottom_up.data());

    Image img;
    img.width = width;
    img.height = height;
    img.t = t;
    img.pixels.resize(bottom_up.size());
    const std::size_t stride = static_cast<std::size_t>(width) * 3;
    for (int y = 0; y < height; ++y)
      std::copy_n(bottom_up.data() + static_cast<std::size_t>(height - 1 - y) * stride, stride,
                  img.pixels.data() + static_cast<std::size_t>(y) * stride);
    return img;
  }

 private:
  void* egl_lib_ = nullptr;
  void* gl_lib_ = nullptr;
  EGLDisplay display_ = nullptr;
  EGLContext context_ = nullptr;
  EGLSurface surface_ = nullptr;
  std::string device_ = "egl";
  GLuint vao_ = 0, fbo_ = 0, rbo_ = 0, vertex_shader_ = 0;
  int target_w_ = 0, target_h_ = 0;

  [[noreturn]] void die(const std::string& msg) {
    raise(Errc::ContextUnavailable, msg);
  }

  template <typename T>
  T egl_sym(const char* name, bool required = true) {
    T fn = reinterpret_cast<T>(dlsym(egl_lib_, name));
    if (!fn && required) die(std::string("missing EGL symbol ") + name);
    return fn;
  }

  using Proc = void (*)();
  Proc gl_proc(const char* name) {
    Proc p = eglGetProcAddress_ ? eglGetProcAddress_(name) : nullptr;
    if (!p && gl_lib_) p = reinterpret_cast<Proc>(dlsym(gl_lib_, name));
    if (!p) die(std::string("missing GL symbol ") + name);
    return p;
  }

  // EGL entry points
  EGLDisplay (*eglGetDisplay_)(void*) = nullptr;
  EGLBoolean (*eglInitialize_)(EGLDisplay, EGLint*, EGLint*) = nullptr;
  EGLBoolean (*eglBindAPI_)(EGLint) = nullptr;
  EGLBoolean (*eglChooseConfig_)(EGLDisplay, const EGLint*, EGLConfig*, EGLint, EGLint*) = nullptr;
  EGLContext (*eglCreateContext_)(EGLDisplay, EGLConfig, EGLContext, const EGLint*) = nullptr;
  EGLSurface (*eglCreatePbufferSurface_)(EGLDisplay, EGLConfig, const EGLint*) = nullptr;
  EGLBoolean (*eglMakeCurrent_)(EGLDisplay, EGLSurface, EGLSurface, EGLContext) = nullptr;
  EGLBoolean (*eglDestroyContext_)(EGLDisplay, EGLContext) = nullptr;
  EGLBoolean (*eglDestroySurface_)(EGLDisplay, EGLSurface) = nullptr;
  EGLBoolean (*eglTerminate_)(EGLDisplay) = nullptr;
  Proc (*eglGetProcAddress_)(const char*) = nullptr;
  const char* (*eglQueryString_)(EGLDisplay, EGLint) = nullptr;

  // PROCSHADE_GL_DEVICE=<index> pins a specific EGL device (headless multi-GPU
  // hosts); without it the default display is used.
  EGLDisplay open_display() {
    const char* device_env = std::getenv("PROCSHADE_GL_DEVICE");
    if (device_env && eglGetProcAddress_) {
      using QueryDevices = EGLBoolean (*)(EGLint, void**, EGLint*);
      using GetPlatformDisplay = EGLDisplay (*)(EGLint, void*, const EGLint*);
      auto query = reinterpret_cast<QueryDevices>(eglGetProcAddress_("eglQueryDevicesEXT"));
      auto get_display = reinterpret_cast<GetPlatformDisplay>(
          eglGetProcAddress_("eglGetPlatformDisplayEXT"));
      if (query && get_display) {
        void* devices[16] = {};
        EGLint n = 0;
        if (query(16, devices, &n) && n > 0) {
          const int want = std::atoi(device_env);
          if (want < 0 || want >= n)
            die("PROCSHADE_GL_DEVICE=" + std::string(device_env) + " but only " +
                std::to_string(n) + " EGL devices exist");
          constexpr EGLint EGL_PLATFORM_DEVICE_EXT = 0x313F;
          EGLDisplay dpy = get_display(EGL_PLATFORM_DEVICE_EXT, devices[want], nullptr);
          if (dpy) return dpy;
        }
      }
      die("PROCSHADE_GL_DEVICE set but EGL device enumeration is unavailable");
    }
    return eglGetDisplay_(nullptr /* EGL_DEFAULT_DISPLAY */);
  }

  void load_egl() {
    eglGetDisplay_ = egl_sym<decltype(eglGetDisplay_)>("eglGetDisplay");
    eglInitialize_ = egl_sym<decltype(eglInitialize_)>("eglInitialize");
    eglBindAPI_ = egl_sym<decltype(eglBindAPI_)>("eglBindAPI");
    eglChooseConfig_ = egl_sym<decltype(eglChooseConfig_)>("eglChooseConfig");
    eglCreateContext_ = egl_sym<decltype(eglCreateContext_)>("eglCreateContext");
    eglCreatePbufferSurface_ =
        egl_sym<decltype(eglCreatePbufferSurface_)>("eglCreatePbufferSurface");
    eglMakeCurrent_ = egl_sym<decltype(eglMakeCurrent_)>("eglMakeCurrent");
    eglDestroyContext_ = egl_sym<decltype(eglDestroyContext_)>("eglDestroyContext");
    eglDestroySurface_ = egl_sym<decltype(eglDestroySurface_)>("eglDestroySurface");
    eglTerminate_ = egl_sym<decltype(eglTerminate_)>("eglTerminate");
    eglGetProcAddress_ = egl_sym<decltype(eglGetProcAddress_)>("eglGetProcAddress");
    eglQueryString_ = egl_sym<decltype(eglQueryString_)>("eglQueryString", false);
  }

  // GL entry points
  GLuint (*glCreateShader_)(GLenum) = nullptr;
  void (*glShaderSource_)(GLuint, GLsizei, const GLchar* const*, const GLint*) = nullptr;
  void (*glCompileShader_)(GLuint) = nullptr;
  void (*glGetShaderiv_)(GLuint, GLenum, GLint*) = nullptr;
  void (*glGetShaderInfoLog_)(GLuint, GLsizei, GLsizei*, GLchar*) = nullptr;
  void (*glDeleteShader_)(GLuint) = nullptr;
  GLuint (*glCreateProgram_)() = nullptr;
  void (*glAttachShader_)(GLuint, GLuint) = nullptr;
  void (*glLinkProgram_)(GLuint) = nullptr;
  void (*glGetProgramiv_)(GLuint, GLenum, GLint*) = nullptr;
  void (*glGetProgramInfoLog_)(GLuint, GLsizei, GLsizei*, GLchar*) = nullptr;
  void (*glDeleteProgram_)(GLuint) = nullptr;
  void (*glUseProgram_)(GLuint) = nullptr;
  GLint (*glGetUniformLocation_)(GLuint, const GLchar*) = nullptr;
  void (*glUniform1f_)(GLint, GLfloat) = nullptr;
  void (*glUniform2f_)(GLint, GLfloat, GLfloat) = nullptr;
  void (*glGenVertexArrays_)(GLsizei, GLuint*) = nullptr;
  void (*glBindVertexArray_)(GLuint) = nullptr;
  void (*glGenFramebuffers_)(GLsizei, GLuint*) = nullptr;
  void (*glBindFramebuffer_)(GLenum, GLuint) = nullptr;
  void (*glGenRenderbuffers_)(GLsizei, GLuint*) = nullptr;
  void (*glBindRenderbuffer_)(GLenum, GLuint) = nullptr;
  void (*glRenderbufferStorage_)(GLenum, GLenum, GLsizei, GLsizei) = nullptr;
  void (*glFramebufferRenderbuffer_)(GLenum, GLenum, GLenum, GLuint) = nullptr;
  GLenum (*glCheckFramebufferStatus_)(GLenum) = nullptr;
  void (*glViewport_)(GLint, GLint, GLsizei, GLsizei) = nullptr;
  void (*glClearColor_)(GLfloat, GLfloat, GLfloat, GLfloat) = nullptr;
  void (*glClear_)(GLbitfield) = nullptr;
  void (*glDrawArrays_)(GLenum, GLint, GLsizei) = nullptr;
  void (*glPixelStorei_)(GLenum, GLint) = nullptr;
  void (*glReadPixels_)(GLint, GLint, GLsizei, GLsizei, GLenum, GLenum, void*) = nullptr;
  const std::uint8_t* (*glGetString_)(GLenum) = nullptr;

  void load_gl() {
    gl_lib_ = dlopen("libOpenGL.so.0", RTLD_NOW | RTLD_LOCAL);
    if (!gl_lib_) gl_lib_ = dlopen("libGL.so.1", RTLD_NOW | RTLD_LOCAL);
#define PS_LOAD(name) name##_ = reinterpret_cast<decltype(name##_)>(gl_proc(#name))
    PS_LOAD(glCreateShader);
    PS_LOAD(glShaderSource);
    PS_LOAD(glCompileShader);
    PS_LOAD(glGetShaderiv);
    PS_LOAD(glGetShaderInfoLog);
    PS_LOAD(glDeleteShader);
    PS_LOAD(glCreateProgram);
    PS_LOAD(glAttachShader);
    PS_LOAD(glLinkProgram);
    PS_LOAD(glGetProgramiv);
    PS_LOAD(glGetProgramInfoLog);
    PS_LOAD(glDeleteProgram);
    PS_LOAD(glUseProgram);
    PS_LOAD(glGetUniformLocation);
    PS_LOAD(glUniform1f);
    PS_LOAD(glUniform2f);
    PS_LOAD(glGenVertexArrays);
    PS_LOAD(glBindVertexArray);
    PS_LOAD(glGenFramebuffers);
    PS_LOAD(glBindFramebuffer);
    PS_LOAD(glGenRenderbuffers);
    PS_LOAD(glBindRenderbuffer);
    PS_LOAD(glRenderbufferStorage);
    PS_LOAD(glFramebufferRenderbuffer);
    PS_LOAD(glCheckFramebufferStatus);
    PS_LOAD(glViewport);
    PS_LOAD(glClearColor);
    PS_LOAD(glClear);
    PS_LOAD(glDrawArrays);
    PS_LOAD(glPixelStorei);
    PS_LOAD(glReadPixels);
    PS_LOAD(glGetString);
#undef PS_LOAD
    if (glGetString_) {
      const std::uint8_t* renderer = glGetString_(0x1F01 /* GL_RENDERER */);
      if (renderer) device_ = reinterpret_cast<const char*>(renderer);
    }
  }

  std::string shader_log(GLuint shader) {
    GLint len = 0;
    glGetShaderiv_(shader, 0x8B84 /* GL_INFO_LOG_LENGTH */, &len);
    std::string log(static_cast<std::size_t>(std::max(len, 1)), '\0');
    GLsizei written = 0;
    glGetShaderInfoLog_(shader, len, &written, log.data());
    log.resize(static_cast<std::size_t>(std::max(written, 0)));
    return log;
  }

  std::string program_log(GLuint prog) {
    GLint len = 0;
    glGetProgramiv_(prog, 0x8B84, &len);
    std::string log(static_cast<std::size_t>(std::max(len, 1)), '\0');
    GLsizei written = 0;
    glGetProgramInfoLog_(prog, len, &written, log.data());
    log.resize(static_cast<std::size_t>(std::max(written, 0)));
    return log;
  }

  GLuint build_vertex_shader() {
    static const char* kSrc =
        "#version 330 core\n"
        "void main() {\n"
        "  vec2 p = vec2(float((gl_VertexID << 1) & 2), float(gl_VertexID & 2));\n"
        "  gl_Position = vec4(p * 2.0 - 1.0, 0.0, 1.0);\n"
        "}\n";
    GLuint vs = glCreateShader_(GL_VERTEX_SHADER);
    glShaderSource_(vs, 1, &kSrc, nullptr);
    glCompileShader_(vs);
    GLint ok = 0;
    glGetShaderiv_(vs, GL_COMPILE_STATUS, &ok);
    if (!ok) die("internal vertex shader failed to compile: " + shader_log(vs));
    return vs;
  }

  void ensure_target(int w, int h) {
    if (w == target_w_ && h == target_h_) {
      glBindFramebuffer_(GL_FRAMEBUFFER, fbo_);
      return;
    }
    glBindRenderbuffer_(GL_RENDERBUFFER, rbo_);
    glRenderbufferStorage_(GL_RENDERBUFFER, GL_RGBA8, w, h);
    glBindFramebuffer_(GL_FRAMEBUFFER, fbo_);
    glFramebufferRenderbuffer_(GL_FRAMEBUFFER, GL_COLOR_ATTACHMENT0, GL_RENDERBUFFER, rbo_);
    if (glCheckFramebufferStatus_(GL_FRAMEBUFFER) != GL_FRAMEBUFFER_COMPLETE)
      raise(Errc::DeviceLost, "framebuffer incomplete");
    target_w_ = w;
    target_h_ = h;
  }
};

}  // namespace procshade::render
