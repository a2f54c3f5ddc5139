#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "procshade/core/error.hpp"
#include "procshade/core/hash.hpp"
#include "procshade/core/image.hpp"
#include "procshade/core/parallel.hpp"
#include "procshade/render/context.hpp"
#include "procshade/render/cpu_context.hpp"
#include "procshade/render/gl_context.hpp"
#include "procshade/render/timesteps.hpp"

namespace procshade::render {

inline std::unique_ptr<RenderContext> make_context(Backend backend, unsigned cpu_threads = 1) {
  switch (backend) {
    case Backend::Cpu:
      return std::make_unique<CpuRenderContext>(cpu_threads);
    case Backend::Gl:
      return std::make_unique<GlRenderContext>();
    case Backend::Auto:
      try {
        return std::make_unique<GlRenderContext>();
      } catch (const Error& e) {
        if (e.code() != Errc::ContextUnavailable) throw;
        return std::make_unique<CpuRenderContext>(cpu_threads);
      }
  }
  raise(Errc::InvalidArgument, "bad backend");
}

struct EngineOptions {
  Backend backend = Backend::Auto;
  unsigned workers = 0;  // 0 = pick from hardware
  std::chrono::milliseconds frame_timeout{2000};
};

// Pool of context-owning workers consuming a shared FIFO job queue. Each
// worker keeps its own GL/CPU context and a small LRU of compiled programs;
// handles never cross workers. Results are deterministic regardless of how
// jobs land on workers.
class RenderEngine {
 public:
  struct Worker {
    std::unique_ptr<RenderContext> ctx;

    std::shared_ptr<ProgramHandle> program(const std::string& glsl) {
      const std::string key = sha256_hex(glsl);
      auto it = cache_index.find(key);
      if (it != cache_index.end()) {
        cache.splice(cache.begin(), cache, it->second);
        return cache.front().second;
      }
      std::shared_ptr<ProgramHandle> handle = ctx->compile(glsl);
      cache.emplace_front(key, handle);
      cache_index[key] = cache.begin();
      if (cache.size() > kCacheCapacity) {
        cache_index.erase(cache.back().first);
        cache.pop_back();
      }
      return handle;
    }

   private:
    static constexpr std::size_t kCacheCapacity = 256;
    std::list<std::pair<std::string, std::shared_ptr<ProgramHandle>>> cache;
    std::unordered_map<std::string,
                       std::list<std::pair<std::string, std::shared_ptr<ProgramHandle>>>::iterator>
        cache_index;
  };

  explicit RenderEngine(EngineOptions opt = {}) {
    const unsigned hw = default_worker_count();
    unsigned n = opt.workers ? opt.workers : std::min(hw, 8u);

    Backend resolved = opt.backend;
    std::vector<std::unique_ptr<RenderContext>> contexts;
    if (resolved == Backend::Auto) {
      try {
        contexts.push_back(std::make_unique<GlRenderContext>());
        resolved = Backend::Gl;
      } catch (const Error& e) {
        if (e.code() != Errc::ContextUnavailable) throw;
        resolved = Backend::Cpu;
      }
    }
    backend_ = resolved;
    const unsigned cpu_threads = std::max(1u, hw / std::max(1u, n));
    while (contexts.size() < n)
      contexts.push_back(make_context(resolved, resolved == Backend::Cpu ? cpu_threads : 1));
    for (auto& ctx : contexts) {
      ctx->set_frame_timeout(opt.frame_timeout);
      auto w = std::make_unique<Worker>();
      w->ctx = std::move(ctx);
      workers_.push_back(std::move(w));
    }
    for (unsigned i = 0; i < workers_.size(); ++i)
      threads_.emplace_back([this, i] { worker_loop(*workers_[i]); });
  }

  ~RenderEngine() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  RenderEngine(const RenderEngine&) = delete;
  RenderEngine& operator=(const RenderEngine&) = delete;

  unsigned worker_count() const { return static_cast<unsigned>(workers_.size()); }
  Backend backend() const { return backend_; }
  ContextInfo context_info() const { return workers_.front()->ctx->info(); }

  template <typename F>
  auto submit(F f) -> std::future<std::invoke_result_t<F, Worker&>> {
    using R = std::invoke_result_t<F, Worker&>;
    auto prom = std::make_shared<std::promise<R>>();
    auto fut = prom->get_future();
    enqueue([prom, f = std::move(f)](Worker& w) mutable {
      try {
        if constexpr (std::is_void_v<R>) {
          f(w);
          prom->set_value();
        } else {
          prom->set_value(f(w));
        }
      } catch (...) {
        prom->set_exception(std::current_exception());
      }
    });
    return fut;
  }

  // --- convenience operations -------------------------------------------------

  Image render_one(const std::string& glsl, const std::string& shader_id, double t, int width,
                   int height) {
    auto fut = submit([=](Worker& w) {
      Image img = w.ctx->render(*w.program(glsl), t, width, height);
      img.shader_id = shader_id;
      return img;
    });
    return fut.get();
  }

  ImageBatch render_batch(const std::string& glsl, const std::string& shader_id,
                          const RenderSpec& spec) {
    spec.validate();
    return render_batch(glsl, shader_id, spec.timesteps, spec.width, spec.height);
  }

  // Concatenation of render_one over plan.values, order-preserving.
  ImageBatch render_batch(const std::string& glsl, const std::string& shader_id,
                          const TimestepPlan& plan, int width, int height) {
    std::vector<std::future<Image>> futs;
    futs.reserve(plan.values.size());
    for (double t : plan.values) {
      futs.push_back(submit([=](Worker& w) {
        Image img = w.ctx->render(*w.program(glsl), t, width, height);
        img.shader_id = shader_id;
        return img;
      }));
    }
    ImageBatch batch;
    batch.reserve(futs.size());
    for (auto& f : futs) batch.push_back(f.get());
    return batch;
  }

  // Wall-clock frames/second over n frames, readback included. Runs on a
  // single worker so the figure reflects one context end to end.
  double measure_fps(const std::string& glsl, int n, int width, int height,
                     double base_rate = kDefaultFrameRate) {
    if (n == 0) raise(Errc::ZeroCount, "measure_fps requires frames");
    if (n < 10) raise(Errc::BadParameter, "measure_fps requires n >= 10 frames");
    auto fut = submit([=](Worker& w) {
      auto handle = w.program(glsl);
      const auto start = std::chrono::steady_clock::now();
      std::size_t consumed = 0;
      for (int k = 0; k < n; ++k) {
        Image img = w.ctx->render(*handle, static_cast<double>(k) / base_rate, width, height);
        consumed += img.pixels.size();  // readback landed in host memory
      }
      const std::chrono::duration<double> secs = std::chrono::steady_clock::now() - start;
      (void)consumed;
      return static_cast<double>(n) / secs.count();
    });
    return fut.get();
  }

 private:
  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<std::thread> threads_;
  std::deque<std::function<void(Worker&)>> queue_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
  Backend backend_ = Backend::Cpu;

  void enqueue(std::function<void(Worker&)> job) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (stopping_) raise(Errc::InvalidArgument, "engine is shutting down");
      queue_.push_back(std::move(job));
    }
    cv_.notify_one();
  }

  void worker_loop(Worker& w) {
    for (;;) {
      std::function<void(Worker&)> job;
      {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;  // stopping
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      job(w);
    }
  }
};

}  // namespace procshade::render
