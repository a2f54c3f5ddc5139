#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "procshade/core/error.hpp"
#include "procshade/core/jpeg.hpp"
#include "procshade/corpus/manifest.hpp"
#include "procshade/mix/dataset.hpp"
#include "procshade/render/engine.hpp"
#include "procshade/stream/wire.hpp"

namespace procshade::stream {

// Deterministic batch-generation server: each BatchRequest is answered with a
// response that is a pure function of (manifest, request). Request RNG
// streams derive from the request's own seed, so responses are independent of
// concurrent load. Rendering fans out to the engine's FIFO worker pool.
struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 = ephemeral
  int max_inflight_per_connection = 2;
  std::uint32_t max_count_per_request = 65536;
};

class StreamServer {
 public:
  using Options = ServerOptions;

  StreamServer(const corpus::CorpusManifest& manifest, render::RenderEngine& engine,
               Options options = {})
      : manifest_(manifest), engine_(engine), options_(std::move(options)) {
    pool_ = mix::sampling_pool(manifest_);
    if (pool_.empty())
      raise(Errc::InsufficientPrograms, "manifest has no unique non-static compiled programs");
  }

  ~StreamServer() { stop(); }

  void start() {
    listener_ = listen_tcp(options_.host, options_.port);
    started_at_ = std::chrono::steady_clock::now();
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  std::uint16_t port() const { return listener_.port; }

  void stop() {
    bool expected = false;
    if (!stopping_.compare_exchange_strong(expected, true)) return;
    listener_.sock.shutdown_both();
    listener_.sock.close_fd();
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::shared_ptr<Conn>> conns;
    {
      std::lock_guard<std::mutex> lock(conns_mu_);
      conns = conns_;
    }
    for (auto& c : conns) c->sock.shutdown_both();
    // connection threads are detached; render jobs capture `this`
    while (active_connections_.load() > 0 || outstanding_jobs_.load() > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    std::lock_guard<std::mutex> lock(conns_mu_);
    conns_.clear();
  }

  std::uint64_t images_served() const { return images_served_.load(); }

 private:
  struct Conn {
    Socket sock;
    std::mutex mu;
    std::map<std::uint64_t, std::vector<std::uint8_t>> ready;
    std::uint64_t next_write_seq = 0;
    std::atomic<int> inflight{0};
    std::atomic<bool> dead{false};

    // Frames leave in request order regardless of render completion order.
    void deliver(std::uint64_t seq, std::vector<std::uint8_t> frame) {
      std::lock_guard<std::mutex> lock(mu);
      ready[seq] = std::move(frame);
      while (!ready.empty() && ready.begin()->first == next_write_seq) {
        auto bytes = std::move(ready.begin()->second);
        ready.erase(ready.begin());
        ++next_write_seq;
        if (!dead.load()) {
          try {
            write_all(sock.fd(), bytes.data(), bytes.size());
          } catch (const Error&) {
            dead.store(true);
          }
        }
      }
    }
  };

  const corpus::CorpusManifest& manifest_;
  render::RenderEngine& engine_;
  Options options_;
  std::vector<mix::PoolEntry> pool_;
  Listener listener_;
  std::thread accept_thread_;
  std::vector<std::shared_ptr<Conn>> conns_;
  std::mutex conns_mu_;
  std::atomic<bool> stopping_{false};
  std::atomic<int> active_connections_{0};
  std::atomic<int> outstanding_jobs_{0};
  std::atomic<std::uint64_t> images_served_{0};
  std::chrono::steady_clock::time_point started_at_{};

  // requests are small fixed-layout messages; refuse anything oversized
  static constexpr std::uint64_t kMaxRequestBody = 1 << 20;

  void accept_loop() {
    for (;;) {
      const int fd = ::accept(listener_.sock.fd(), nullptr, nullptr);
      if (fd < 0) {
        if (stopping_.load()) return;
        continue;
      }
      auto conn = std::make_shared<Conn>();
      conn->sock = Socket(fd);
      {
        std::lock_guard<std::mutex> lock(conns_mu_);
        if (stopping_.load()) return;
        conns_.push_back(conn);
      }
      active_connections_.fetch_add(1);
      std::thread([this, conn] {
        connection_loop(conn);
        active_connections_.fetch_sub(1);
      }).detach();
    }
  }

  void send_error(const std::shared_ptr<Conn>& conn, std::uint64_t seq, WireError code,
                  const std::string& message) {
    ErrorWire err;
    err.code = static_cast<std::uint32_t>(code);
    err.message = message;
    conn->deliver(seq, make_frame(MsgType::Error, err.encode()));
  }

  void connection_loop(std::shared_ptr<Conn> conn) {
    std::uint64_t next_seq = 0;
    try {
      for (;;) {
        std::uint8_t header_bytes[kFrameHeaderSize];
        if (!read_exact(conn->sock.fd(), header_bytes, kFrameHeaderSize, true)) break;
        const FrameHeader header = parse_frame_header(header_bytes);
        if (!header.magic_ok) {
          send_error(conn, next_seq++, WireError::BadMagic, "bad magic");
          break;
        }
        if (header.version != kProtocolVersion) {
          // rejected before any image transfer
          send_error(conn, next_seq++, WireError::VersionMismatch,
                     "server speaks protocol version " + std::to_string(kProtocolVersion));
          break;
        }
        if (header.body_len > kMaxRequestBody) {
          send_error(conn, next_seq++, WireError::Malformed, "body too large");
          break;
        }
        std::vector<std::uint8_t> body(header.body_len);
        if (header.body_len) read_exact(conn->sock.fd(), body.data(), body.size());

        if (header.type == MsgType::CounterRequest) {
          conn->deliver(next_seq++, make_frame(MsgType::CounterResponse, counter_body()));
          continue;
        }
        if (header.type != MsgType::BatchRequest) {
          send_error(conn, next_seq++, WireError::BadType, "unexpected message type");
          break;
        }
        BatchRequestWire req;
        if (!BatchRequestWire::decode(body, req)) {
          send_error(conn, next_seq++, WireError::Malformed, "batch request must be 40 bytes");
          break;
        }
        const std::uint64_t seq = next_seq++;
        // backpressure: bounded in-flight requests per connection
        if (conn->inflight.load() >= options_.max_inflight_per_connection) {
          BatchResponseWire busy;
          busy.status = static_cast<std::uint32_t>(BatchStatus::Busy);
          busy.message = "connection has " +
                         std::to_string(options_.max_inflight_per_connection) +
                         " requests in flight";
          conn->deliver(seq, make_frame(MsgType::BatchResponse, busy.encode()));
          continue;
        }
        conn->inflight.fetch_add(1);
        outstanding_jobs_.fetch_add(1);
        engine_.submit([this, conn, seq, req](render::RenderEngine::Worker& w) {
          BatchResponseWire resp = handle_batch(req, w);
          if (resp.status == static_cast<std::uint32_t>(BatchStatus::Ok))
            images_served_.fetch_add(resp.images.size());
          conn->deliver(seq, make_frame(MsgType::BatchResponse, resp.encode()));
          conn->inflight.fetch_sub(1);
          outstanding_jobs_.fetch_sub(1);
        });
      }
    } catch (const Error&) {
      // connection dropped; outstanding jobs see conn->dead and discard writes
      conn->dead.store(true);
    } catch (...) {
      conn->dead.store(true);
    }
    // flush queued responses for admitted requests, then signal EOF
    while (conn->inflight.load() > 0 && !conn->dead.load())
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    conn->sock.shutdown_both();
    std::lock_guard<std::mutex> lock(conns_mu_);
    std::erase(conns_, conn);
  }

  std::vector<std::uint8_t> counter_body() const {
    CounterResponseWire c;
    c.images_served = images_served_.load();
    c.uptime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_at_).count();
    c.mean_images_per_sec =
        c.uptime_seconds > 0 ? static_cast<double>(c.images_served) / c.uptime_seconds : 0.0;
    return c.encode();
  }

  BatchResponseWire handle_batch(const BatchRequestWire& req, render::RenderEngine::Worker& w) {
    BatchResponseWire resp;
    auto bad = [&](const std::string& msg) {
      resp.status = static_cast<std::uint32_t>(BatchStatus::BadRequest);
      resp.message = msg;
      resp.images.clear();
      return resp;
    };
    if (req.count < 1) return bad("count must be >= 1");
    if (req.count > options_.max_count_per_request)
      return bad("count exceeds server limit of " +
                 std::to_string(options_.max_count_per_request));
    if (req.width < 1 || req.height < 1) return bad("resolution must be >= 1x1");
    if (req.mix_mode > 2) return bad("unknown mix mode");
    if (req.encoding > 1) return bad("unknown encoding");
    if (req.encoding == static_cast<std::uint8_t>(Encoding::Jpeg) &&
        (req.jpeg_quality < 1 || req.jpeg_quality > 100))
      return bad("jpeg quality must be in [1,100]");

    mix::MixSpec spec;
    spec.mode = static_cast<mix::MixMode>(req.mix_mode);
    spec.n = static_cast<int>(req.mix_n);
    spec.alpha = req.alpha;
    spec.seed = req.seed;
    try {
      spec.validate();
    } catch (const Error& e) {
      return bad(e.message());
    }
    if (pool_.size() < static_cast<std::size_t>(spec.n))
      return bad("manifest has only " + std::to_string(pool_.size()) +
                 " unique non-static programs, need " + std::to_string(spec.n));

    const mix::RenderFn render = [&w, &req](const mix::PoolEntry& entry, double t) {
      return w.ctx->render(*w.program(*entry.glsl), t, static_cast<int>(req.width),
                           static_cast<int>(req.height));
    };
    try {
      for (std::uint32_t i = 0; i < req.count; ++i) {
        mix::MixedSample sample =
            mix::synthesize_sample(pool_, spec, static_cast<int>(req.width),
                                   static_cast<int>(req.height), req.seed, i, render);
        WireImage img;
        for (const mix::SourceRef& s : sample.sources) {
          WireSource ws;
          ws.id = s.shader_id;
          ws.t = s.t;
          ws.has_rect = s.has_rect;
          ws.weight = s.weight;
          for (int k = 0; k < 4; ++k) ws.rect[k] = static_cast<std::uint32_t>(s.rect[k]);
          img.sources.push_back(std::move(ws));
        }
        if (req.encoding == static_cast<std::uint8_t>(Encoding::Jpeg))
          img.payload = encode_jpeg(sample.image, static_cast<int>(req.jpeg_quality));
        else
          img.payload = std::move(sample.image.pixels);
        resp.images.push_back(std::move(img));
      }
      resp.status = static_cast<std::uint32_t>(BatchStatus::Ok);
    } catch (const Error& e) {
      resp.images.clear();
      resp.status = static_cast<std::uint32_t>(e.code() == Errc::RenderTimeout ||
                                                       e.code() == Errc::DeviceLost
                                                   ? BatchStatus::RenderFailed
                                                   : BatchStatus::Internal);
      resp.message = e.what();
    }
    return resp;
  }
};

}  // namespace procshade::stream
