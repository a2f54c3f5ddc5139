#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "procshade/core/error.hpp"

namespace procshade::stream {

// ---------------------------------------------------------------------------
// Binary protocol constants. Full field layout lives in docs/protocol.md and
// is bit-exact: all integers little-endian, floats IEEE-754 binary64.
// ---------------------------------------------------------------------------

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr char kMagic[4] = {'P', 'S', 'H', 'D'};
inline constexpr std::size_t kFrameHeaderSize = 16;  // magic 4 | ver 1 | type 1 | rsv 2 | len 8
inline constexpr std::uint64_t kMaxBodyBytes = 1ull << 32;

enum class MsgType : std::uint8_t {
  BatchRequest = 1,
  BatchResponse = 2,
  CounterRequest = 3,
  CounterResponse = 4,
  Error = 5,
};

enum class BatchStatus : std::uint32_t {
  Ok = 0,
  BadRequest = 1,
  Busy = 2,
  RenderFailed = 3,
  Internal = 4,
};

enum class WireError : std::uint32_t {
  VersionMismatch = 100,
  BadMagic = 101,
  BadType = 102,
  Malformed = 103,
};

enum class Encoding : std::uint8_t { RawRgb8 = 0, Jpeg = 1 };

// ---------------------------------------------------------------------------
// Little-endian cursors
// ---------------------------------------------------------------------------

class ByteWriter {
 public:
  std::vector<std::uint8_t> bytes;

  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes.insert(bytes.end(), p, p + n);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  explicit ByteReader(const std::vector<std::uint8_t>& v) : ByteReader(v.data(), v.size()) {}

  bool ok() const { return !failed_; }
  std::size_t remaining() const { return size_ - pos_; }

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(take(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
  std::uint64_t u64() { return take(8); }
  double f64() {
    const std::uint64_t bits = take(8);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (failed_ || remaining() < n) {
      failed_ = true;
      return {};
    }
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<std::uint8_t> blob(std::size_t n) {
    if (failed_ || remaining() < n) {
      failed_ = true;
      return {};
    }
    std::vector<std::uint8_t> out(data_ + pos_, data_ + pos_ + n);
    pos_ += n;
    return out;
  }

 private:
  std::uint64_t take(int n) {
    if (failed_ || remaining() < static_cast<std::size_t>(n)) {
      failed_ = true;
      return 0;
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  bool failed_ = false;
};

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> make_frame(MsgType type, const std::vector<std::uint8_t>& body,
                                            std::uint8_t version = kProtocolVersion) {
  ByteWriter w;
  w.raw(kMagic, 4);
  w.u8(version);
  w.u8(static_cast<std::uint8_t>(type));
  w.u16(0);
  w.u64(body.size());
  w.raw(body.data(), body.size());
  return std::move(w.bytes);
}

struct FrameHeader {
  std::uint8_t version = 0;
  MsgType type{};
  std::uint64_t body_len = 0;
  bool magic_ok = false;
};

inline FrameHeader parse_frame_header(const std::uint8_t* data) {
  FrameHeader h;
  h.magic_ok = std::memcmp(data, kMagic, 4) == 0;
  h.version = data[4];
  h.type = static_cast<MsgType>(data[5]);
  ByteReader r(data + 8, 8);
  h.body_len = r.u64();
  return h;
}

// ---------------------------------------------------------------------------
// POSIX socket helpers
// ---------------------------------------------------------------------------

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { close_fd(); }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept {
    if (this != &other) {
      close_fd();
      fd_ = other.fd_;
      other.fd_ = -1;
    }
    return *this;
  }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

  void shutdown_both() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

  void close_fd() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_ = -1;
};

inline void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  std::size_t off = 0;
  while (off < n) {
    const ssize_t rc = ::send(fd, data + off, n - off, MSG_NOSIGNAL);
    if (rc <= 0) raise(Errc::ConnectionLost, "send failed: " + std::string(strerror(errno)));
    off += static_cast<std::size_t>(rc);
  }
}

// Returns false on clean EOF at a frame boundary (first byte), throws on
// mid-message truncation.
inline bool read_exact(int fd, std::uint8_t* data, std::size_t n, bool eof_ok_at_start = false) {
  std::size_t off = 0;
  while (off < n) {
    const ssize_t rc = ::recv(fd, data + off, n - off, 0);
    if (rc == 0) {
      if (off == 0 && eof_ok_at_start) return false;
      raise(Errc::ConnectionLost, "connection closed mid-message");
    }
    if (rc < 0) raise(Errc::ConnectionLost, "recv failed: " + std::string(strerror(errno)));
    off += static_cast<std::size_t>(rc);
  }
  return true;
}

struct Listener {
  Socket sock;
  std::uint16_t port = 0;
};

inline Listener listen_tcp(const std::string& host, std::uint16_t port, int backlog = 64) {
  Listener lst;
  lst.sock = Socket(::socket(AF_INET, SOCK_STREAM, 0));
  if (!lst.sock.valid()) raise(Errc::BindFailure, "socket() failed");
  int one = 1;
  setsockopt(lst.sock.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "0.0.0.0") {
    addr.sin_addr.s_addr = INADDR_ANY;
  } else if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    raise(Errc::BindFailure, "bad bind address '" + host + "'");
  }
  if (::bind(lst.sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    raise(Errc::BindFailure,
          "cannot bind " + host + ":" + std::to_string(port) + ": " + strerror(errno));
  if (::listen(lst.sock.fd(), backlog) != 0)
    raise(Errc::BindFailure, std::string("listen failed: ") + strerror(errno));

  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  getsockname(lst.sock.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
  lst.port = ntohs(bound.sin_port);
  return lst;
}

inline Socket connect_tcp(const std::string& host, std::uint16_t port) {
  Socket sock(::socket(AF_INET, SOCK_STREAM, 0));
  if (!sock.valid()) raise(Errc::ConnectionLost, "socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  std::string target = host.empty() ? "127.0.0.1" : host;
  if (inet_pton(AF_INET, target.c_str(), &addr.sin_addr) != 1) {
    hostent* he = gethostbyname(target.c_str());
    if (!he || he->h_addrtype != AF_INET)
      raise(Errc::ConnectionLost, "cannot resolve '" + target + "'");
    std::memcpy(&addr.sin_addr, he->h_addr_list[0], sizeof addr.sin_addr);
  }
  if (::connect(sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    raise(Errc::ConnectionLost,
          "cannot connect to " + target + ":" + std::to_string(port) + ": " + strerror(errno));
  int one = 1;
  setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return sock;
}

// ---------------------------------------------------------------------------
// Message payloads
// ---------------------------------------------------------------------------

// Fixed 40-byte request body.
struct BatchRequestWire {
  std::uint64_t seed = 0;
  std::uint32_t count = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint8_t mix_mode = 1;  // 0 none, 1 mixup, 2 cutmix
  std::uint8_t encoding = 0;  // 0 raw_rgb8, 1 jpeg
  std::uint32_t mix_n = 6;
  double alpha = 1.0;
  std::uint32_t jpeg_quality = 90;

  std::vector<std::uint8_t> encode() const {
    ByteWriter w;
    w.u64(seed);
    w.u32(count);
    w.u32(width);
    w.u32(height);
    w.u8(mix_mode);
    w.u8(encoding);
    w.u16(0);
    w.u32(mix_n);
    w.f64(alpha);
    w.u32(jpeg_quality);
    return std::move(w.bytes);
  }

  static bool decode(const std::vector<std::uint8_t>& body, BatchRequestWire& out) {
    if (body.size() != 40) return false;
    ByteReader r(body);
    out.seed = r.u64();
    out.count = r.u32();
    out.width = r.u32();
    out.height = r.u32();
    out.mix_mode = r.u8();
    out.encoding = r.u8();
    (void)r.u16();
    out.mix_n = r.u32();
    out.alpha = r.f64();
    out.jpeg_quality = r.u32();
    return r.ok();
  }
};

struct WireSource {
  std::string id;
  double t = 0;
  bool has_rect = false;
  double weight = 0;
  std::uint32_t rect[4] = {0, 0, 0, 0};
};

struct WireImage {
  std::vector<WireSource> sources;
  std::vector<std::uint8_t> payload;
};

struct BatchResponseWire {
  std::uint32_t status = 0;
  std::string message;
  std::vector<WireImage> images;

  std::vector<std::uint8_t> encode() const {
    ByteWriter w;
    w.u32(status);
    w.str(message);
    w.u32(static_cast<std::uint32_t>(images.size()));
    for (const WireImage& img : images) {
      w.u32(static_cast<std::uint32_t>(img.sources.size()));
      for (const WireSource& s : img.sources) {
        w.str(s.id);
        w.f64(s.t);
        w.u8(s.has_rect ? 1 : 0);
        if (s.has_rect) {
          for (std::uint32_t v : s.rect) w.u32(v);
        } else {
          w.f64(s.weight);
        }
      }
      w.u64(img.payload.size());
      w.raw(img.payload.data(), img.payload.size());
    }
    return std::move(w.bytes);
  }

  static bool decode(const std::vector<std::uint8_t>& body, BatchResponseWire& out) {
    ByteReader r(body);
    out.status = r.u32();
    out.message = r.str();
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n && r.ok(); ++i) {
      WireImage img;
      const std::uint32_t ns = r.u32();
      for (std::uint32_t k = 0; k < ns && r.ok(); ++k) {
        WireSource s;
        s.id = r.str();
        s.t = r.f64();
        s.has_rect = r.u8() != 0;
        if (s.has_rect) {
          for (auto& v : s.rect) v = r.u32();
        } else {
          s.weight = r.f64();
        }
        img.sources.push_back(std::move(s));
      }
      const std::uint64_t len = r.u64();
      img.payload = r.blob(len);
      out.images.push_back(std::move(img));
    }
    return r.ok() && r.remaining() == 0;
  }
};

struct CounterResponseWire {
  std::uint64_t images_served = 0;
  double uptime_seconds = 0;
  double mean_images_per_sec = 0;

  std::vector<std::uint8_t> encode() const {
    ByteWriter w;
    w.u64(images_served);
    w.f64(uptime_seconds);
    w.f64(mean_images_per_sec);
    return std::move(w.bytes);
  }
  static bool decode(const std::vector<std::uint8_t>& body, CounterResponseWire& out) {
    if (body.size() != 24) return false;
    ByteReader r(body);
    out.images_served = r.u64();
    out.uptime_seconds = r.f64();
    out.mean_images_per_sec = r.f64();
    return r.ok();
  }
};

struct ErrorWire {
  std::uint32_t code = 0;
  std::string message;

  std::vector<std::uint8_t> encode() const {
    ByteWriter w;
    w.u32(code);
    w.str(message);
    return std::move(w.bytes);
  }
  static bool decode(const std::vector<std::uint8_t>& body, ErrorWire& out) {
    ByteReader r(body);
    out.code = r.u32();
    out.message = r.str();
    return r.ok();
  }
};

}  // namespace procshade::stream
