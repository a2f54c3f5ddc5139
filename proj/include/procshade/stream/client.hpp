#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "procshade/core/error.hpp"
#include "procshade/stream/wire.hpp"

namespace procshade::stream {

// Blocking client for the batch protocol. One request in flight at a time;
// training consumers that want pipelining open several connections.
class StreamClient {
 public:
  StreamClient(const std::string& host, std::uint16_t port) : sock_(connect_tcp(host, port)) {}

  BatchResponseWire request_batch(const BatchRequestWire& req) {
    send_frame(MsgType::BatchRequest, req.encode());
    auto [type, body] = read_frame();
    if (type == MsgType::Error) throw_wire_error(body);
    if (type != MsgType::BatchResponse)
      raise(Errc::ServerError, "unexpected response type " +
                                   std::to_string(static_cast<int>(type)));
    BatchResponseWire resp;
    if (!BatchResponseWire::decode(body, resp))
      raise(Errc::ServerError, "malformed batch response");
    return resp;
  }

  CounterResponseWire query_counters() {
    send_frame(MsgType::CounterRequest, {});
    auto [type, body] = read_frame();
    if (type == MsgType::Error) throw_wire_error(body);
    CounterResponseWire counters;
    if (type != MsgType::CounterResponse || !CounterResponseWire::decode(body, counters))
      raise(Errc::ServerError, "malformed counter response");
    return counters;
  }

  // Test hook: send a frame with an arbitrary protocol version byte.
  void send_frame(MsgType type, const std::vector<std::uint8_t>& body,
                  std::uint8_t version = kProtocolVersion) {
    const auto frame = make_frame(type, body, version);
    write_all(sock_.fd(), frame.data(), frame.size());
  }

  std::pair<MsgType, std::vector<std::uint8_t>> read_frame() {
    std::uint8_t header_bytes[kFrameHeaderSize];
    read_exact(sock_.fd(), header_bytes, kFrameHeaderSize);
    const FrameHeader header = parse_frame_header(header_bytes);
    if (!header.magic_ok) raise(Errc::ServerError, "bad magic in response");
    if (header.version != kProtocolVersion)
      raise(Errc::VersionMismatch, "server protocol version " + std::to_string(header.version));
    if (header.body_len > kMaxBodyBytes) raise(Errc::ServerError, "oversized response");
    std::vector<std::uint8_t> body(header.body_len);
    if (header.body_len) read_exact(sock_.fd(), body.data(), body.size());
    return {header.type, std::move(body)};
  }

 private:
  Socket sock_;

  [[noreturn]] static void throw_wire_error(const std::vector<std::uint8_t>& body) {
    ErrorWire err;
    if (!ErrorWire::decode(body, err)) raise(Errc::ServerError, "malformed error frame");
    if (err.code == static_cast<std::uint32_t>(WireError::VersionMismatch))
      raise(Errc::VersionMismatch, err.message);
    raise(Errc::ServerError, "server error " + std::to_string(err.code) + ": " + err.message);
  }
};

}  // namespace procshade::stream
