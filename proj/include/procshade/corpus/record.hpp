#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "procshade/core/error.hpp"
#include "procshade/metrics/stats_record.hpp"

namespace procshade::corpus {

enum class Dialect : std::uint8_t { Twigl, Shadertoy, RawGlsl };

inline const char* dialect_name(Dialect d) {
  switch (d) {
    case Dialect::Twigl: return "twigl";
    case Dialect::Shadertoy: return "shadertoy";
    case Dialect::RawGlsl: return "raw-glsl";
  }
  return "?";
}

inline Dialect parse_dialect(const std::string& s) {
  if (s == "twigl") return Dialect::Twigl;
  if (s == "shadertoy") return Dialect::Shadertoy;
  if (s == "raw-glsl" || s == "raw" || s == "glsl") return Dialect::RawGlsl;
  raise(Errc::InvalidArgument, "unknown dialect '" + s + "'");
}

enum class Status : std::uint8_t { Pending, Compiled, Rejected };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Pending: return "pending";
    case Status::Compiled: return "compiled";
    case Status::Rejected: return "rejected";
  }
  return "?";
}

enum class DedupState : std::uint8_t { Unique, Duplicate, Static };

inline const char* dedup_state_name(DedupState s) {
  switch (s) {
    case DedupState::Unique: return "unique";
    case DedupState::Duplicate: return "duplicate";
    case DedupState::Static: return "static";
  }
  return "?";
}

// One generative program: the source snippet is the program's identity (its
// constants are the parameters), the normalized GLSL is what actually runs.
struct ProgramRecord {
  std::string id;
  Dialect dialect = Dialect::RawGlsl;
  std::string source;
  std::string glsl;
  std::string source_hash;  // hex digest of `source`
  std::size_t char_count = 0;
  Status status = Status::Pending;
  std::string reject_reason;
  DedupState dedup = DedupState::Unique;
  std::string duplicate_of;
  std::optional<metrics::StatsRecord> stats;

  bool usable() const { return status == Status::Compiled && dedup == DedupState::Unique; }
};

}  // namespace procshade::corpus
