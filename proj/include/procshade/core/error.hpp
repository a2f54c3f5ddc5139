#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace procshade {

// Error codes for every failure mode the library reports. CLI maps these to
// one-line machine-parsable messages; tests match on the code.
enum class Errc {
  // corpus
  EmptySource,
  DuplicateId,
  MissingEntryPoint,
  RequiresExternalInput,
  // render
  CompileError,
  ContextUnavailable,
  DeviceLost,
  RenderTimeout,
  ZeroCount,
  // mix
  BadParameter,
  DimensionMismatch,
  WeightMismatch,
  InsufficientPrograms,
  IoError,
  // metrics
  CropTooLarge,
  EmptySubset,
  KTooLarge,
  // stream
  BindFailure,
  VersionMismatch,
  ConnectionLost,
  ServerError,
  BadRequest,
  // generic
  InvalidArgument,
  NotFound,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::EmptySource: return "EmptySource";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::MissingEntryPoint: return "MissingEntryPoint";
    case Errc::RequiresExternalInput: return "RequiresExternalInput";
    case Errc::CompileError: return "CompileError";
    case Errc::ContextUnavailable: return "ContextUnavailable";
    case Errc::DeviceLost: return "DeviceLost";
    case Errc::RenderTimeout: return "RenderTimeout";
    case Errc::ZeroCount: return "ZeroCount";
    case Errc::BadParameter: return "BadParameter";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::WeightMismatch: return "WeightMismatch";
    case Errc::InsufficientPrograms: return "InsufficientPrograms";
    case Errc::IoError: return "IoError";
    case Errc::CropTooLarge: return "CropTooLarge";
    case Errc::EmptySubset: return "EmptySubset";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::BindFailure: return "BindFailure";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::ConnectionLost: return "ConnectionLost";
    case Errc::ServerError: return "ServerError";
    case Errc::BadRequest: return "BadRequest";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NotFound: return "NotFound";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        message_(std::move(message)) {}

  Errc code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

[[noreturn]] inline void raise(Errc code, std::string message) {
  throw Error(code, std::move(message));
}

}  // namespace procshade
