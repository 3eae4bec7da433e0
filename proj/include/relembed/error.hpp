#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relembed {

enum class Errc {
  UnknownFamily,
  InvalidParams,
  EmptySignSet,
  SamplingFailed,
  EmptyGraph,
  SizeMismatch,
  PerSourceUnsupported,
  ZeroEmbedding,
  ZeroThreshold,
  CyclicGraph,
  ZeroColumn,
  NotRobust,
  Unverified,
  NotSpherical,
  RetriesExhausted,
  TooLarge,
  ParseError,
  IoError,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::UnknownFamily: return "UnknownFamily";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::EmptySignSet: return "EmptySignSet";
    case Errc::SamplingFailed: return "SamplingFailed";
    case Errc::EmptyGraph: return "EmptyGraph";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::PerSourceUnsupported: return "PerSourceUnsupported";
    case Errc::ZeroEmbedding: return "ZeroEmbedding";
    case Errc::ZeroThreshold: return "ZeroThreshold";
    case Errc::CyclicGraph: return "CyclicGraph";
    case Errc::ZeroColumn: return "ZeroColumn";
    case Errc::NotRobust: return "NotRobust";
    case Errc::Unverified: return "Unverified";
    case Errc::NotSpherical: return "NotSpherical";
    case Errc::RetriesExhausted: return "RetriesExhausted";
    case Errc::TooLarge: return "TooLarge";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI) can map it without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace relembed
