#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace daq {

enum class Errc {
  BadMagic,
  VersionMismatch,
  NonFiniteValue,
  TruncatedPayload,
  IoError,
  InvalidShape,
  CodeOutOfRange,
  LayoutMismatch,
  UnsupportedBitWidth,
  DegenerateRange,
  IndivisibleGroupSize,
  EmptyInput,
  ShapeMismatch,
  ZeroBaseline,
  InputMismatch,
  InvalidArgument,
  InvariantViolation,
};

constexpr std::string_view errc_name(Errc code) noexcept {
  switch (code) {
  case Errc::BadMagic: return "BadMagic";
  case Errc::VersionMismatch: return "VersionMismatch";
  case Errc::NonFiniteValue: return "NonFiniteValue";
  case Errc::TruncatedPayload: return "TruncatedPayload";
  case Errc::IoError: return "IoError";
  case Errc::InvalidShape: return "InvalidShape";
  case Errc::CodeOutOfRange: return "CodeOutOfRange";
  case Errc::LayoutMismatch: return "LayoutMismatch";
  case Errc::UnsupportedBitWidth: return "UnsupportedBitWidth";
  case Errc::DegenerateRange: return "DegenerateRange";
  case Errc::IndivisibleGroupSize: return "IndivisibleGroupSize";
  case Errc::EmptyInput: return "EmptyInput";
  case Errc::ShapeMismatch: return "ShapeMismatch";
  case Errc::ZeroBaseline: return "ZeroBaseline";
  case Errc::InputMismatch: return "InputMismatch";
  case Errc::InvalidArgument: return "InvalidArgument";
  case Errc::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

/// Every failure in the library is reported as a daq::Error carrying a code.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code), detail_(what) {}

  Errc code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string &detail() const noexcept { return detail_; }

private:
  Errc code_;
  std::string detail_;
};

[[noreturn]] inline void fail(Errc code, const std::string &what) {
  throw Error(code, what);
}

} // namespace daq
