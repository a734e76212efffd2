#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mspsc {

enum class Errc {
  InvalidArgument,
  ParseError,
  UnknownFactor,
  OutOfRange,
  KindMismatch,
  EmptyHistory,
  InactiveFactor,
  EmptyCluster,
  OutOfOrderCheckIn,
  UnknownUser,
  UserExists,
  NoHistoryFallbackImpossible,
  InsufficientData,
  MissingHeader,
  EmptyFile,
  MalformedCalendar,
  CorruptLogEntry,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

// All recoverable failures in the library are reported through this type;
// callers switch on code() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mspsc
