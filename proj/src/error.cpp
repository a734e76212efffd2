#include "mspsc/error.hpp"

namespace mspsc {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownFactor: return "UnknownFactor";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::EmptyHistory: return "EmptyHistory";
    case Errc::InactiveFactor: return "InactiveFactor";
    case Errc::EmptyCluster: return "EmptyCluster";
    case Errc::OutOfOrderCheckIn: return "OutOfOrderCheckIn";
    case Errc::UnknownUser: return "UnknownUser";
    case Errc::UserExists: return "UserExists";
    case Errc::NoHistoryFallbackImpossible: return "NoHistoryFallbackImpossible";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::MissingHeader: return "MissingHeader";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::MalformedCalendar: return "MalformedCalendar";
    case Errc::CorruptLogEntry: return "CorruptLogEntry";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace mspsc
