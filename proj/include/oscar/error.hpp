#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oscar {

enum class Errc {
  OversizeBody,
  Malformed,
  NestingTooDeep,
  KeyInvalid,
  ValidityInverted,
  AuthFailure,
  NoSecret,
  AmbiguousScope,
  TokenTooLong,
  TooManySuites,
  UnknownPath,
  UnknownSigner,
  CertificateExpired,
  CapabilityMismatch,
  NotAuthorized,
  ConfigInvalid,
  IoError,
  CryptoFailure,
};

std::string_view to_string(Errc code) noexcept;

// Every failure the library reports carries one of the codes above; callers
// switch on code(), the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}
  explicit Error(Errc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

  Errc code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

inline std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::OversizeBody: return "OversizeBody";
    case Errc::Malformed: return "Malformed";
    case Errc::NestingTooDeep: return "NestingTooDeep";
    case Errc::KeyInvalid: return "KeyInvalid";
    case Errc::ValidityInverted: return "ValidityInverted";
    case Errc::AuthFailure: return "AuthFailure";
    case Errc::NoSecret: return "NoSecret";
    case Errc::AmbiguousScope: return "AmbiguousScope";
    case Errc::TokenTooLong: return "TokenTooLong";
    case Errc::TooManySuites: return "TooManySuites";
    case Errc::UnknownPath: return "UnknownPath";
    case Errc::UnknownSigner: return "UnknownSigner";
    case Errc::CertificateExpired: return "CertificateExpired";
    case Errc::CapabilityMismatch: return "CapabilityMismatch";
    case Errc::NotAuthorized: return "NotAuthorized";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::IoError: return "IoError";
    case Errc::CryptoFailure: return "CryptoFailure";
  }
  return "Unknown";
}

}  // namespace oscar
