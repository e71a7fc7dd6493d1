#pragma once

#include <stdexcept>
#include <string>

namespace resilient {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed configuration files or inconsistent
/// dimensions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// No grid point of the synthesis program admitted a certificate.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A certificate failed independent re-verification.
class CertificateError : public Error {
 public:
  using Error::Error;
};

}  // namespace resilient
