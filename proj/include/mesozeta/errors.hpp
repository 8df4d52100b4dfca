#pragma once

#include <stdexcept>
#include <string>

namespace mesozeta {

enum class ErrorKind {
  precision_unreachable,
  missed_zero,
  certification_failure,
  out_of_coverage,
  parse_error,
  monotonicity_error,
  negativity_error,
  network_error,
  checksum_mismatch,
  unknown_source,
  quadrature_nonconvergence,
  range_error,
  linalg_failure,
  missing_key,
  type_error,
  unknown_key,
  io_error,
};

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::precision_unreachable: return "precision-unreachable";
    case ErrorKind::missed_zero: return "missed-zero";
    case ErrorKind::certification_failure: return "certification-failure";
    case ErrorKind::out_of_coverage: return "out-of-coverage";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::monotonicity_error: return "monotonicity-error";
    case ErrorKind::negativity_error: return "negativity-error";
    case ErrorKind::network_error: return "network-error";
    case ErrorKind::checksum_mismatch: return "checksum-mismatch";
    case ErrorKind::unknown_source: return "unknown-source";
    case ErrorKind::quadrature_nonconvergence: return "quadrature-nonconvergence";
    case ErrorKind::range_error: return "range-error";
    case ErrorKind::linalg_failure: return "linalg-failure";
    case ErrorKind::missing_key: return "missing-key";
    case ErrorKind::type_error: return "type-error";
    case ErrorKind::unknown_key: return "unknown-key";
    case ErrorKind::io_error: return "io-error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind k, const std::string& msg)
      : std::runtime_error(std::string(kind_name(k)) + ": " + msg), kind_(k) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mesozeta
