#pragma once

#include <charconv>
#include <stdexcept>
#include <string>

namespace dkg {

/// Shortest round-trip decimal form of `v` ("nan", "inf" for non-finite values).
inline std::string format_number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Base of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Caller violated a precondition (bad shape, bad parameter, empty input).
struct UsageError : Error {
  using Error::Error;
};

/// An iterative solver did not reach its tolerance.
struct NoConvergenceError : Error {
  using Error::Error;
};

/// A postcondition the algorithm should guarantee did not hold.
struct InternalError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

/// Configuration text rejected; `key` names the offending entry.
struct ParseError : Error {
  ParseError(std::string key, const std::string& what)
      : Error(key + ": " + what), key(std::move(key)) {}
  std::string key;
};

}  // namespace dkg
