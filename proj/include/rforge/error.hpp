#pragma once

#include <stdexcept>
#include <string>

namespace rforge {

/// Failure categories surfaced by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
  InvalidArgument,
  Parse,
  NoFavourableBasis,
  CannotSquare,
  IllConditioned,
  VersionMismatch,
  NonGeneric,
  Numerical,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace rforge
