#pragma once

#include <stdexcept>
#include <string>

namespace linesfm {

enum class ErrorKind {
  InvalidLine,             // zero direction or moment not orthogonal to direction
  DegenerateLine,          // line through the optical center
  EliminationSingularity,  // |h[axis]| too small to solve the orthogonality constraint
  DepthOverflow,           // chi ~ 0, line at infinity
  Divergence,              // closed-loop state became non-finite
  InvalidInput,
  Generation,
  Config,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace linesfm
