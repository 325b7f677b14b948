#ifndef CURVLAB_ERRORS_HPP
#define CURVLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace curvlab {

enum class ErrorKind {
  domain,        // point outside the chart box
  definiteness,  // metric not positive definite
  parameter,     // argument out of its admissible range
  precondition,  // geometric precondition violated (orthogonality, unit length...)
  degeneracy,    // degenerate input (parallel vectors, rank loss)
  ill_defined,   // Riccati operator requested outside its domain
  obstruction,   // lift left the tube / Newton inversion failed
  config,        // scenario file malformed
  unknown_name,  // registry lookup failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace curvlab

#endif  // CURVLAB_ERRORS_HPP
