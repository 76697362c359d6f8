#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nhscope {

enum class ErrorKind {
  InvalidSpec,          // model parameters violate a builder precondition
  Ingestion,            // matrix file could not be read
  NumericalFailure,     // eigensolver did not converge
  PairingFailure,       // left/right eigenvalues could not be matched
  InvalidInput,         // bad argument to an analysis routine
  InternalConsistency,  // a computed quantity left its admissible range
  InvalidRegime,        // parameters outside the regime of a closed form
  NoEdgeModes,
  AmbiguousModes,
  Structure,            // matrix lacks the expected algebraic structure
  Config,               // CLI / config validation
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nhscope
