#pragma once

#include <stdexcept>
#include <string>

namespace rrmap {

/// Error taxonomy shared by all modules. The CLI maps kinds to exit codes:
/// config/hypothesis/unsupported/range -> 2, spectral_condition -> 3,
/// convergence -> 4.
enum class ErrorKind {
  config,              // invalid parameters, infeasible configuration
  spectral_condition,  // E within tolerance of the Robin spectrum
  convergence,         // iteration budget exhausted (incl. asymptotic regime)
  hypothesis,          // identity precondition violated (e.g. sin(alpha) = 0)
  unsupported,         // mode deferred by design (e.g. complex potential)
  range,               // value outside representable range (overflow guard)
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};
struct SpectralConditionError : Error {
  explicit SpectralConditionError(const std::string& w)
      : Error(ErrorKind::spectral_condition, w) {}
};
struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& w)
      : Error(ErrorKind::convergence, w) {}
};
struct HypothesisError : Error {
  explicit HypothesisError(const std::string& w)
      : Error(ErrorKind::hypothesis, w) {}
};
struct UnsupportedModeError : Error {
  explicit UnsupportedModeError(const std::string& w)
      : Error(ErrorKind::unsupported, w) {}
};
struct RangeError : Error {
  explicit RangeError(const std::string& w) : Error(ErrorKind::range, w) {}
};

} // namespace rrmap
