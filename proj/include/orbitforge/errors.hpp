#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>

namespace orbitforge {

enum class ErrorKind {
  dimension,
  resource,
  degenerate,
  domain,
  numerical,
  precondition,
  unsupported,
  resolution,
  parse,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& m) : Error(ErrorKind::dimension, m) {}
};

// Carries the window size that would have been needed.
struct ResourceError : Error {
  ResourceError(const std::string& m, std::int64_t required)
      : Error(ErrorKind::resource, m + " (required " + std::to_string(required) + " entries)"),
        required(required) {}
  std::int64_t required;
};

struct DegenerateError : Error {
  DegenerateError(const std::string& m, std::size_t index)
      : Error(ErrorKind::degenerate, m), index(index) {}
  std::size_t index;
};

struct DomainError : Error {
  DomainError(const std::string& m, double limit = 0.0) : Error(ErrorKind::domain, m), limit(limit) {}
  double limit;
};

struct NumericalError : Error {
  NumericalError(const std::string& m, double residual = 0.0)
      : Error(ErrorKind::numerical, m), residual(residual) {}
  double residual;
};

struct PreconditionError : Error {
  PreconditionError(const std::string& m, std::int64_t minimal = 0)
      : Error(ErrorKind::precondition, m), minimal(minimal) {}
  std::int64_t minimal;
};

struct UnsupportedError : Error {
  explicit UnsupportedError(const std::string& m) : Error(ErrorKind::unsupported, m) {}
};

struct ResolutionError : Error {
  explicit ResolutionError(const std::string& m) : Error(ErrorKind::resolution, m) {}
};

// Default cap on stored entries for a single lazily built vector or family.
inline constexpr std::int64_t kDefaultWindowBudget = std::int64_t{1} << 25;

// Reads ORBITFORGE_WINDOW_BUDGET on every call so tests can change it.
std::int64_t window_budget();
void check_budget(std::int64_t required, const char* what);

}  // namespace orbitforge
