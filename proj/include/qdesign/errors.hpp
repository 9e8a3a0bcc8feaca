#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qdesign {

/// Invalid argument values (non-positive energies, broken invariants).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative or adaptive numeric method did not reach its tolerance.
/// `residual` carries the achieved error measure in the caller's units.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Wire loops that touch, intersect, or come closer than the filament
/// validity threshold.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data; `lines` holds 1-based line numbers of offending rows.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::vector<std::size_t> lines = {})
      : std::runtime_error(what), lines_(std::move(lines)) {}
  const std::vector<std::size_t>& lines() const noexcept { return lines_; }

 private:
  std::vector<std::size_t> lines_;
};

/// Config schema violations. The message starts with the offending key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qdesign
