#pragma once

#include <stdexcept>
#include <string>

namespace dot {

// Error taxonomy mirrored by the CLI exit codes:
//   config_error -> 2, convergence_error -> 3, capacity_error -> 4,
//   certification_error -> 5.
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

class capacity_error : public std::runtime_error {
public:
  explicit capacity_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Iteration limit reached; carries the last observed residual.
class convergence_error : public std::runtime_error {
public:
  convergence_error(const std::string& msg, double last_residual)
      : std::runtime_error(msg), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

private:
  double last_residual_ = 0.0;
};

// A property/certificate check failed (certifier commands exit 5 on this).
class certification_error : public std::runtime_error {
public:
  explicit certification_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dot
