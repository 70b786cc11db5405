#pragma once

#include <stdexcept>
#include <string>

namespace dmfac {

// Structural problem in user-supplied data: malformed graph, gains outside
// their admissible ranges, bad schedule intervals, unparsable scenario file.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A simulated signal left the sane range (|value| > divergence_guard).
// The CLI maps this to exit code 3.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& signal, long k, double value)
      : std::runtime_error("divergence: |" + signal + "| = " +
                           std::to_string(value) + " at step k=" +
                           std::to_string(k)),
        step(k) {}

  long step;
};

}  // namespace dmfac
