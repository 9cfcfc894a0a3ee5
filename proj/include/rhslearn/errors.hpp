#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rhslearn {

// Thrown when the state blows up (non-finite values) during integration.
class integration_error : public std::runtime_error {
 public:
  integration_error(const std::string& what, double failing_time)
      : std::runtime_error(what), failing_time_(failing_time) {}
  double failing_time() const { return failing_time_; }

 private:
  double failing_time_;
};

// Thrown when a training run produces a non-finite loss.
class divergence_error : public std::runtime_error {
 public:
  divergence_error(const std::string& what, std::size_t epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace rhslearn
