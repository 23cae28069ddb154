#pragma once

#include <stdexcept>

namespace tanom {

// Invalid configuration or precondition caught before any work starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runtime failure inside the training loop (divergence, non-finite state).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tanom
