#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sleepgp {

using Matrix = std::vector<std::vector<double>>;

// Error categories map to CLI exit codes: config_error -> 2, data_error -> 3,
// anything else -> 4.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sleepgp
