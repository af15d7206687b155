#pragma once

#include <stdexcept>
#include <string>

namespace peakon {

/// Invalid or incomplete run configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical run could not continue (ordering violation, non-finite field,
/// failed event location, conservation drift). The CLI maps this to exit code 3.
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace peakon
