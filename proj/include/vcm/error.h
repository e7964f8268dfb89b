#ifndef VCM_ERROR_H_
#define VCM_ERROR_H_

#include <stdexcept>
#include <string>

namespace vcm {

// Base class for every failure raised by the harness.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or missing inputs detected before any work runs.
// The CLI maps these to exit status 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or out-of-range content in an input file.
class InputError : public Error {
 public:
  using Error::Error;
};

// A metric whose value is mathematically undefined for the given data
// (e.g. mIoU with no populated class).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// External or mock codec failure.
class CodecError : public Error {
 public:
  using Error::Error;
};

}  // namespace vcm

#endif  // VCM_ERROR_H_
