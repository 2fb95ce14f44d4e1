#pragma once

#include <stdexcept>
#include <string>

namespace ndf4d {

/// Malformed input bytes or text (bad file sizes, unparsable numbers).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a data contract (bad poses, length
/// mismatches, missing files, I/O failures).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration key or value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ndf4d
