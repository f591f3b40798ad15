#pragma once

#include <stdexcept>
#include <string>

namespace rotmix {

// Bad user input: malformed flags, out-of-domain values, invariant
// violations in loaded files. CLI maps this to exit code 5.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// File system / parse failures. CLI maps this to exit code 4.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// A fit collapsed: every component pruned, or a component referenced by
// positive transport mass has zero weight. CLI maps this to exit code 3.
class DegenerateFitError : public std::runtime_error {
 public:
  explicit DegenerateFitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rotmix
