#pragma once

#include <stdexcept>
#include <string>

namespace ccm {

/// Two volumes that must share a grid differ in dims or spacing.
class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what)
      : std::invalid_argument("dimension mismatch: " + what) {}
};

/// Raised when CC-Metrics are requested on a ground truth with no foreground.
/// Callers are expected to fall back to global-only evaluation.
class EmptyGroundTruth : public std::runtime_error {
 public:
  EmptyGroundTruth()
      : std::runtime_error("ground truth has no foreground components") {}
};

/// Input that cannot be read or does not validate (missing file, bad
/// header, wrong dtype).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed MASK3D stream.
class FormatError : public InputError {
 public:
  explicit FormatError(const std::string& what) : InputError("MASK3D format error: " + what) {}
};

/// A degradation scenario cannot run on the given ground truth.
class ScenarioPrecondition : public std::runtime_error {
 public:
  explicit ScenarioPrecondition(const std::string& what)
      : std::runtime_error("scenario precondition violated: " + what) {}
};

}  // namespace ccm
