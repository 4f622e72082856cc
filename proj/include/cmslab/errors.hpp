#pragma once

#include <stdexcept>
#include <string>

namespace cmslab {

struct InvalidParams : std::invalid_argument {
  explicit InvalidParams(const std::string& msg) : std::invalid_argument(msg) {}
};

// A pair of coordinates coincides or a hard-wall constraint is active;
// the desingularized solver path must be used instead of the plain drift.
struct DegenerateState : std::runtime_error {
  explicit DegenerateState(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConvergenceFailure : std::runtime_error {
  explicit ConvergenceFailure(const std::string& msg) : std::runtime_error(msg) {}
};

struct StepSizeUnderflow : std::runtime_error {
  StepSizeUnderflow(const std::string& msg, double time) : std::runtime_error(msg), time(time) {}
  double time;
};

struct NonRealRoots : std::runtime_error {
  explicit NonRealRoots(const std::string& msg) : std::runtime_error(msg) {}
};

struct StepExplosion : std::runtime_error {
  explicit StepExplosion(const std::string& msg) : std::runtime_error(msg) {}
};

struct InsufficientPaths : std::runtime_error {
  explicit InsufficientPaths(const std::string& msg) : std::runtime_error(msg) {}
};

struct Unsupported : std::logic_error {
  explicit Unsupported(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace cmslab
