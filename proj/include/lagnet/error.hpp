#pragma once

#include <stdexcept>
#include <string>

namespace lagnet {

enum class ErrorKind {
  Topology,
  Weight,
  DisconnectedGraph,
  Dimension,
  InvalidArgument,
  Capability,
  NotStationary,
  Certification,
  HypothesisViolated,
  Assumption2,
  NeedLargerPenalty,
  InnerDivergence,
  InconsistentSystem,
  Oracle,
  Config,
  HashMismatch,
  InsufficientData,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lagnet
