#pragma once

#include <stdexcept>
#include <string>

namespace rlvm {

// Error categories map 1:1 onto CLI exit codes (0 ok, 2 usage, 3 data,
// 4 simulation, 5 training).
enum class ErrorKind { kUsage = 2, kData = 3, kSimulation = 4, kTraining = 5 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct MissingFileError : Error {
  explicit MissingFileError(const std::string& path)
      : Error(ErrorKind::kData, "missing file: " + path) {}
};

struct MalformedRowError : Error {
  MalformedRowError(std::size_t line, const std::string& reason)
      : Error(ErrorKind::kData,
              "malformed row at line " + std::to_string(line) + ": " + reason),
        line(line) {}
  std::size_t line;
};

struct InvariantViolationError : Error {
  explicit InvariantViolationError(const std::string& what)
      : Error(ErrorKind::kData, "invariant violation: " + what) {}
};

struct InsufficientVmsError : Error {
  InsufficientVmsError(std::size_t have, std::size_t want)
      : Error(ErrorKind::kData, "trace directory has " + std::to_string(have) +
                                    " usable VMs, need " + std::to_string(want)) {}
};

struct ShortTraceError : Error {
  explicit ShortTraceError(const std::string& vm_id)
      : Error(ErrorKind::kData,
              "trace for VM '" + vm_id + "' is too short and no replacement remains") {}
};

struct InvalidSpecError : Error {
  explicit InvalidSpecError(const std::string& what)
      : Error(ErrorKind::kUsage, "invalid spec: " + what) {}
};

struct ModelLoadError : Error {
  explicit ModelLoadError(const std::string& what)
      : Error(ErrorKind::kUsage, "model load: " + what) {}
};

struct SlotOutOfRangeError : Error {
  SlotOutOfRangeError(int slot, int count)
      : Error(ErrorKind::kSimulation, "slot " + std::to_string(slot) +
                                          " out of range (episode has " +
                                          std::to_string(count) + " slots)") {}
};

struct ConstraintViolationError : Error {
  explicit ConstraintViolationError(const std::string& what)
      : Error(ErrorKind::kSimulation, "constraint violation: " + what) {}
};

struct PreconditionError : Error {
  explicit PreconditionError(const std::string& what)
      : Error(ErrorKind::kSimulation, "precondition breach: " + what) {}
};

struct IncompleteTrajectoryError : Error {
  explicit IncompleteTrajectoryError(const std::string& what)
      : Error(ErrorKind::kTraining, "incomplete trajectory: " + what) {}
};

struct NonFiniteGradientError : Error {
  explicit NonFiniteGradientError(const std::string& where)
      : Error(ErrorKind::kTraining, "non-finite gradient at " + where) {}
};

}  // namespace rlvm
