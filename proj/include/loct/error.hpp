#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace loct {

// Base class for every error raised by the library. The `kind` is a short
// machine-readable token ("data", "model", "solver", ...) used by the CLI to
// print one-line diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error("data", message) {}
};

class ModelError : public Error {
 public:
  explicit ModelError(const std::string& message) : Error("model", message) {}
};

class FormulationError : public Error {
 public:
  explicit FormulationError(const std::string& message)
      : Error("formulation", message) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& message) : Error("solver", message) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& message)
      : Error("training", message) {}
};

class EvaluationError : public Error {
 public:
  explicit EvaluationError(const std::string& message)
      : Error("evaluation", message) {}
};

}  // namespace loct
