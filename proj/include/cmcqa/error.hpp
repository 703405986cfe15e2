#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace cmcqa {

enum class ErrorKind {
  kParse,          // malformed JSON
  kSchema,         // missing / mistyped field, unnormalized probabilities
  kValidation,     // well-formed but violates a record invariant
  kDomain,         // numeric precondition (negative probability, missing label)
  kDegenerateInput,// no valid samples for a question
  kCalibration,
  kEvaluation,
  kConfiguration,
  kSplit,
  kAggregation,
  kSpec,           // invalid synthetic model spec
  kFormat,
  kIo,
};

const char* to_string(ErrorKind kind);

// Process exit codes for the CLI. Usage errors come from the argument parser.
enum ExitCode : int {
  kExitOk = 0,
  kExitSchema = 2,
  kExitConfiguration = 3,
  kExitEvaluation = 4,
  kExitIo = 5,
  kExitUsage = 64,
};

int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  // Message without the "line N: " prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> line_;
  std::string detail_;
};

}  // namespace cmcqa
