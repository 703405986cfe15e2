#include "cmcqa/error.hpp"

namespace cmcqa {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kDegenerateInput: return "degenerate input";
    case ErrorKind::kCalibration: return "calibration error";
    case ErrorKind::kEvaluation: return "evaluation error";
    case ErrorKind::kConfiguration: return "configuration error";
    case ErrorKind::kSplit: return "split error";
    case ErrorKind::kAggregation: return "aggregation error";
    case ErrorKind::kSpec: return "spec error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kIo: return "I/O error";
  }
  return "error";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse:
    case ErrorKind::kSchema:
    case ErrorKind::kValidation:
      return kExitSchema;
    case ErrorKind::kConfiguration:
    case ErrorKind::kSplit:
    case ErrorKind::kSpec:
    case ErrorKind::kFormat:
      return kExitConfiguration;
    case ErrorKind::kDomain:
    case ErrorKind::kDegenerateInput:
    case ErrorKind::kCalibration:
    case ErrorKind::kEvaluation:
    case ErrorKind::kAggregation:
      return kExitEvaluation;
    case ErrorKind::kIo:
      return kExitIo;
  }
  return 1;
}

namespace {
std::string compose(ErrorKind kind, const std::string& message,
                    std::optional<std::size_t> line) {
  std::string out;
  if (line) out = "line " + std::to_string(*line) + ": ";
  out += to_string(kind);
  out += ": ";
  out += message;
  return out;
}
}  // namespace

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(compose(kind, message, line)),
      kind_(kind),
      line_(line),
      detail_(message) {}

}  // namespace cmcqa
