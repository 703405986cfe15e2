#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cmcqa/error.hpp"
#include "cmcqa/types.hpp"

namespace cmcqa {

// Trim surrounding whitespace, strip trailing '.' and ')', uppercase.
std::string normalize_sample(std::string_view raw);

// Parses one JSONL line. `line_number` is only used in error messages.
// Throws Error(kParse | kSchema | kValidation).
QuestionRecord parse_record(std::string_view raw_json_line, std::size_t line_number = 1);

// Single-line JSON with a fixed field order. Samples are written normalized.
std::string serialize_record(const QuestionRecord& record);

// Probabilities consumed for the logit source: model_probs when present,
// otherwise softmax(model_logits). Empty when the record has neither.
std::optional<std::vector<double>> white_box_probs(const QuestionRecord& record);

struct LineError {
  std::size_t line = 0;
  ErrorKind kind = ErrorKind::kParse;
  std::string message;  // full "line N: kind: detail" text
  std::string detail;
};

struct IngestResult {
  std::vector<QuestionRecord> records;
  std::vector<LineError> errors;
  std::vector<std::string> warnings;
  std::size_t lines_read = 0;  // non-blank lines
};

// Reads every non-blank line. Invalid lines are collected in `errors` and
// skipped; duplicate question ids are reported as errors on the later line.
IngestResult read_jsonl(std::istream& in);

// Strict unless `lenient`: throws the first line error. I/O failures throw kIo.
IngestResult load_jsonl(const std::string& path, bool lenient);

void write_jsonl(std::ostream& out, const std::vector<QuestionRecord>& records);

struct ValidationSummary {
  std::size_t records = 0;
  std::size_t invalid_lines = 0;
  std::map<std::string, std::size_t> per_category;
  std::size_t samples_total = 0;
  std::size_t dropped_samples = 0;
  std::size_t records_with_drops = 0;
  std::size_t records_without_valid_samples = 0;
  std::size_t records_with_probs = 0;
  std::size_t records_with_logits = 0;
};

ValidationSummary summarize(const IngestResult& ingest);

}  // namespace cmcqa
