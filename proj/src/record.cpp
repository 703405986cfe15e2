#include "cmcqa/record.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "cmcqa/entropy.hpp"
#include "cmcqa/error.hpp"
#include "json.hpp"

namespace cmcqa {

using nlohmann::json;

namespace {

constexpr double kProbSumTolerance = 1e-9;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

const json& require(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw Error(ErrorKind::kSchema, std::string("missing required field '") + field + "'", line);
  }
  return *it;
}

std::string require_string(const json& value, const char* field, std::size_t line) {
  if (!value.is_string()) {
    throw Error(ErrorKind::kSchema, std::string("field '") + field + "' must be a string", line);
  }
  return value.get<std::string>();
}

std::vector<double> read_label_map(const json& value, const char* field,
                                   const std::vector<Label>& options, std::size_t line) {
  if (!value.is_object()) {
    throw Error(ErrorKind::kSchema, std::string("field '") + field + "' must be an object", line);
  }
  std::vector<double> out(options.size(), 0.0);
  std::vector<bool> seen(options.size(), false);
  for (const auto& [key, entry] : value.items()) {
    auto label = Label::parse(key);
    if (!label || label->index() >= options.size()) {
      throw Error(ErrorKind::kSchema,
                  std::string("field '") + field + "' has key '" + key + "' outside the option labels",
                  line);
    }
    if (!entry.is_number()) {
      throw Error(ErrorKind::kSchema,
                  std::string("field '") + field + "' value for '" + key + "' must be a number", line);
    }
    out[label->index()] = entry.get<double>();
    seen[label->index()] = true;
  }
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (!seen[i]) {
      throw Error(ErrorKind::kSchema,
                  std::string("field '") + field + "' is missing label '" + options[i].str() + "'",
                  line);
    }
  }
  return out;
}

json label_map_json(const std::vector<double>& values) {
  json obj = json::object();
  for (std::size_t i = 0; i < values.size(); ++i) obj[Label::from_index(i).str()] = values[i];
  return obj;
}

}  // namespace

std::string normalize_sample(std::string_view raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && is_space(raw[begin])) ++begin;
  while (end > begin && is_space(raw[end - 1])) --end;
  while (end > begin && (raw[end - 1] == '.' || raw[end - 1] == ')')) {
    --end;
    while (end > begin && is_space(raw[end - 1])) --end;
  }
  std::string out(raw.substr(begin, end - begin));
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

QuestionRecord parse_record(std::string_view raw_json_line, std::size_t line_number) {
  json doc;
  try {
    doc = json::parse(raw_json_line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("malformed JSON (") + e.what() + ")", line_number);
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::kSchema, "record must be a JSON object", line_number);
  }

  QuestionRecord rec;
  rec.question_id = require_string(require(doc, "question_id", line_number), "question_id", line_number);
  if (rec.question_id.empty()) {
    throw Error(ErrorKind::kSchema, "field 'question_id' must be non-empty", line_number);
  }
  if (auto it = doc.find("category"); it != doc.end() && !it->is_null()) {
    rec.category = require_string(*it, "category", line_number);
  }

  const json& options = require(doc, "options", line_number);
  if (!options.is_array()) {
    throw Error(ErrorKind::kSchema, "field 'options' must be an array", line_number);
  }
  if (options.size() < 2 || options.size() > Label::kMaxOptions) {
    throw Error(ErrorKind::kValidation,
                "field 'options' must hold between 2 and 26 labels, got " + std::to_string(options.size()),
                line_number);
  }
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (!options[i].is_string()) {
      throw Error(ErrorKind::kSchema, "field 'options' must contain strings", line_number);
    }
    const Label expected = Label::from_index(i);
    if (options[i].get<std::string>() != expected.str()) {
      throw Error(ErrorKind::kValidation,
                  "options must be contiguous labels from 'A'; position " + std::to_string(i) +
                      " is '" + options[i].get<std::string>() + "'",
                  line_number);
    }
    rec.options.push_back(expected);
  }

  const std::string truth =
      normalize_sample(require_string(require(doc, "true_answer", line_number), "true_answer", line_number));
  auto truth_label = Label::parse(truth);
  if (!truth_label || truth_label->index() >= rec.options.size()) {
    throw Error(ErrorKind::kValidation, "true_answer '" + truth + "' is not among the options",
                line_number);
  }
  rec.true_answer = *truth_label;

  const json& samples = require(doc, "samples", line_number);
  if (!samples.is_array()) {
    throw Error(ErrorKind::kSchema, "field 'samples' must be an array", line_number);
  }
  if (samples.empty()) {
    throw Error(ErrorKind::kSchema, "field 'samples' must be non-empty", line_number);
  }
  rec.samples.reserve(samples.size());
  for (const auto& s : samples) {
    if (!s.is_string()) {
      throw Error(ErrorKind::kSchema, "field 'samples' must contain strings", line_number);
    }
    rec.samples.push_back(normalize_sample(s.get<std::string>()));
  }

  if (auto it = doc.find("model_probs"); it != doc.end() && !it->is_null()) {
    auto probs = read_label_map(*it, "model_probs", rec.options, line_number);
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorKind::kSchema, "model_probs values must lie in [0,1]", line_number);
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance) {
      throw Error(ErrorKind::kSchema, "probs not normalized (sum " + std::to_string(sum) + ")",
                  line_number);
    }
    rec.model_probs = std::move(probs);
  }
  if (auto it = doc.find("model_logits"); it != doc.end() && !it->is_null()) {
    auto logits = read_label_map(*it, "model_logits", rec.options, line_number);
    for (double z : logits) {
      if (!std::isfinite(z)) {
        throw Error(ErrorKind::kSchema, "model_logits values must be finite", line_number);
      }
    }
    rec.model_logits = std::move(logits);
  }
  if (auto it = doc.find("schema_version"); it != doc.end()) {
    rec.schema_version = it->dump();
  }
  return rec;
}

std::string serialize_record(const QuestionRecord& record) {
  nlohmann::ordered_json doc;
  if (record.schema_version) doc["schema_version"] = json::parse(*record.schema_version);
  doc["question_id"] = record.question_id;
  if (!record.category.empty()) doc["category"] = record.category;
  auto options = nlohmann::ordered_json::array();
  for (const Label& l : record.options) options.push_back(l.str());
  doc["options"] = std::move(options);
  doc["true_answer"] = record.true_answer.str();
  doc["samples"] = record.samples;
  if (record.model_probs) doc["model_probs"] = label_map_json(*record.model_probs);
  if (record.model_logits) doc["model_logits"] = label_map_json(*record.model_logits);
  return doc.dump();
}

std::optional<std::vector<double>> white_box_probs(const QuestionRecord& record) {
  if (record.model_probs) return record.model_probs;
  if (record.model_logits) return softmax(*record.model_logits);
  return std::nullopt;
}

IngestResult read_jsonl(std::istream& in) {
  IngestResult result;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++result.lines_read;
    try {
      QuestionRecord rec = parse_record(line, line_number);
      if (!seen_ids.insert(rec.question_id).second) {
        throw Error(ErrorKind::kValidation, "duplicate question_id '" + rec.question_id + "'",
                    line_number);
      }
      if (rec.model_probs && rec.model_logits) {
        result.warnings.push_back("line " + std::to_string(line_number) + ": question '" +
                                  rec.question_id +
                                  "' carries both model_probs and model_logits; using model_probs");
      }
      result.records.push_back(std::move(rec));
    } catch (const Error& e) {
      result.errors.push_back({line_number, e.kind(), e.what(), e.detail()});
    }
  }
  return result;
}

IngestResult load_jsonl(const std::string& path, bool lenient) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  IngestResult result = read_jsonl(in);
  if (in.bad()) throw Error(ErrorKind::kIo, "read failure on '" + path + "'");
  if (!lenient && !result.errors.empty()) {
    const LineError& first = result.errors.front();
    throw Error(first.kind, first.detail, first.line);
  }
  return result;
}

void write_jsonl(std::ostream& out, const std::vector<QuestionRecord>& records) {
  for (const auto& rec : records) out << serialize_record(rec) << '\n';
}

ValidationSummary summarize(const IngestResult& ingest) {
  ValidationSummary s;
  s.records = ingest.records.size();
  s.invalid_lines = ingest.errors.size();
  for (const auto& rec : ingest.records) {
    ++s.per_category[rec.category];
    s.samples_total += rec.samples.size();
    const FrequencyDistribution dist = tally(rec.samples, rec.options);
    s.dropped_samples += dist.dropped_sample_count;
    if (dist.dropped_sample_count > 0) ++s.records_with_drops;
    if (dist.valid_sample_count == 0) ++s.records_without_valid_samples;
    if (rec.model_probs) ++s.records_with_probs;
    if (rec.model_logits) ++s.records_with_logits;
  }
  return s;
}

}  // namespace cmcqa
