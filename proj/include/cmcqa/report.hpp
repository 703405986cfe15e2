#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cmcqa/experiments.hpp"
#include "cmcqa/types.hpp"
#include "json.hpp"

namespace cmcqa {

enum class Format { kCsv, kJson, kText };

std::string_view to_string(Format format);
// Throws Error(kFormat) on anything but csv, json, text.
Format parse_format(std::string_view text);

struct RunManifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::string input_digest;
  std::string tool_version = CMCQA_VERSION;
  std::string timestamp;
};

// Blank cell (monostate) marks an absent or undefined value.
using Cell = std::variant<std::monostate, std::string, std::int64_t, double, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  // Throws Error(kFormat) when the row width differs from the column count.
  void add_row(std::vector<Cell> row);
};

struct ReportDocument {
  RunManifest manifest;
  Table body;
  Format format = Format::kCsv;
  std::string title;                      // TEXT heading
  nlohmann::ordered_json extra = nullptr; // structured payload for JSON
};

// CSV: header + rows, '\n' line endings, RFC 4180 quoting, 6 significant
// digits for reals. The manifest is not part of CSV output.
// JSON: {"manifest", "columns", "rows", ["payload"]}, reals at full precision.
// TEXT: aligned plain-text table.
std::string render(const ReportDocument& doc);
std::string render_csv(const Table& table);
std::string render_text(const Table& table, std::string_view title = {});
nlohmann::ordered_json render_json_value(const ReportDocument& doc);

std::string format_significant(double value, int digits = 6);

nlohmann::ordered_json to_json(const RunManifest& manifest);
nlohmann::ordered_json to_json(const ExperimentConfig& config);
nlohmann::ordered_json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::ordered_json& value);

Table score_table(const PreparedDataset& dataset);
Table sweep_table(std::span<const ExperimentReport> reports);
Table comparison_table(const ComparisonTable& comparison);

// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string content_digest(std::string_view bytes);
// UTC ISO-8601; honours SOURCE_DATE_EPOCH when set.
std::string current_timestamp();

}  // namespace cmcqa
