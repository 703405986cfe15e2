#include "cmcqa/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <sstream>

#include "cmcqa/error.hpp"

namespace cmcqa {

using ojson = nlohmann::ordered_json;

namespace {

Cell optional_cell(const std::optional<double>& v) {
  if (v) return *v;
  return std::monostate{};
}

std::string cell_text(const Cell& cell, std::string_view blank) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return std::string(blank);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_significant(v);
        } else {
          return std::to_string(v);
        }
      },
      cell);
}

ojson cell_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> ojson {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
          return v;
        } else {
          return v;
        }
      },
      cell);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::optional<double> opt_number(const ojson& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

ojson opt_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

}  // namespace

std::string_view to_string(Format format) {
  switch (format) {
    case Format::kCsv: return "csv";
    case Format::kJson: return "json";
    case Format::kText: return "text";
  }
  return "csv";
}

Format parse_format(std::string_view text) {
  if (text == "csv") return Format::kCsv;
  if (text == "json") return Format::kJson;
  if (text == "text") return Format::kText;
  throw Error(ErrorKind::kFormat, "unsupported format '" + std::string(text) + "'");
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw Error(ErrorKind::kFormat, "row has " + std::to_string(row.size()) + " cells, expected " +
                                        std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string format_significant(double value, int digits) {
  if (std::isnan(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) value = 0.0;  // drop the sign of -0.0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.*g", digits, value);
  return buf;
}

std::string render_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += csv_field(table.columns[c]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_field(cell_text(row[c], ""));
    }
    out += '\n';
  }
  return out;
}

std::string render_text(const Table& table, std::string_view title) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back(table.columns);
  for (const auto& row : table.rows) {
    std::vector<std::string> line;
    for (const auto& cell : row) line.push_back(cell_text(cell, "NA"));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(table.columns.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  if (!title.empty()) {
    out += title;
    out += '\n';
  }
  auto rule = [&] {
    std::size_t total = 0;
    for (std::size_t w : width) total += w + 2;
    out += std::string(total > 2 ? total - 2 : total, '-');
    out += '\n';
  };
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (r <= 1) rule();
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      const bool numeric = r > 0 && c > 0;
      const std::string& s = cells[r][c];
      const std::string pad(width[c] - s.size(), ' ');
      out += numeric ? pad + s : s + pad;
      if (c + 1 < cells[r].size()) out += "  ";
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  rule();
  return out;
}

ojson render_json_value(const ReportDocument& doc) {
  ojson out;
  out["manifest"] = to_json(doc.manifest);
  out["columns"] = doc.body.columns;
  ojson rows = ojson::array();
  for (const auto& row : doc.body.rows) {
    ojson obj = ojson::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[doc.body.columns[c]] = cell_json(row[c]);
    rows.push_back(std::move(obj));
  }
  out["rows"] = std::move(rows);
  if (!doc.extra.is_null()) out["payload"] = doc.extra;
  return out;
}

std::string render(const ReportDocument& doc) {
  switch (doc.format) {
    case Format::kCsv: return render_csv(doc.body);
    case Format::kJson: return render_json_value(doc).dump(2) + "\n";
    case Format::kText: return render_text(doc.body, doc.title);
  }
  throw Error(ErrorKind::kFormat, "unsupported format");
}

ojson to_json(const RunManifest& manifest) {
  ojson out;
  out["command"] = manifest.command;
  out["config"] = manifest.config;
  out["input_digest"] = manifest.input_digest;
  out["tool_version"] = manifest.tool_version;
  out["timestamp"] = manifest.timestamp;
  return out;
}

ojson to_json(const ExperimentConfig& config) {
  ojson out;
  out["alpha_grid"] = config.alpha_grid;
  out["trials"] = config.trials;
  out["cal_ratio"] = config.cal_ratio;
  out["score_source"] = std::string(to_string(config.score_source));
  out["log_base"] = std::string(to_string(config.log_base));
  out["master_seed"] = config.master_seed;
  out["group_by_category"] = config.group_by_category;
  out["quantile_rule"] = std::string(to_string(config.quantile_rule));
  out["std_divisor"] = std::string(to_string(config.std_divisor));
  return out;
}

ojson to_json(const ExperimentReport& report) {
  ojson out;
  out["dataset_id"] = report.dataset_id;
  out["score_source"] = std::string(to_string(report.score_source));
  out["trials"] = report.trials;
  out["records"] = report.records;
  out["excluded_records"] = report.excluded_records;
  out["std_divisor"] = std::string(to_string(report.std_divisor));
  out["auroc_mean"] = opt_json(report.auroc_mean);
  out["auroc_std"] = opt_json(report.auroc_std);
  out["auroc_undefined_trials"] = report.auroc_undefined_trials;
  ojson per_alpha = ojson::array();
  for (const auto& a : report.per_alpha_aggregate) {
    ojson row;
    row["alpha"] = a.alpha;
    row["emr_mean"] = a.emr_mean;
    row["emr_std"] = a.emr_std;
    row["apss_mean"] = a.apss_mean;
    row["apss_std"] = a.apss_std;
    row["empty_set_mean"] = a.empty_set_mean;
    per_alpha.push_back(std::move(row));
  }
  out["per_alpha_aggregate"] = std::move(per_alpha);
  return out;
}

ExperimentReport report_from_json(const ojson& value) {
  try {
    ExperimentReport r;
    r.dataset_id = value.at("dataset_id").get<std::string>();
    r.score_source = parse_score_source(value.at("score_source").get<std::string>());
    r.trials = value.at("trials").get<std::size_t>();
    r.records = value.at("records").get<std::size_t>();
    r.excluded_records = value.at("excluded_records").get<std::size_t>();
    r.std_divisor = value.at("std_divisor").get<std::string>() == "sample" ? StdDivisor::kSample
                                                                           : StdDivisor::kPopulation;
    r.auroc_mean = opt_number(value, "auroc_mean");
    r.auroc_std = opt_number(value, "auroc_std");
    r.auroc_undefined_trials = value.at("auroc_undefined_trials").get<std::size_t>();
    for (const auto& row : value.at("per_alpha_aggregate")) {
      AlphaAggregate a;
      a.alpha = row.at("alpha").get<double>();
      a.emr_mean = row.at("emr_mean").get<double>();
      a.emr_std = row.at("emr_std").get<double>();
      a.apss_mean = row.at("apss_mean").get<double>();
      a.apss_std = row.at("apss_std").get<double>();
      a.empty_set_mean = row.at("empty_set_mean").get<double>();
      r.per_alpha_aggregate.push_back(a);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed report JSON: ") + e.what());
  }
}

Table score_table(const PreparedDataset& dataset) {
  Table t;
  t.columns = {"question_id", "category",   "modal_answer",   "is_correct",
               "pe_frequency", "pe_logit", "dropped_samples"};
  for (const auto& r : dataset.records) {
    t.add_row({r.question_id, r.category, r.modal.str(), r.is_correct, r.pe_frequency,
               optional_cell(r.pe_logit), static_cast<std::int64_t>(r.dropped_samples)});
  }
  return t;
}

Table sweep_table(std::span<const ExperimentReport> reports) {
  Table t;
  t.columns = {"group",    "score_source", "alpha",     "trials",        "emr_mean",
               "emr_std",  "apss_mean",    "apss_std",  "empty_set_mean"};
  for (const auto& rep : reports) {
    for (const auto& a : rep.per_alpha_aggregate) {
      t.add_row({rep.dataset_id, std::string(to_string(rep.score_source)), a.alpha,
                 static_cast<std::int64_t>(rep.trials), a.emr_mean, a.emr_std, a.apss_mean,
                 a.apss_std, a.empty_set_mean});
    }
  }
  return t;
}

Table comparison_table(const ComparisonTable& comparison) {
  Table t;
  t.columns = {"group", "Model logit", "Sampling set", "delta", "logit_std", "frequency_std", "records"};
  auto add = [&](const ComparisonRow& r) {
    t.add_row({r.group, optional_cell(r.logit_mean), optional_cell(r.frequency_mean),
               optional_cell(r.delta), optional_cell(r.logit_std), optional_cell(r.frequency_std),
               static_cast<std::int64_t>(r.records)});
  };
  for (const auto& r : comparison.rows) add(r);
  add(comparison.average);
  return t;
}

std::string content_digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string current_timestamp() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

}  // namespace cmcqa
