#pragma once

// Shared domain model for frequency-based uncertainty quantification and
// split conformal prediction over multiple-choice questions.
//
// Per-option quantities (counts, probabilities, logits) are stored as dense
// vectors indexed by option position; position i carries label 'A' + i.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmcqa {

// Single uppercase option letter A..Z.
class Label {
 public:
  static constexpr std::size_t kMaxOptions = 26;

  constexpr Label() = default;

  // Throws Error(kDomain) when index >= kMaxOptions.
  static Label from_index(std::size_t index);
  // Accepts exactly one character in A..Z.
  static std::optional<Label> parse(std::string_view text);

  constexpr std::size_t index() const { return static_cast<std::size_t>(letter_ - 'A'); }
  constexpr char letter() const { return letter_; }
  std::string str() const { return std::string(1, letter_); }

  constexpr auto operator<=>(const Label&) const = default;

 private:
  constexpr explicit Label(char letter) : letter_(letter) {}
  char letter_ = 'A';
};

// Contiguous labels A, B, ... for k options.
std::vector<Label> labels_for(std::size_t num_options);

enum class ScoreSource { kFrequency, kLogit };
enum class LogBase { kE, kTwo, kTen };
enum class QuantileRule { kCeil, kFloor };
enum class StdDivisor { kPopulation, kSample };

std::string_view to_string(ScoreSource source);
std::string_view to_string(LogBase base);
std::string_view to_string(QuantileRule rule);
std::string_view to_string(StdDivisor divisor);
ScoreSource parse_score_source(std::string_view text);
LogBase parse_log_base(std::string_view text);
QuantileRule parse_quantile_rule(std::string_view text);

struct QuestionRecord {
  std::string question_id;
  std::string category;
  std::vector<Label> options;
  Label true_answer;
  // Normalized sample strings; may still contain off-space answers.
  std::vector<std::string> samples;
  std::optional<std::vector<double>> model_probs;
  std::optional<std::vector<double>> model_logits;
  // Raw JSON text of the passthrough `schema_version` field.
  std::optional<std::string> schema_version;

  std::size_t num_options() const { return options.size(); }
  bool has_white_box() const { return model_probs.has_value() || model_logits.has_value(); }

  bool operator==(const QuestionRecord&) const = default;
};

struct FrequencyDistribution {
  std::vector<std::uint32_t> counts;
  std::vector<double> probs;
  std::size_t valid_sample_count = 0;
  std::size_t dropped_sample_count = 0;

  std::size_t num_options() const { return counts.size(); }
};

// Conformal threshold. An empty q_hat is the full-set sentinel, produced when
// the required order statistic lies beyond the calibration size.
struct CalibrationOutput {
  std::optional<double> q_hat;
  double alpha = 0.1;
  std::size_t n = 0;
  ScoreSource score_source = ScoreSource::kFrequency;

  bool full_set() const { return !q_hat.has_value(); }
};

struct PredictionSet {
  std::string question_id;
  std::vector<Label> members;
  bool covered = false;

  std::size_t size() const { return members.size(); }
};

struct AlphaResult {
  double alpha = 0.0;
  double emr = 0.0;
  double apss = 0.0;
  std::size_t empty_set_count = 0;
  std::optional<double> q_hat;  // empty when full-set sentinel
};

struct TrialResult {
  std::size_t trial_index = 0;
  std::uint64_t trial_seed = 0;
  std::size_t calibration_size = 0;
  std::size_t test_size = 0;
  std::uint64_t partition_fingerprint = 0;
  std::optional<double> auroc_frequency;  // empty = undefined (single class)
  std::optional<double> auroc_logit;
  std::vector<AlphaResult> per_alpha;     // ascending alpha
  // Only filled when ExperimentConfig::keep_sets is set:
  // member_masks[a][t] is the option bitmask of test record t at alpha a.
  std::vector<std::vector<std::uint32_t>> member_masks;
  std::vector<std::size_t> test_indices;
};

struct AlphaAggregate {
  double alpha = 0.0;
  double emr_mean = 0.0;
  double emr_std = 0.0;
  double apss_mean = 0.0;
  double apss_std = 0.0;
  double empty_set_mean = 0.0;

  bool operator==(const AlphaAggregate&) const = default;
};

struct ExperimentReport {
  std::string dataset_id;
  ScoreSource score_source = ScoreSource::kFrequency;
  std::size_t trials = 0;
  std::size_t records = 0;
  std::size_t excluded_records = 0;
  std::vector<AlphaAggregate> per_alpha_aggregate;
  std::optional<double> auroc_mean;
  std::optional<double> auroc_std;
  std::size_t auroc_undefined_trials = 0;
  StdDivisor std_divisor = StdDivisor::kPopulation;

  bool operator==(const ExperimentReport&) const = default;
};

}  // namespace cmcqa
