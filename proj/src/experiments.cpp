#include "cmcqa/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "cmcqa/conformal.hpp"
#include "cmcqa/entropy.hpp"
#include "cmcqa/error.hpp"
#include "cmcqa/metrics.hpp"
#include "cmcqa/record.hpp"
#include "parallel.hpp"

namespace cmcqa {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::span<const std::size_t> values) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t v : values) {
    for (int b = 0; b < 8; ++b) {
      h ^= (static_cast<std::uint64_t>(v) >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

std::string list_ids(const std::vector<std::string>& ids) {
  constexpr std::size_t kShown = 10;
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < kShown; ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  if (ids.size() > kShown) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

}  // namespace

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 10; ++k) grid.push_back(k / 20.0);
  return grid;
}

void ExperimentConfig::validate() const {
  if (alpha_grid.empty()) throw Error(ErrorKind::kConfiguration, "alpha grid is empty");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] > 0.0 && alpha_grid[i] < 1.0)) {
      throw Error(ErrorKind::kConfiguration, "alpha values must lie in (0,1)");
    }
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
      throw Error(ErrorKind::kConfiguration, "alpha grid must be strictly ascending");
    }
  }
  if (trials < 1) throw Error(ErrorKind::kConfiguration, "trials must be >= 1");
  if (!(cal_ratio > 0.0 && cal_ratio < 1.0)) {
    throw Error(ErrorKind::kConfiguration, "cal_ratio must lie in (0,1)");
  }
}

const std::vector<double>& PreparedRecord::probs(ScoreSource source) const {
  if (source == ScoreSource::kFrequency) return frequency_probs;
  if (!logit_probs) {
    throw Error(ErrorKind::kConfiguration,
                "question '" + question_id + "' has no model_probs or model_logits");
  }
  return *logit_probs;
}

bool PreparedDataset::all_have_white_box() const {
  return std::all_of(records.begin(), records.end(),
                     [](const PreparedRecord& r) { return r.logit_probs.has_value(); });
}

std::vector<std::string> PreparedDataset::missing_white_box() const {
  std::vector<std::string> ids;
  for (const auto& r : records) {
    if (!r.logit_probs) ids.push_back(r.question_id);
  }
  return ids;
}

PreparedDataset prepare(std::span<const QuestionRecord> records, LogBase log_base,
                        std::string dataset_id) {
  PreparedDataset out;
  out.dataset_id = std::move(dataset_id);
  out.records.reserve(records.size());
  for (const QuestionRecord& rec : records) {
    FrequencyDistribution dist = tally(rec.samples, rec.options);
    if (dist.valid_sample_count == 0) {
      out.excluded_ids.push_back(rec.question_id);
      continue;
    }
    PreparedRecord p;
    p.question_id = rec.question_id;
    p.category = rec.category;
    p.num_options = rec.num_options();
    p.true_index = rec.true_answer.index();
    p.modal = modal_answer(dist);
    p.is_correct = p.modal == rec.true_answer;
    p.pe_frequency = predictive_entropy(dist.probs, log_base);
    p.dropped_samples = dist.dropped_sample_count;
    p.frequency_probs = std::move(dist.probs);
    p.logit_probs = white_box_probs(rec);
    if (p.logit_probs) p.pe_logit = predictive_entropy(*p.logit_probs, log_base);
    out.records.push_back(std::move(p));
  }
  return out;
}

std::vector<PreparedDataset> group_by_category(const PreparedDataset& dataset) {
  std::vector<PreparedDataset> groups;
  std::map<std::string, std::size_t> slot;
  for (const auto& r : dataset.records) {
    auto [it, inserted] = slot.emplace(r.category, groups.size());
    if (inserted) {
      PreparedDataset g;
      g.dataset_id = r.category.empty() ? std::string("(uncategorized)") : r.category;
      groups.push_back(std::move(g));
    }
    groups[it->second].records.push_back(r);
  }
  return groups;
}

std::uint64_t SplitIndices::fingerprint() const { return fnv1a(calibration); }

SplitIndices split_indices(std::size_t n, double cal_ratio, std::uint64_t seed) {
  if (!(cal_ratio > 0.0 && cal_ratio < 1.0)) {
    throw Error(ErrorKind::kSplit, "cal_ratio must lie in (0,1)");
  }
  const auto n_cal = static_cast<std::size_t>(std::llround(cal_ratio * static_cast<double>(n)));
  if (n_cal < 1 || n_cal >= n) {
    throw Error(ErrorKind::kSplit, "cannot split " + std::to_string(n) +
                                       " records with at least one per side at ratio " +
                                       std::to_string(cal_ratio));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  SplitIndices out;
  out.calibration.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_cal));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_cal), order.end());
  std::sort(out.calibration.begin(), out.calibration.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::pair<std::vector<QuestionRecord>, std::vector<QuestionRecord>> split(
    std::span<const QuestionRecord> records, double cal_ratio, std::uint64_t seed) {
  const SplitIndices idx = split_indices(records.size(), cal_ratio, seed);
  std::pair<std::vector<QuestionRecord>, std::vector<QuestionRecord>> out;
  for (std::size_t i : idx.calibration) out.first.push_back(records[i]);
  for (std::size_t i : idx.test) out.second.push_back(records[i]);
  return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index) {
  return splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(trial_index) + 1));
}

TrialResult run_trial(const PreparedDataset& dataset, const ExperimentConfig& config,
                      std::size_t trial_index) {
  config.validate();
  if (config.score_source == ScoreSource::kLogit && !dataset.all_have_white_box()) {
    throw Error(ErrorKind::kConfiguration,
                "logit score source requires model_probs or model_logits; missing on: " +
                    list_ids(dataset.missing_white_box()));
  }

  TrialResult result;
  result.trial_index = trial_index;
  result.trial_seed = trial_seed(config.master_seed, trial_index);
  const SplitIndices parts = split_indices(dataset.records.size(), config.cal_ratio, result.trial_seed);
  result.calibration_size = parts.calibration.size();
  result.test_size = parts.test.size();
  result.partition_fingerprint = parts.fingerprint();

  std::vector<double> pe_freq;
  std::vector<double> pe_logit;
  std::vector<std::uint8_t> incorrect;
  bool logit_available = true;
  for (std::size_t i : parts.test) {
    const PreparedRecord& r = dataset.records[i];
    pe_freq.push_back(r.pe_frequency);
    incorrect.push_back(r.is_correct ? 0 : 1);
    if (r.pe_logit) {
      pe_logit.push_back(*r.pe_logit);
    } else {
      logit_available = false;
    }
  }
  result.auroc_frequency = auroc(pe_freq, incorrect);
  if (logit_available) result.auroc_logit = auroc(pe_logit, incorrect);

  std::vector<double> cal_scores;
  cal_scores.reserve(parts.calibration.size());
  for (std::size_t i : parts.calibration) {
    const PreparedRecord& r = dataset.records[i];
    cal_scores.push_back(nonconformity(r.probs(config.score_source), r.true_index));
  }

  if (config.keep_sets) {
    result.test_indices = parts.test;
    result.member_masks.reserve(config.alpha_grid.size());
  }
  for (double alpha : config.alpha_grid) {
    const CalibrationOutput calib =
        conformal_quantile(cal_scores, alpha, config.quantile_rule, config.score_source);
    std::size_t misses = 0;
    std::size_t total_size = 0;
    std::size_t empty = 0;
    std::vector<std::uint32_t> masks;
    if (config.keep_sets) masks.reserve(parts.test.size());
    for (std::size_t i : parts.test) {
      const PreparedRecord& r = dataset.records[i];
      const std::uint32_t mask = prediction_mask(r.probs(config.score_source), calib);
      const auto size = static_cast<std::size_t>(std::popcount(mask));
      total_size += size;
      if (size == 0) ++empty;
      if (!mask_contains(mask, r.true_index)) ++misses;
      if (config.keep_sets) masks.push_back(mask);
    }
    const auto n_test = static_cast<double>(parts.test.size());
    result.per_alpha.push_back({alpha, static_cast<double>(misses) / n_test,
                                static_cast<double>(total_size) / n_test, empty, calib.q_hat});
    if (config.keep_sets) result.member_masks.push_back(std::move(masks));
  }
  return result;
}

std::vector<TrialResult> run_trials(const PreparedDataset& dataset, const ExperimentConfig& config) {
  config.validate();
  std::vector<TrialResult> results(config.trials);
  detail::parallel_for(config.trials, config.threads,
                       [&](std::size_t t) { results[t] = run_trial(dataset, config, t); });
  return results;
}

double standard_deviation(std::span<const double> values, StdDivisor divisor) {
  if (values.size() < 2) return 0.0;
  const double mu = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  const double denom = divisor == StdDivisor::kPopulation ? static_cast<double>(values.size())
                                                          : static_cast<double>(values.size() - 1);
  return std::sqrt(ss / denom);
}

ExperimentReport aggregate(std::span<const TrialResult> trials, const std::string& dataset_id,
                           ScoreSource source, StdDivisor divisor) {
  if (trials.empty()) throw Error(ErrorKind::kAggregation, "no trial results to aggregate");
  const std::size_t n_alpha = trials.front().per_alpha.size();
  for (const auto& t : trials) {
    bool same = t.per_alpha.size() == n_alpha;
    for (std::size_t a = 0; same && a < n_alpha; ++a) {
      same = t.per_alpha[a].alpha == trials.front().per_alpha[a].alpha;
    }
    if (!same) throw Error(ErrorKind::kAggregation, "trials do not share an alpha grid");
  }

  ExperimentReport report;
  report.dataset_id = dataset_id;
  report.score_source = source;
  report.trials = trials.size();
  report.std_divisor = divisor;
  report.records = trials.front().calibration_size + trials.front().test_size;

  std::vector<double> emr_v(trials.size());
  std::vector<double> apss_v(trials.size());
  std::vector<double> empty_v(trials.size());
  for (std::size_t a = 0; a < n_alpha; ++a) {
    for (std::size_t t = 0; t < trials.size(); ++t) {
      emr_v[t] = trials[t].per_alpha[a].emr;
      apss_v[t] = trials[t].per_alpha[a].apss;
      empty_v[t] = static_cast<double>(trials[t].per_alpha[a].empty_set_count);
    }
    AlphaAggregate agg;
    agg.alpha = trials.front().per_alpha[a].alpha;
    agg.emr_mean = mean_of(emr_v);
    agg.emr_std = standard_deviation(emr_v, divisor);
    agg.apss_mean = mean_of(apss_v);
    agg.apss_std = standard_deviation(apss_v, divisor);
    agg.empty_set_mean = mean_of(empty_v);
    report.per_alpha_aggregate.push_back(agg);
  }

  std::vector<double> aurocs;
  for (const auto& t : trials) {
    const auto& value = source == ScoreSource::kFrequency ? t.auroc_frequency : t.auroc_logit;
    if (value) {
      aurocs.push_back(*value);
    } else {
      ++report.auroc_undefined_trials;
    }
  }
  if (!aurocs.empty()) {
    report.auroc_mean = mean_of(aurocs);
    report.auroc_std = standard_deviation(aurocs, divisor);
  }
  return report;
}

ExperimentRun run_experiment(const PreparedDataset& dataset, const ExperimentConfig& config) {
  ExperimentRun run;
  run.trials = run_trials(dataset, config);
  run.report = aggregate(run.trials, dataset.dataset_id, config.score_source, config.std_divisor);
  run.report.excluded_records = dataset.excluded_ids.size();
  return run;
}

ComparisonTable compare_sources(const PreparedDataset& dataset, const ExperimentConfig& config) {
  config.validate();
  if (!dataset.all_have_white_box()) {
    throw Error(ErrorKind::kConfiguration,
                "source comparison requires model_probs or model_logits; missing on: " +
                    list_ids(dataset.missing_white_box()));
  }
  std::vector<PreparedDataset> groups;
  if (config.group_by_category) {
    groups = group_by_category(dataset);
  } else {
    groups.push_back(dataset);
  }

  ComparisonTable table;
  table.trials = config.trials;
  ExperimentConfig freq_cfg = config;
  freq_cfg.score_source = ScoreSource::kFrequency;
  ExperimentConfig logit_cfg = config;
  logit_cfg.score_source = ScoreSource::kLogit;

  for (const PreparedDataset& g : groups) {
    ExperimentRun freq = run_experiment(g, freq_cfg);
    ExperimentRun logit = run_experiment(g, logit_cfg);
    for (std::size_t t = 0; t < freq.trials.size(); ++t) {
      if (freq.trials[t].partition_fingerprint != logit.trials[t].partition_fingerprint) {
        table.partitions_match = false;
      }
    }
    ComparisonRow row;
    row.group = g.dataset_id;
    row.records = g.records.size();
    row.frequency_mean = freq.report.auroc_mean;
    row.frequency_std = freq.report.auroc_std;
    row.logit_mean = logit.report.auroc_mean;
    row.logit_std = logit.report.auroc_std;
    if (row.frequency_mean && row.logit_mean) row.delta = *row.frequency_mean - *row.logit_mean;
    table.rows.push_back(std::move(row));
    table.frequency_reports.push_back(std::move(freq.report));
    table.logit_reports.push_back(std::move(logit.report));
  }

  auto column_mean = [&](auto member) -> std::optional<double> {
    std::vector<double> values;
    for (const auto& r : table.rows) {
      if (r.*member) values.push_back(*(r.*member));
    }
    if (values.empty()) return std::nullopt;
    return mean_of(values);
  };
  table.average.group = "Average";
  for (const auto& r : table.rows) table.average.records += r.records;
  table.average.logit_mean = column_mean(&ComparisonRow::logit_mean);
  table.average.frequency_mean = column_mean(&ComparisonRow::frequency_mean);
  if (table.average.logit_mean && table.average.frequency_mean) {
    table.average.delta = *table.average.frequency_mean - *table.average.logit_mean;
  }
  return table;
}

}  // namespace cmcqa
