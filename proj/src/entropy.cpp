#include "cmcqa/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "cmcqa/error.hpp"

namespace cmcqa {

namespace {
constexpr double kNormalizationTolerance = 1e-9;
}

FrequencyDistribution tally(std::span<const std::string> samples, std::span<const Label> options) {
  FrequencyDistribution dist;
  dist.counts.assign(options.size(), 0);
  dist.probs.assign(options.size(), 0.0);
  for (const std::string& s : samples) {
    auto label = Label::parse(s);
    if (label && label->index() < options.size()) {
      ++dist.counts[label->index()];
      ++dist.valid_sample_count;
    } else {
      ++dist.dropped_sample_count;
    }
  }
  if (dist.valid_sample_count > 0) {
    const double denom = static_cast<double>(dist.valid_sample_count);
    for (std::size_t i = 0; i < options.size(); ++i) {
      dist.probs[i] = static_cast<double>(dist.counts[i]) / denom;
    }
  }
  return dist;
}

FrequencyDistribution estimate_frequencies(std::span<const std::string> samples,
                                           std::span<const Label> options) {
  if (samples.empty()) throw Error(ErrorKind::kDomain, "sample list is empty");
  FrequencyDistribution dist = tally(samples, options);
  if (dist.valid_sample_count == 0) {
    throw Error(ErrorKind::kDegenerateInput,
                "none of the " + std::to_string(samples.size()) + " samples is a valid option label");
  }
  return dist;
}

Label modal_answer(const FrequencyDistribution& dist) {
  if (dist.valid_sample_count == 0 || dist.counts.empty()) {
    throw Error(ErrorKind::kDegenerateInput, "modal answer of an empty distribution");
  }
  // max_element returns the first maximum, i.e. the lowest index on ties.
  auto it = std::max_element(dist.counts.begin(), dist.counts.end());
  return Label::from_index(static_cast<std::size_t>(it - dist.counts.begin()));
}

double log_base_value(LogBase base) {
  switch (base) {
    case LogBase::kE: return 1.0;
    case LogBase::kTwo: return std::numbers::ln2;
    case LogBase::kTen: return std::numbers::ln10;
  }
  return 1.0;
}

double predictive_entropy(std::span<const double> probs, LogBase base) {
  std::vector<double> sorted(probs.begin(), probs.end());
  double sum = 0.0;
  for (double p : sorted) {
    if (!(p >= 0.0)) throw Error(ErrorKind::kDomain, "negative or NaN probability");
    if (p > 1.0) throw Error(ErrorKind::kDomain, "probability exceeds 1");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    throw Error(ErrorKind::kDomain, "probabilities do not sum to 1");
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double h = 0.0;
  for (double p : sorted) {
    if (p > 0.0) h -= p * std::log(p);
  }
  // Rounding can leave a -0.0 or a tiny negative for point masses.
  if (h <= 0.0) return 0.0;
  return h / log_base_value(base);
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  for (double z : logits) {
    if (!std::isfinite(z)) throw Error(ErrorKind::kDomain, "non-finite logit");
  }
  const double shift = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - shift);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

bool correctness_label(const QuestionRecord& record, const FrequencyDistribution& dist) {
  return modal_answer(dist) == record.true_answer;
}

}  // namespace cmcqa
