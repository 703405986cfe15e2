#include "cmcqa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "cmcqa/error.hpp"
#include "cmcqa/experiments.hpp"
#include "parallel.hpp"

namespace cmcqa {

namespace {

constexpr double kDistributionTolerance = 1e-12;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

std::size_t draw_categorical(std::mt19937_64& rng, const std::vector<double>& probs) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  return last_positive;
}

std::vector<double> draw_distribution(const SyntheticModelSpec& spec, std::size_t question,
                                      std::size_t k, std::mt19937_64& rng) {
  const DifficultyProfile& profile = spec.profile;
  std::vector<double> p(k, 0.0);
  switch (profile.kind) {
    case DifficultyProfile::Kind::kPointMass:
      p[profile.point_index] = 1.0;
      break;
    case DifficultyProfile::Kind::kUniform:
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(k));
      break;
    case DifficultyProfile::Kind::kDirichlet: {
      std::gamma_distribution<double> gamma(profile.concentration, 1.0);
      double total = 0.0;
      for (double& v : p) {
        v = gamma(rng);
        total += v;
      }
      if (!(total > 0.0)) {
        // Every draw underflowed; fall back to a point mass on a random option.
        std::fill(p.begin(), p.end(), 0.0);
        p[uniform_index(rng, k)] = 1.0;
      } else {
        for (double& v : p) v /= total;
      }
      break;
    }
    case DifficultyProfile::Kind::kExplicit:
      p = profile.distributions[question % profile.distributions.size()];
      break;
  }
  return p;
}

std::size_t draw_truth(const SyntheticModelSpec& spec, const std::vector<double>& p,
                       std::mt19937_64& rng) {
  const std::size_t k = p.size();
  switch (spec.truth_rule) {
    case TruthRule::kAligned: {
      const auto argmax = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
      if (uniform01(rng) < spec.p_align) return argmax;
      const std::size_t other = uniform_index(rng, k - 1);
      return other >= argmax ? other + 1 : other;
    }
    case TruthRule::kAdversarial:
      return uniform_index(rng, k);
    case TruthRule::kCalibrated:
      return draw_categorical(rng, p);
  }
  return 0;
}

}  // namespace

std::string_view to_string(TruthRule rule) {
  switch (rule) {
    case TruthRule::kAligned: return "aligned";
    case TruthRule::kAdversarial: return "adversarial";
    case TruthRule::kCalibrated: return "calibrated";
  }
  return "calibrated";
}

TruthRule parse_truth_rule(std::string_view text) {
  if (text == "aligned") return TruthRule::kAligned;
  if (text == "adversarial") return TruthRule::kAdversarial;
  if (text == "calibrated") return TruthRule::kCalibrated;
  throw Error(ErrorKind::kConfiguration, "unknown truth rule '" + std::string(text) + "'");
}

std::size_t SyntheticModelSpec::options_for(std::size_t question) const {
  return options_per_question.size() == 1 ? options_per_question.front()
                                          : options_per_question[question];
}

void SyntheticModelSpec::validate() const {
  if (num_questions < 1) throw Error(ErrorKind::kSpec, "num_questions must be >= 1");
  if (options_per_question.empty() ||
      (options_per_question.size() != 1 && options_per_question.size() != num_questions)) {
    throw Error(ErrorKind::kSpec, "options_per_question must hold one value or one per question");
  }
  for (std::size_t k : options_per_question) {
    if (k < 2 || k > Label::kMaxOptions) {
      throw Error(ErrorKind::kSpec, "option count must lie in [2, 26]");
    }
  }
  if (!(p_align >= 0.0 && p_align <= 1.0)) throw Error(ErrorKind::kSpec, "p_align must lie in [0,1]");
  switch (profile.kind) {
    case DifficultyProfile::Kind::kPointMass:
      for (std::size_t q = 0; q < num_questions; ++q) {
        if (profile.point_index >= options_for(q)) {
          throw Error(ErrorKind::kSpec, "point-mass index exceeds option count");
        }
      }
      break;
    case DifficultyProfile::Kind::kDirichlet:
      if (!(profile.concentration > 0.0) || !std::isfinite(profile.concentration)) {
        throw Error(ErrorKind::kSpec, "Dirichlet concentration must be positive");
      }
      break;
    case DifficultyProfile::Kind::kExplicit:
      if (profile.distributions.empty()) {
        throw Error(ErrorKind::kSpec, "explicit profile needs at least one distribution");
      }
      for (std::size_t q = 0; q < num_questions; ++q) {
        const auto& d = profile.distributions[q % profile.distributions.size()];
        if (d.size() != options_for(q)) {
          throw Error(ErrorKind::kSpec, "distribution length does not match option count");
        }
        double total = 0.0;
        for (double v : d) {
          if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::kSpec, "probability outside [0,1]");
          total += v;
        }
        if (std::abs(total - 1.0) > kDistributionTolerance) {
          throw Error(ErrorKind::kSpec, "distribution does not sum to 1");
        }
      }
      break;
    case DifficultyProfile::Kind::kUniform:
      break;
  }
}

std::vector<QuestionRecord> generate_dataset(const SyntheticModelSpec& spec,
                                             std::size_t samples_per_question) {
  spec.validate();
  if (samples_per_question < 1) throw Error(ErrorKind::kSpec, "samples per question must be >= 1");

  std::vector<QuestionRecord> out(spec.num_questions);
  for (std::size_t q = 0; q < spec.num_questions; ++q) {
    std::mt19937_64 rng(trial_seed(spec.seed, q));
    const std::size_t k = spec.options_for(q);
    std::vector<double> p = draw_distribution(spec, q, k, rng);
    const std::size_t truth = draw_truth(spec, p, rng);

    QuestionRecord& rec = out[q];
    char id[32];
    std::snprintf(id, sizeof id, "synth-%06zu", q);
    rec.question_id = id;
    if (!spec.categories.empty()) rec.category = spec.categories[q % spec.categories.size()];
    rec.options = labels_for(k);
    rec.true_answer = Label::from_index(truth);
    rec.samples.reserve(samples_per_question);
    for (std::size_t m = 0; m < samples_per_question; ++m) {
      rec.samples.push_back(Label::from_index(draw_categorical(rng, p)).str());
    }
    rec.model_probs = std::move(p);
  }
  return out;
}

std::vector<CoverageStats> coverage_oracle(const SyntheticModelSpec& spec, std::size_t samples_per_question,
                                           std::span<const double> alphas, std::size_t trials,
                                           const CoverageOptions& options) {
  if (trials < 1) throw Error(ErrorKind::kConfiguration, "trials must be >= 1");
  std::vector<double> grid(alphas.begin(), alphas.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<TrialResult> results(trials);
  detail::parallel_for(trials, options.threads, [&](std::size_t t) {
    SyntheticModelSpec trial_spec = spec;
    trial_spec.seed = trial_seed(spec.seed, t);
    const auto records = generate_dataset(trial_spec, samples_per_question);
    const PreparedDataset prepared = prepare(records, LogBase::kE, "synthetic");
    ExperimentConfig cfg;
    cfg.alpha_grid = grid;
    cfg.trials = 1;
    cfg.cal_ratio = options.cal_ratio;
    cfg.score_source = options.score_source;
    cfg.quantile_rule = options.quantile_rule;
    cfg.master_seed = trial_seed(trial_spec.seed, 0);
    results[t] = run_trial(prepared, cfg, 0);
  });

  std::vector<CoverageStats> stats;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    CoverageStats s;
    s.alpha = grid[a];
    double apss_total = 0.0;
    for (const auto& r : results) {
      s.per_trial_coverage.push_back(1.0 - r.per_alpha[a].emr);
      apss_total += r.per_alpha[a].apss;
    }
    s.mean_coverage = std::accumulate(s.per_trial_coverage.begin(), s.per_trial_coverage.end(), 0.0) /
                      static_cast<double>(trials);
    s.std_coverage = standard_deviation(s.per_trial_coverage, StdDivisor::kSample);
    s.standard_error = s.std_coverage / std::sqrt(static_cast<double>(trials));
    s.mean_apss = apss_total / static_cast<double>(trials);
    stats.push_back(std::move(s));
  }
  return stats;
}

}  // namespace cmcqa
