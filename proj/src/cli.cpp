#include "cmcqa/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "cmcqa/error.hpp"
#include "cmcqa/experiments.hpp"
#include "cmcqa/record.hpp"
#include "cmcqa/report.hpp"
#include "cmcqa/synthetic.hpp"

namespace cmcqa {

namespace {

using ojson = nlohmann::ordered_json;

struct ExperimentFlags {
  std::vector<double> alphas;
  std::size_t trials = 100;
  double cal_ratio = 0.5;
  std::uint64_t seed = 0;
  std::string score_source = "frequency";
  std::string log_base = "e";
  bool group_by_category = false;
  std::string quantile_rule = "ceil";
  std::string std_divisor = "population";
};

struct OutputFlags {
  std::string out;
  std::string format = "csv";
};

struct LoadedInput {
  IngestResult ingest;
  std::string digest;
  std::string dataset_id;
};

unsigned threads_from_env() {
  const char* value = std::getenv("CONFORMAL_MCQA_THREADS");
  if (!value || !*value) return 0;
  char* end = nullptr;
  const unsigned long n = std::strtoul(value, &end, 10);
  if (end == value || *end != '\0') {
    throw Error(ErrorKind::kConfiguration, "CONFORMAL_MCQA_THREADS must be a non-negative integer");
  }
  return static_cast<unsigned>(n);
}

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--alpha", f.alphas, "Risk level(s); repeatable or comma separated")
      ->delimiter(',');
  cmd->add_option("--trials", f.trials, "Random calibration/test splits")->capture_default_str();
  cmd->add_option("--cal-ratio", f.cal_ratio, "Calibration fraction")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Master seed")->capture_default_str();
  cmd->add_option("--score-source", f.score_source, "Probability source")
      ->transform(CLI::IsMember({"frequency", "logit"}, CLI::ignore_case))
      ->capture_default_str();
  cmd->add_option("--log-base", f.log_base, "Entropy log base")
      ->check(CLI::IsMember({"e", "2", "10"}))
      ->capture_default_str();
  cmd->add_flag("--group-by-category", f.group_by_category, "Independent runs per category");
  cmd->add_option("--quantile-rule", f.quantile_rule, "Order-statistic rank rounding")
      ->check(CLI::IsMember({"ceil", "floor"}))
      ->capture_default_str();
  cmd->add_option("--std", f.std_divisor, "Standard deviation divisor")
      ->check(CLI::IsMember({"population", "sample"}))
      ->capture_default_str();
}

void add_output_flags(CLI::App* cmd, OutputFlags& f, std::vector<std::string> formats) {
  cmd->add_option("--out", f.out, "Output path (default: stdout)");
  cmd->add_option("--format", f.format, "Output format")
      ->check(CLI::IsMember(formats))
      ->capture_default_str();
}

ExperimentConfig make_config(const ExperimentFlags& f) {
  ExperimentConfig cfg;
  if (!f.alphas.empty()) {
    cfg.alpha_grid = f.alphas;
    std::sort(cfg.alpha_grid.begin(), cfg.alpha_grid.end());
    cfg.alpha_grid.erase(std::unique(cfg.alpha_grid.begin(), cfg.alpha_grid.end()), cfg.alpha_grid.end());
  }
  cfg.trials = f.trials;
  cfg.cal_ratio = f.cal_ratio;
  cfg.master_seed = f.seed;
  cfg.score_source = parse_score_source(f.score_source);
  cfg.log_base = parse_log_base(f.log_base);
  cfg.group_by_category = f.group_by_category;
  cfg.quantile_rule = parse_quantile_rule(f.quantile_rule);
  cfg.std_divisor = f.std_divisor == "sample" ? StdDivisor::kSample : StdDivisor::kPopulation;
  cfg.threads = threads_from_env();
  cfg.validate();
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out << bytes;
  if (!out) throw Error(ErrorKind::kIo, "write failure on '" + path + "'");
}

LoadedInput load_input(const std::string& path, bool lenient, std::ostream& err) {
  LoadedInput in;
  const std::string bytes = read_file(path);
  in.digest = content_digest(bytes);
  in.dataset_id = std::filesystem::path(path).stem().string();
  std::istringstream stream(bytes);
  in.ingest = read_jsonl(stream);
  for (const auto& w : in.ingest.warnings) err << "warning: " << w << '\n';
  if (!in.ingest.errors.empty()) {
    if (!lenient) {
      const LineError& first = in.ingest.errors.front();
      throw Error(first.kind, first.detail, first.line);
    }
    for (const auto& e : in.ingest.errors) err << "skipped " << e.message << '\n';
  }
  return in;
}

PreparedDataset prepare_input(const LoadedInput& in, LogBase base, std::ostream& err) {
  PreparedDataset ds = prepare(in.ingest.records, base, in.dataset_id);
  if (!ds.excluded_ids.empty()) {
    err << "excluded " << ds.excluded_ids.size() << " question(s) without a valid sample\n";
  }
  return ds;
}

RunManifest make_manifest(const std::string& command, ojson config, const std::string& digest) {
  RunManifest m;
  m.command = command;
  m.config = std::move(config);
  m.input_digest = digest;
  m.timestamp = current_timestamp();
  return m;
}

// Without --out the primary rendering goes to stdout. With --out it goes to
// the file, and CSV output gets a JSON companion (<out>.json) that carries
// the manifest and payload.
void emit(ReportDocument doc, const OutputFlags& flags, std::ostream& out) {
  doc.format = parse_format(flags.format);
  const std::string primary = render(doc);
  if (flags.out.empty()) {
    out << primary;
    return;
  }
  write_file(flags.out, primary);
  if (doc.format == Format::kCsv) {
    ReportDocument companion = doc;
    companion.format = Format::kJson;
    write_file(flags.out + ".json", render(companion));
  }
}

int cmd_validate(const std::string& input, bool lenient, std::ostream& out, std::ostream& err) {
  const std::string bytes = read_file(input);
  std::istringstream stream(bytes);
  const IngestResult ingest = read_jsonl(stream);
  for (const auto& w : ingest.warnings) err << "warning: " << w << '\n';
  for (const auto& e : ingest.errors) err << e.message << '\n';
  const ValidationSummary s = summarize(ingest);
  out << s.records << " records, " << s.invalid_lines << (lenient ? " skipped" : " invalid") << '\n';
  out << "categories:";
  if (s.per_category.empty()) out << " none";
  for (const auto& [cat, n] : s.per_category) {
    out << ' ' << (cat.empty() ? std::string("(uncategorized)") : cat) << '=' << n;
  }
  out << '\n';
  out << "samples: " << s.samples_total << " total, " << s.dropped_samples << " dropped, "
      << s.records_with_drops << " records with drops, " << s.records_without_valid_samples
      << " records without valid samples\n";
  out << "white-box: " << s.records_with_probs << " with model_probs, " << s.records_with_logits
      << " with model_logits\n";
  if (!ingest.errors.empty() && !lenient) return kExitSchema;
  return kExitOk;
}

int cmd_score(const std::string& input, const std::string& log_base, bool lenient,
              const OutputFlags& flags, std::ostream& out, std::ostream& err) {
  const LogBase base = parse_log_base(log_base);
  const LoadedInput in = load_input(input, lenient, err);
  const PreparedDataset ds = prepare_input(in, base, err);
  ojson config;
  config["log_base"] = std::string(to_string(base));
  config["lenient"] = lenient;
  ReportDocument doc;
  doc.manifest = make_manifest("score", std::move(config), in.digest);
  doc.body = score_table(ds);
  doc.title = "Per-question predictive entropy";
  emit(std::move(doc), flags, out);
  return kExitOk;
}

int cmd_compare(const std::string& input, const ExperimentFlags& ef, bool lenient,
                const OutputFlags& flags, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = make_config(ef);
  const LoadedInput in = load_input(input, lenient, err);
  const PreparedDataset ds = prepare_input(in, cfg.log_base, err);
  const ComparisonTable cmp = compare_sources(ds, cfg);
  if (!cmp.partitions_match) {
    throw Error(ErrorKind::kEvaluation, "score sources were evaluated on different partitions");
  }
  ReportDocument doc;
  doc.manifest = make_manifest("compare", to_json(cfg), in.digest);
  doc.body = comparison_table(cmp);
  doc.title = "Logit vs Frequency Entropy (AUROC, mean over " + std::to_string(cmp.trials) +
              " trial(s))";
  ojson payload;
  payload["frequency"] = ojson::array();
  payload["logit"] = ojson::array();
  for (const auto& r : cmp.frequency_reports) payload["frequency"].push_back(to_json(r));
  for (const auto& r : cmp.logit_reports) payload["logit"].push_back(to_json(r));
  doc.extra = std::move(payload);
  if (!flags.out.empty()) out << render_text(doc.body, doc.title);
  emit(std::move(doc), flags, out);
  return kExitOk;
}

int cmd_sweep(const std::string& input, const ExperimentFlags& ef, bool lenient,
              const OutputFlags& flags, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = make_config(ef);
  const LoadedInput in = load_input(input, lenient, err);
  const PreparedDataset ds = prepare_input(in, cfg.log_base, err);
  std::vector<PreparedDataset> groups;
  if (cfg.group_by_category) {
    groups = group_by_category(ds);
  } else {
    groups.push_back(ds);
  }
  std::vector<ExperimentReport> reports;
  for (const auto& g : groups) {
    ExperimentRun run = run_experiment(g, cfg);
    run.report.excluded_records = cfg.group_by_category ? 0 : ds.excluded_ids.size();
    reports.push_back(std::move(run.report));
  }
  ReportDocument doc;
  doc.manifest = make_manifest("sweep", to_json(cfg), in.digest);
  doc.body = sweep_table(reports);
  doc.title = "EMR / APSS sweep";
  ojson payload = ojson::array();
  for (const auto& r : reports) payload.push_back(to_json(r));
  doc.extra = std::move(payload);
  emit(std::move(doc), flags, out);
  return kExitOk;
}

struct SynthFlags {
  std::size_t questions = 1000;
  std::size_t options = 4;
  std::size_t samples = 20;
  std::uint64_t seed = 0;
  std::string profile = "dirichlet";
  double concentration = 1.0;
  std::string rule = "calibrated";
  double p_align = 1.0;
  std::vector<std::string> categories;
};

void add_synth_flags(CLI::App* cmd, SynthFlags& f, bool with_seed = true) {
  cmd->add_option("--questions", f.questions, "Number of questions")->capture_default_str();
  cmd->add_option("--options", f.options, "Options per question (K)")->capture_default_str();
  cmd->add_option("--samples", f.samples, "Samples per question (M)")->capture_default_str();
  if (with_seed) cmd->add_option("--seed", f.seed, "Generator seed")->capture_default_str();
  cmd->add_option("--profile", f.profile, "Difficulty profile")
      ->check(CLI::IsMember({"dirichlet", "uniform", "point"}))
      ->capture_default_str();
  cmd->add_option("--concentration", f.concentration, "Symmetric Dirichlet concentration")
      ->capture_default_str();
  cmd->add_option("--rule", f.rule, "Reference answer rule")
      ->check(CLI::IsMember({"calibrated", "aligned", "adversarial"}))
      ->capture_default_str();
  cmd->add_option("--p-align", f.p_align, "P(argmax is correct) for the aligned rule")
      ->capture_default_str();
  cmd->add_option("--categories", f.categories, "Category names assigned round-robin")
      ->delimiter(',');
}

SyntheticModelSpec make_spec(const SynthFlags& f) {
  SyntheticModelSpec spec;
  spec.num_questions = f.questions;
  spec.options_per_question = {f.options};
  spec.seed = f.seed;
  if (f.profile == "uniform") {
    spec.profile.kind = DifficultyProfile::Kind::kUniform;
  } else if (f.profile == "point") {
    spec.profile.kind = DifficultyProfile::Kind::kPointMass;
  } else {
    spec.profile.kind = DifficultyProfile::Kind::kDirichlet;
  }
  spec.profile.concentration = f.concentration;
  spec.truth_rule = parse_truth_rule(f.rule);
  spec.p_align = f.p_align;
  spec.categories = f.categories;
  spec.validate();
  return spec;
}

int cmd_synth(const SynthFlags& f, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const SyntheticModelSpec spec = make_spec(f);
  const auto records = generate_dataset(spec, f.samples);
  std::ostringstream jsonl;
  write_jsonl(jsonl, records);
  std::ostream& summary = out_path.empty() ? err : out;
  if (out_path.empty()) {
    out << jsonl.str();
  } else {
    write_file(out_path, jsonl.str());
  }
  summary << "synthesized " << records.size() << " questions: K=" << f.options << ", M=" << f.samples
          << ", profile=" << f.profile;
  if (spec.profile.kind == DifficultyProfile::Kind::kDirichlet) {
    summary << "(concentration=" << format_significant(f.concentration) << ")";
  }
  summary << ", rule=" << f.rule << ", seed=" << f.seed << '\n';
  return kExitOk;
}

int cmd_coverage(const SynthFlags& sf, const ExperimentFlags& ef, const OutputFlags& flags,
                 std::ostream& out) {
  SynthFlags seeded = sf;
  seeded.seed = ef.seed;
  const SyntheticModelSpec spec = make_spec(seeded);
  const ExperimentConfig cfg = make_config(ef);
  CoverageOptions options;
  options.cal_ratio = cfg.cal_ratio;
  options.score_source = cfg.score_source;
  options.quantile_rule = cfg.quantile_rule;
  options.threads = cfg.threads;
  const auto stats = coverage_oracle(spec, sf.samples, cfg.alpha_grid, cfg.trials, options);

  Table t;
  t.columns = {"alpha", "trials", "mean_coverage", "std_coverage", "standard_error",
               "lower_bound", "mean_apss", "holds"};
  for (const auto& s : stats) {
    const double bound = 1.0 - s.alpha - 2.0 * s.standard_error;
    t.add_row({s.alpha, static_cast<std::int64_t>(cfg.trials), s.mean_coverage, s.std_coverage,
               s.standard_error, bound, s.mean_apss, s.mean_coverage >= bound});
  }
  ojson config = to_json(cfg);
  config["questions"] = sf.questions;
  config["options"] = sf.options;
  config["samples"] = sf.samples;
  config["profile"] = sf.profile;
  config["concentration"] = sf.concentration;
  config["rule"] = sf.rule;
  ReportDocument doc;
  doc.manifest = make_manifest("coverage", std::move(config), "");
  doc.body = std::move(t);
  doc.title = "Synthetic coverage oracle";
  emit(std::move(doc), flags, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-based uncertainty quantification and split conformal prediction for "
               "multiple-choice QA",
               "conformal-mcqa"};
  app.set_version_flag("--version", std::string(CMCQA_VERSION));
  app.require_subcommand(1);

  std::string input;
  bool lenient = false;

  auto* validate = app.add_subcommand("validate", "Check a JSONL file against the record schema");
  validate->add_option("input", input, "JSONL file")->required();
  validate->add_flag("--lenient", lenient, "Skip invalid lines and exit 0");

  auto* score = app.add_subcommand("score", "Per-question modal answer and predictive entropy");
  std::string score_log_base = "e";
  OutputFlags score_out;
  score->add_option("input", input, "JSONL file")->required();
  score->add_option("--log-base", score_log_base, "Entropy log base")
      ->check(CLI::IsMember({"e", "2", "10"}))
      ->capture_default_str();
  score->add_flag("--lenient", lenient, "Skip invalid lines");
  add_output_flags(score, score_out, {"csv", "json"});

  auto* compare = app.add_subcommand("compare", "AUROC of logit-based vs frequency-based entropy");
  ExperimentFlags compare_flags;
  OutputFlags compare_out;
  compare->add_option("input", input, "JSONL file")->required();
  add_experiment_flags(compare, compare_flags);
  compare->add_flag("--lenient", lenient, "Skip invalid lines");
  add_output_flags(compare, compare_out, {"csv", "json", "text"});

  auto* sweep = app.add_subcommand("sweep", "EMR / APSS over an alpha grid and repeated splits");
  ExperimentFlags sweep_flags;
  OutputFlags sweep_out;
  sweep->add_option("input", input, "JSONL file")->required();
  add_experiment_flags(sweep, sweep_flags);
  sweep->add_flag("--lenient", lenient, "Skip invalid lines");
  add_output_flags(sweep, sweep_out, {"csv", "json", "text"});

  auto* synth = app.add_subcommand("synth", "Generate a synthetic JSONL dataset");
  SynthFlags synth_flags;
  std::string synth_out;
  add_synth_flags(synth, synth_flags);
  synth->add_option("--out", synth_out, "Output path (default: stdout)");

  auto* coverage = app.add_subcommand("coverage", "Monte Carlo coverage check on synthetic data");
  SynthFlags coverage_synth;
  ExperimentFlags coverage_flags;
  OutputFlags coverage_out;
  add_synth_flags(coverage, coverage_synth, false);
  add_experiment_flags(coverage, coverage_flags);
  add_output_flags(coverage, coverage_out, {"csv", "json", "text"});

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(input, lenient, out, err);
    if (*score) return cmd_score(input, score_log_base, lenient, score_out, out, err);
    if (*compare) return cmd_compare(input, compare_flags, lenient, compare_out, out, err);
    if (*sweep) return cmd_sweep(input, sweep_flags, lenient, sweep_out, out, err);
    if (*synth) return cmd_synth(synth_flags, synth_out, out, err);
    if (*coverage) return cmd_coverage(coverage_synth, coverage_flags, coverage_out, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
  return kExitUsage;
}

}  // namespace cmcqa
