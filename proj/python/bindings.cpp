#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cmcqa/cli.hpp"
#include "cmcqa/conformal.hpp"
#include "cmcqa/entropy.hpp"
#include "cmcqa/error.hpp"
#include "cmcqa/experiments.hpp"
#include "cmcqa/metrics.hpp"
#include "cmcqa/record.hpp"
#include "cmcqa/report.hpp"
#include "cmcqa/synthetic.hpp"

namespace py = pybind11;
using namespace cmcqa;

namespace {

std::vector<std::string> label_strings(const std::vector<Label>& labels) {
  std::vector<std::string> out;
  for (const Label& l : labels) out.push_back(l.str());
  return out;
}

StdDivisor parse_std(const std::string& text) {
  if (text == "population") return StdDivisor::kPopulation;
  if (text == "sample") return StdDivisor::kSample;
  throw Error(ErrorKind::kConfiguration, "unknown std divisor '" + text + "'");
}

std::string comparison_json(const ComparisonTable& table) {
  nlohmann::ordered_json out;
  auto row_json = [](const ComparisonRow& r) {
    nlohmann::ordered_json row;
    row["group"] = r.group;
    row["records"] = r.records;
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nullptr; };
    row["logit_mean"] = opt(r.logit_mean);
    row["logit_std"] = opt(r.logit_std);
    row["frequency_mean"] = opt(r.frequency_mean);
    row["frequency_std"] = opt(r.frequency_std);
    row["delta"] = opt(r.delta);
    return row;
  };
  out["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) out["rows"].push_back(row_json(r));
  out["average"] = row_json(table.average);
  out["trials"] = table.trials;
  out["partitions_match"] = table.partitions_match;
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Frequency-based predictive entropy and split conformal prediction for MCQA";
  m.attr("__version__") = CMCQA_VERSION;

  py::register_exception<Error>(m, "CmcqaError");

  py::class_<FrequencyDistribution>(m, "FrequencyDistribution")
      .def_readonly("counts", &FrequencyDistribution::counts)
      .def_readonly("probs", &FrequencyDistribution::probs)
      .def_readonly("valid_sample_count", &FrequencyDistribution::valid_sample_count)
      .def_readonly("dropped_sample_count", &FrequencyDistribution::dropped_sample_count)
      .def("modal_answer", [](const FrequencyDistribution& d) { return modal_answer(d).str(); });

  py::class_<QuestionRecord>(m, "QuestionRecord")
      .def_static("from_json", [](const std::string& line) { return parse_record(line); }, py::arg("line"))
      .def("to_json", [](const QuestionRecord& r) { return serialize_record(r); })
      .def_readwrite("question_id", &QuestionRecord::question_id)
      .def_readwrite("category", &QuestionRecord::category)
      .def_property_readonly("options", [](const QuestionRecord& r) { return label_strings(r.options); })
      .def_property_readonly("true_answer", [](const QuestionRecord& r) { return r.true_answer.str(); })
      .def_readwrite("samples", &QuestionRecord::samples)
      .def_readwrite("model_probs", &QuestionRecord::model_probs)
      .def_readwrite("model_logits", &QuestionRecord::model_logits)
      .def("__eq__", [](const QuestionRecord& a, const QuestionRecord& b) { return a == b; })
      .def("__repr__", [](const QuestionRecord& r) { return "<QuestionRecord " + r.question_id + ">"; });

  m.def("normalize_sample", &normalize_sample, py::arg("raw"));

  m.def(
      "load_jsonl",
      [](const std::string& path, bool lenient) { return load_jsonl(path, lenient).records; },
      py::arg("path"), py::arg("lenient") = false);

  m.def(
      "estimate_frequencies",
      [](const std::vector<std::string>& samples, std::size_t num_options) {
        return estimate_frequencies(samples, labels_for(num_options));
      },
      py::arg("samples"), py::arg("num_options"));

  m.def(
      "predictive_entropy",
      [](const std::vector<double>& probs, const std::string& base) {
        return predictive_entropy(probs, parse_log_base(base));
      },
      py::arg("probs"), py::arg("base") = "e");

  m.def("softmax", [](const std::vector<double>& logits) { return softmax(logits); }, py::arg("logits"));

  m.def(
      "quantile_rank",
      [](std::size_t n, double alpha, const std::string& rule) {
        return quantile_rank(n, alpha, parse_quantile_rule(rule));
      },
      py::arg("n"), py::arg("alpha"), py::arg("rule") = "ceil");

  m.def(
      "conformal_quantile",
      [](const std::vector<double>& scores, double alpha, const std::string& rule) {
        return conformal_quantile(scores, alpha, parse_quantile_rule(rule)).q_hat;
      },
      py::arg("scores"), py::arg("alpha"), py::arg("rule") = "ceil",
      "Threshold q_hat, or None for the full-set sentinel.");

  m.def(
      "prediction_set",
      [](const std::vector<double>& probs, std::optional<double> q_hat) {
        CalibrationOutput calib;
        calib.q_hat = q_hat;
        const std::uint32_t mask = prediction_mask(probs, calib);
        std::vector<std::string> out;
        for (std::size_t i = 0; i < probs.size(); ++i) {
          if (mask_contains(mask, i)) out.push_back(Label::from_index(i).str());
        }
        return out;
      },
      py::arg("probs"), py::arg("q_hat"));

  m.def(
      "auroc",
      [](const std::vector<double>& uncertainty, const std::vector<bool>& incorrect) {
        std::vector<std::uint8_t> flags(incorrect.begin(), incorrect.end());
        return auroc(uncertainty, flags);
      },
      py::arg("uncertainty"), py::arg("incorrect"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("alpha_grid", &ExperimentConfig::alpha_grid)
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("cal_ratio", &ExperimentConfig::cal_ratio)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("group_by_category", &ExperimentConfig::group_by_category)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_property(
          "score_source", [](const ExperimentConfig& c) { return std::string(to_string(c.score_source)); },
          [](ExperimentConfig& c, const std::string& s) { c.score_source = parse_score_source(s); })
      .def_property(
          "log_base", [](const ExperimentConfig& c) { return std::string(to_string(c.log_base)); },
          [](ExperimentConfig& c, const std::string& s) { c.log_base = parse_log_base(s); })
      .def_property(
          "quantile_rule", [](const ExperimentConfig& c) { return std::string(to_string(c.quantile_rule)); },
          [](ExperimentConfig& c, const std::string& s) { c.quantile_rule = parse_quantile_rule(s); })
      .def_property(
          "std_divisor", [](const ExperimentConfig& c) { return std::string(to_string(c.std_divisor)); },
          [](ExperimentConfig& c, const std::string& s) { c.std_divisor = parse_std(s); });

  m.def(
      "_run_experiment",
      [](const std::vector<QuestionRecord>& records, const ExperimentConfig& config,
         const std::string& dataset_id) {
        const PreparedDataset ds = prepare(records, config.log_base, dataset_id);
        std::vector<PreparedDataset> groups;
        if (config.group_by_category) {
          groups = group_by_category(ds);
        } else {
          groups.push_back(ds);
        }
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& g : groups) out.push_back(to_json(run_experiment(g, config).report));
        return out.dump();
      },
      py::arg("records"), py::arg("config"), py::arg("dataset_id") = "dataset");

  m.def(
      "_compare_sources",
      [](const std::vector<QuestionRecord>& records, const ExperimentConfig& config,
         const std::string& dataset_id) {
        return comparison_json(compare_sources(prepare(records, config.log_base, dataset_id), config));
      },
      py::arg("records"), py::arg("config"), py::arg("dataset_id") = "dataset");

  m.def(
      "generate_dataset",
      [](std::size_t num_questions, std::size_t num_options, std::size_t samples, std::uint64_t seed,
         const std::string& profile, double concentration, const std::string& rule, double p_align,
         const std::vector<std::string>& categories) {
        SyntheticModelSpec spec;
        spec.num_questions = num_questions;
        spec.options_per_question = {num_options};
        spec.seed = seed;
        if (profile == "uniform") {
          spec.profile.kind = DifficultyProfile::Kind::kUniform;
        } else if (profile == "point") {
          spec.profile.kind = DifficultyProfile::Kind::kPointMass;
        } else if (profile == "dirichlet") {
          spec.profile.kind = DifficultyProfile::Kind::kDirichlet;
        } else {
          throw Error(ErrorKind::kSpec, "unknown profile '" + profile + "'");
        }
        spec.profile.concentration = concentration;
        spec.truth_rule = parse_truth_rule(rule);
        spec.p_align = p_align;
        spec.categories = categories;
        return generate_dataset(spec, samples);
      },
      py::arg("num_questions") = 100, py::arg("num_options") = 4, py::arg("samples") = 20,
      py::arg("seed") = 0, py::arg("profile") = "dirichlet", py::arg("concentration") = 1.0,
      py::arg("rule") = "calibrated", py::arg("p_align") = 1.0,
      py::arg("categories") = std::vector<std::string>{});

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
