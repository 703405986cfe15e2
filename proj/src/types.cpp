#include "cmcqa/types.hpp"

#include "cmcqa/error.hpp"

namespace cmcqa {

Label Label::from_index(std::size_t index) {
  if (index >= kMaxOptions) {
    throw Error(ErrorKind::kDomain,
                "option index " + std::to_string(index) + " exceeds label range A..Z");
  }
  return Label(static_cast<char>('A' + index));
}

std::optional<Label> Label::parse(std::string_view text) {
  if (text.size() != 1 || text[0] < 'A' || text[0] > 'Z') return std::nullopt;
  return Label(text[0]);
}

std::vector<Label> labels_for(std::size_t num_options) {
  std::vector<Label> out;
  out.reserve(num_options);
  for (std::size_t i = 0; i < num_options; ++i) out.push_back(Label::from_index(i));
  return out;
}

std::string_view to_string(ScoreSource source) {
  return source == ScoreSource::kFrequency ? "frequency" : "logit";
}

std::string_view to_string(LogBase base) {
  switch (base) {
    case LogBase::kE: return "e";
    case LogBase::kTwo: return "2";
    case LogBase::kTen: return "10";
  }
  return "e";
}

std::string_view to_string(QuantileRule rule) {
  return rule == QuantileRule::kCeil ? "ceil" : "floor";
}

std::string_view to_string(StdDivisor divisor) {
  return divisor == StdDivisor::kPopulation ? "population" : "sample";
}

ScoreSource parse_score_source(std::string_view text) {
  if (text == "frequency") return ScoreSource::kFrequency;
  if (text == "logit") return ScoreSource::kLogit;
  throw Error(ErrorKind::kConfiguration, "unknown score source '" + std::string(text) + "'");
}

LogBase parse_log_base(std::string_view text) {
  if (text == "e") return LogBase::kE;
  if (text == "2") return LogBase::kTwo;
  if (text == "10") return LogBase::kTen;
  throw Error(ErrorKind::kConfiguration, "unknown log base '" + std::string(text) + "'");
}

QuantileRule parse_quantile_rule(std::string_view text) {
  if (text == "ceil") return QuantileRule::kCeil;
  if (text == "floor") return QuantileRule::kFloor;
  throw Error(ErrorKind::kConfiguration, "unknown quantile rule '" + std::string(text) + "'");
}

}  // namespace cmcqa
