#include "cmcqa/record.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cmcqa/error.hpp"
#include "cmcqa/synthetic.hpp"
#include "json.hpp"

namespace cmcqa {
namespace {

ErrorKind kind_of(std::string_view line) {
  try {
    parse_record(line, 7);
  } catch (const Error& e) {
    EXPECT_EQ(e.line(), 7u);
    return e.kind();
  }
  ADD_FAILURE() << "expected an error for " << line;
  return ErrorKind::kIo;
}

TEST(NormalizeSample, TrimsStripsAndUppercases) {
  EXPECT_EQ(normalize_sample(" B"), "B");
  EXPECT_EQ(normalize_sample("b "), "B");
  EXPECT_EQ(normalize_sample("\tc.\n"), "C");
  EXPECT_EQ(normalize_sample("d)"), "D");
  EXPECT_EQ(normalize_sample("A)."), "A");
  EXPECT_EQ(normalize_sample("?!"), "?!");
  EXPECT_EQ(normalize_sample(""), "");
  EXPECT_EQ(normalize_sample("(a"), "(A");
}

TEST(ParseRecord, NormalizesSamples) {
  const auto rec = parse_record(
      R"({"question_id":"q1","options":["A","B","C","D"],"true_answer":"B","samples":["B","b "," B","A"]})");
  EXPECT_EQ(rec.question_id, "q1");
  EXPECT_EQ(rec.num_options(), 4u);
  EXPECT_EQ(rec.true_answer.letter(), 'B');
  EXPECT_EQ(rec.samples, (std::vector<std::string>{"B", "B", "B", "A"}));
  EXPECT_FALSE(rec.model_probs);
  EXPECT_FALSE(rec.model_logits);
  EXPECT_TRUE(rec.category.empty());
}

TEST(ParseRecord, KeepsOffSpaceSamplesForLaterFiltering) {
  const auto rec = parse_record(
      R"({"question_id":"q","options":["A","B","C","D"],"true_answer":"A","samples":["A","E","?!",""]})");
  EXPECT_EQ(rec.samples, (std::vector<std::string>{"A", "E", "?!", ""}));
}

TEST(ParseRecord, TrueAnswerOutsideOptionsIsValidationError) {
  EXPECT_EQ(kind_of(R"({"question_id":"q","options":["A","B","C","D"],"true_answer":"E","samples":["A"]})"),
            ErrorKind::kValidation);
}

TEST(ParseRecord, UnnormalizedProbsIsSchemaError) {
  try {
    parse_record(
        R"({"question_id":"q","options":["A","B","C","D"],"true_answer":"A","samples":["A"],)"
        R"("model_probs":{"A":0.5,"B":0.2,"C":0.2,"D":0.08}})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchema);
    EXPECT_NE(std::string(e.what()).find("probs not normalized"), std::string::npos);
  }
}

TEST(ParseRecord, MalformedJsonIsParseErrorWithLine) {
  try {
    parse_record(R"({"question_id": "q", )", 12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_EQ(e.line(), 12u);
    EXPECT_EQ(std::string(e.what()).rfind("line 12: ", 0), 0u);
  }
}

TEST(ParseRecord, MissingFieldNamesTheField) {
  for (const char* field : {"question_id", "options", "true_answer", "samples"}) {
    nlohmann::json doc = nlohmann::json::parse(
        R"({"question_id":"q","options":["A","B"],"true_answer":"A","samples":["A"]})");
    doc.erase(field);
    try {
      parse_record(doc.dump());
      FAIL() << field;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kSchema);
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos);
    }
  }
}

TEST(ParseRecord, RejectsStructuralViolations) {
  // empty samples
  EXPECT_EQ(kind_of(R"({"question_id":"q","options":["A","B"],"true_answer":"A","samples":[]})"),
            ErrorKind::kSchema);
  // single option
  EXPECT_EQ(kind_of(R"({"question_id":"q","options":["A"],"true_answer":"A","samples":["A"]})"),
            ErrorKind::kValidation);
  // non-contiguous labels
  EXPECT_EQ(kind_of(R"({"question_id":"q","options":["A","C"],"true_answer":"A","samples":["A"]})"),
            ErrorKind::kValidation);
  // logits missing a label
  EXPECT_EQ(kind_of(R"({"question_id":"q","options":["A","B"],"true_answer":"A","samples":["A"],"model_logits":{"A":1}})"),
            ErrorKind::kSchema);
  // probs key outside the option set
  EXPECT_EQ(kind_of(R"({"question_id":"q","options":["A","B"],"true_answer":"A","samples":["A"],"model_probs":{"A":0.5,"B":0.5,"C":0}})"),
            ErrorKind::kSchema);
  // negative probability
  EXPECT_EQ(kind_of(R"({"question_id":"q","options":["A","B"],"true_answer":"A","samples":["A"],"model_probs":{"A":1.5,"B":-0.5}})"),
            ErrorKind::kSchema);
  // wrong type
  EXPECT_EQ(kind_of(R"({"question_id":3,"options":["A","B"],"true_answer":"A","samples":["A"]})"),
            ErrorKind::kSchema);
  EXPECT_EQ(kind_of(R"(["not","an","object"])"), ErrorKind::kSchema);
}

TEST(ParseRecord, ReadsWhiteBoxFieldsAndPassthrough) {
  const auto rec = parse_record(
      R"({"schema_version":"1.2","question_id":"q","category":"anatomy","options":["A","B","C"],)"
      R"("true_answer":"c","samples":["C"],"model_logits":{"C":0.5,"A":-1,"B":2}})");
  EXPECT_EQ(rec.category, "anatomy");
  EXPECT_EQ(rec.true_answer.letter(), 'C');
  ASSERT_TRUE(rec.model_logits);
  EXPECT_EQ(*rec.model_logits, (std::vector<double>{-1.0, 2.0, 0.5}));
  EXPECT_EQ(rec.schema_version, "\"1.2\"");
  EXPECT_NE(serialize_record(rec).find("\"schema_version\":\"1.2\""), std::string::npos);
}

TEST(WhiteBoxProbs, PrefersProbsOverLogits) {
  const auto rec = parse_record(
      R"({"question_id":"q","options":["A","B"],"true_answer":"A","samples":["A"],)"
      R"("model_probs":{"A":0.25,"B":0.75},"model_logits":{"A":0,"B":0}})");
  EXPECT_EQ(*white_box_probs(rec), (std::vector<double>{0.25, 0.75}));

  const auto logits_only = parse_record(
      R"({"question_id":"q","options":["A","B"],"true_answer":"A","samples":["A"],"model_logits":{"A":0,"B":0}})");
  EXPECT_EQ(*white_box_probs(logits_only), (std::vector<double>{0.5, 0.5}));
}

TEST(ReadJsonl, CollectsErrorsWarningsAndDuplicates) {
  std::istringstream in(
      R"({"question_id":"a","options":["A","B"],"true_answer":"A","samples":["A"]})"
      "\n\n"
      R"({"question_id":"b","options":["A","B"],"true_answer":"A","samples":["A"],"model_probs":{"A":1,"B":0},"model_logits":{"A":1,"B":0}})"
      "\n"
      "{broken\n"
      R"({"question_id":"a","options":["A","B"],"true_answer":"B","samples":["B"]})"
      "\n");
  const IngestResult r = read_jsonl(in);
  EXPECT_EQ(r.lines_read, 4u);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].question_id, "a");
  EXPECT_EQ(r.records[1].question_id, "b");
  ASSERT_EQ(r.errors.size(), 2u);
  EXPECT_EQ(r.errors[0].line, 4u);
  EXPECT_EQ(r.errors[0].kind, ErrorKind::kParse);
  EXPECT_EQ(r.errors[1].line, 5u);
  EXPECT_NE(r.errors[1].message.find("duplicate"), std::string::npos);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("using model_probs"), std::string::npos);
}

TEST(LoadJsonl, StrictThrowsFirstErrorLenientSkips) {
  const std::string path = ::testing::TempDir() + "/load_jsonl.jsonl";
  {
    std::ofstream out(path);
    out << R"({"question_id":"a","options":["A","B"],"true_answer":"A","samples":["A"]})" << '\n'
        << R"({"question_id":"b","options":["A","B"],"true_answer":"Z","samples":["A"]})" << '\n';
  }
  try {
    load_jsonl(path, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_EQ(load_jsonl(path, true).records.size(), 1u);
  EXPECT_THROW(load_jsonl(path + ".missing", true), Error);
}

// serialize(parse(x)) parses back to an equal record, on the checked-in
// fixtures and on generated records with every optional field exercised.
TEST(RecordRoundTrip, SerializeParseIsIdentity) {
  std::vector<QuestionRecord> records;
  for (const char* name : {"/mmlu_style.jsonl", "/hand_count.jsonl"}) {
    std::ifstream in(std::string(CMCQA_FIXTURES) + name);
    ASSERT_TRUE(in) << name;
    IngestResult r = read_jsonl(in);
    ASSERT_TRUE(r.errors.empty()) << name;
    records.insert(records.end(), r.records.begin(), r.records.end());
  }
  SyntheticModelSpec spec;
  spec.num_questions = 50;
  spec.options_per_question = {10};
  spec.seed = 99;
  spec.categories = {"x", "y,z", "q\"uote"};
  auto synth = generate_dataset(spec, 7);
  for (std::size_t i = 0; i < synth.size(); i += 3) {
    synth[i].model_logits = std::vector<double>(10, -0.125 * static_cast<double>(i));
    synth[i].schema_version = "{\"major\":2}";
    synth[i].samples.push_back("NOT A LABEL");
  }
  records.insert(records.end(), synth.begin(), synth.end());

  ASSERT_GT(records.size(), 50u);
  for (const auto& rec : records) {
    const std::string line = serialize_record(rec);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    const QuestionRecord back = parse_record(line);
    EXPECT_EQ(back, rec) << line;
    EXPECT_EQ(serialize_record(back), line);
  }
}

TEST(Summarize, CountsCategoriesDropsAndWhiteBox) {
  std::istringstream in(
      R"({"question_id":"a","category":"x","options":["A","B"],"true_answer":"A","samples":["A","E"],"model_probs":{"A":1,"B":0}})"
      "\n"
      R"({"question_id":"b","category":"x","options":["A","B"],"true_answer":"A","samples":["?"]})"
      "\n"
      R"({"question_id":"c","category":"y","options":["A","B"],"true_answer":"A","samples":["B"],"model_logits":{"A":1,"B":0}})"
      "\n");
  const ValidationSummary s = summarize(read_jsonl(in));
  EXPECT_EQ(s.records, 3u);
  EXPECT_EQ(s.per_category.at("x"), 2u);
  EXPECT_EQ(s.per_category.at("y"), 1u);
  EXPECT_EQ(s.samples_total, 4u);
  EXPECT_EQ(s.dropped_samples, 2u);
  EXPECT_EQ(s.records_with_drops, 2u);
  EXPECT_EQ(s.records_without_valid_samples, 1u);
  EXPECT_EQ(s.records_with_probs, 1u);
  EXPECT_EQ(s.records_with_logits, 1u);
}

}  // namespace
}  // namespace cmcqa
