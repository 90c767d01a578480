#include <filesystem>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fallacy/classifier.hpp"
#include "fallacy/detail/io.hpp"
#include "fallacy/scorer.hpp"
#include "support.hpp"

using namespace fallacy;
using namespace testing_support;
using nlohmann::json;

namespace {

Corpus texts_corpus() {
  return Corpus::build({post("p1", "x")},
                       {comment("a", "p1", std::nullopt, "u1", "x", "2015-01-02T00:00:00Z", "You are an IDIOT."),
                        comment("b", "p1", "a", "u2", "x", "2015-01-02T00:00:00Z", "The data says otherwise."),
                        comment("c", "p1", "b", "u1", "x", "2015-01-02T00:00:00Z", "idiot idiot"),
                        comment("d", "p1", "a", "u3", "x", "2015-01-02T00:00:00Z", "fine, thanks"),
                        comment("e", "p1", std::nullopt, "u2", "x", "2015-01-02T00:00:00Z", "")});
}

ExternalScorer mock(std::vector<std::string> flags) {
  ExternalScorer s;
  s.argv = {FALLACY_MOCK_SCORER, "--keyword", "idiot"};
  s.argv.insert(s.argv.end(), flags.begin(), flags.end());
  return s;
}

std::string scorer_error(const Corpus& c, const ExternalScorer& s, ScoreOptions opts = {}) {
  try {
    score_corpus(c, s, opts);
  } catch (const ScorerError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Scorer, MockScorerAnnotatesInCorpusOrder) {
  const auto corpus = texts_corpus();
  for (std::size_t batch : {1u, 2u, 256u}) {
    ScoreReport rep;
    const auto ac = score_corpus(corpus, mock({"--reverse"}), {0.5, batch, false}, &rep);
    EXPECT_EQ(rep.batches, (corpus.comments().size() + batch - 1) / batch);
    const std::vector<bool> expected{true, false, true, false, false};
    for (std::size_t i = 0; i < expected.size(); ++i) {
      EXPECT_EQ(ac.at(i).id, corpus.comment(i).id);
      EXPECT_EQ(ac.is_adhominem(i), expected[i]) << i;
    }
    EXPECT_EQ(ac.scorer().rfind("external:", 0), 0u);
  }
}

TEST(Scorer, TokenSpansAlignWithText) {
  const auto corpus = texts_corpus();
  const auto ac = score_corpus(corpus, mock({"--specials"}));
  const auto& tokens = *ac.at(0).token_scores;
  ASSERT_EQ(tokens.size(), 6u);
  EXPECT_TRUE(tokens.front().special);
  EXPECT_FALSE(tokens.front().span.has_value());
  EXPECT_TRUE(tokens.back().special);
  const auto& text = corpus.comment(0).text;
  const auto& idiot = tokens[4];
  ASSERT_TRUE(idiot.span.has_value());
  EXPECT_EQ(text.substr(idiot.span->start, idiot.span->size()), "IDIOT");
  const auto& twice = *ac.at(2).token_scores;
  ASSERT_EQ(twice.size(), 4u);
  ASSERT_TRUE(twice[1].span && twice[2].span);
  EXPECT_EQ(twice[1].span->start, 0u);
  EXPECT_EQ(twice[2].span->start, 6u);
}

TEST(Scorer, ProcessAndProtocolFailuresAreErrors) {
  const auto corpus = texts_corpus();
  EXPECT_NE(scorer_error(corpus, mock({"--fail"})).find("exited with code 3"), std::string::npos);
  EXPECT_NE(scorer_error(corpus, mock({"--fail"})).find("simulated failure"), std::string::npos);
  EXPECT_NE(scorer_error(corpus, mock({"--drop-last"})).find("missing ids: e"), std::string::npos);
  EXPECT_NE(scorer_error(corpus, mock({"--bad-p"})).find("outside [0,1]"), std::string::npos);
  EXPECT_NE(scorer_error(corpus, mock({"--duplicate"})).find("more than once"), std::string::npos);
  EXPECT_NE(scorer_error(corpus, mock({"--unknown-id"})).find("not-a-request"), std::string::npos);
  EXPECT_NE(scorer_error(corpus, ExternalScorer{{"/nonexistent/scorer"}}), "");
}

TEST(Scorer, SkipFailedRecordsNullsPerBatch) {
  const auto corpus = texts_corpus();
  ScoreReport rep;
  const auto ac = score_corpus(corpus, mock({"--fail-on", "data"}), {0.5, 2, true}, &rep);
  EXPECT_EQ(rep.batches, 3u);
  EXPECT_EQ(rep.skipped, 2u);
  ASSERT_EQ(rep.failures.size(), 1u);
  EXPECT_NE(rep.failures[0].find("batch 0"), std::string::npos);
  EXPECT_FALSE(ac.scored(0));
  EXPECT_FALSE(ac.scored(1));
  EXPECT_FALSE(ac.is_adhominem(0));
  EXPECT_TRUE(ac.scored(2));
  EXPECT_EQ(ac.skipped(), 2u);
}

TEST(Scorer, ThresholdTiesGoToAdHominem) {
  const auto corpus = texts_corpus();
  const auto ac = score_corpus(corpus, mock({"--constant", "0.5"}), {0.5, 256, false});
  for (std::size_t i = 0; i < corpus.comments().size(); ++i) EXPECT_TRUE(ac.is_adhominem(i));
  EXPECT_THROW(score_corpus(corpus, mock({}), {1.0, 1, false}), InvalidArgument);
  EXPECT_THROW(score_corpus(corpus, mock({}), {0.5, 0, false}), InvalidArgument);
}

TEST(Scorer, BuiltinAnnotationsRoundTrip) {
  const auto corpus = texts_corpus();
  ClassifierConfig cfg;
  cfg.hash_bits = 8;
  BaselineModel model(cfg, 0);
  model.set_unigram_weight("idiot", 3.0);
  model.set_bias(-1.0);
  const auto ac = score_corpus(corpus, BuiltinScorer{model, "builtin"});
  EXPECT_TRUE(ac.is_adhominem(0));
  EXPECT_FALSE(ac.is_adhominem(1));
  TempDir dir;
  save_annotations(ac, dir / "a.jsonl", dir / "meta.json");
  const auto back = load_annotations(corpus, dir / "a.jsonl", dir / "meta.json");
  for (std::size_t i = 0; i < corpus.comments().size(); ++i) EXPECT_EQ(back.at(i), ac.at(i));
  EXPECT_EQ(back.scorer(), "builtin");
}

TEST(Protocol, SpecialTokenConvention) {
  EXPECT_TRUE(protocol::is_special_token("[CLS]"));
  EXPECT_TRUE(protocol::is_special_token("[SEP]"));
  EXPECT_FALSE(protocol::is_special_token("[x]"));
  EXPECT_FALSE(protocol::is_special_token("[]"));
  EXPECT_FALSE(protocol::is_special_token("CLS"));
  const auto r = protocol::parse_response(R"({"id":"a","p_adhominem":0.2,"token_scores":[["<s>",0,true],["[PAD]",0,false]]})", 1);
  EXPECT_TRUE((*r.token_scores)[0].special);
  EXPECT_FALSE((*r.token_scores)[1].special);
}

TEST(Protocol, RequestLinesEscapeText) {
  const auto line = protocol::request_line("id\"1", "line\nbreak \xc3\xa9");
  EXPECT_EQ(line.back(), '\n');
  EXPECT_EQ(std::count(line.begin(), line.end(), '\n'), 1);
  const auto j = json::parse(line);
  EXPECT_EQ(j.at("id"), "id\"1");
  EXPECT_EQ(j.at("text"), "line\nbreak \xc3\xa9");
}

TEST(Protocol, ConformanceVectors) {
  const std::filesystem::path dir = FALLACY_PROTOCOL_DIR;
  const auto requests = detail::read_file(dir / "requests.jsonl");
  const auto expectations = json::parse(detail::read_file(dir / "expectations.json"));
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "transcripts")) {
    const auto name = entry.path().filename().string();
    ASSERT_TRUE(expectations.contains(name)) << "no expectation for " << name;
    const auto expected = expectations.at(name).get<std::vector<std::string>>();
    const auto problems = protocol::check_transcript(requests, detail::read_file(entry.path()));
    ASSERT_EQ(problems.size(), expected.size()) << name << ": " << json(problems).dump();
    for (std::size_t i = 0; i < expected.size(); ++i)
      EXPECT_NE(problems[i].find(expected[i]), std::string::npos) << name << ": " << problems[i];
    ++seen;
  }
  EXPECT_EQ(seen, expectations.size());
}

TEST(Protocol, MockScorerTranscriptIsConformant) {
  const std::filesystem::path dir = FALLACY_PROTOCOL_DIR;
  const auto requests = detail::read_file(dir / "requests.jsonl");
  for (const std::vector<std::string> flags :
       {std::vector<std::string>{}, {"--specials"}, {"--reverse", "--no-tokens"}}) {
    std::vector<std::string> argv{FALLACY_MOCK_SCORER, "--keyword", "idiot"};
    argv.insert(argv.end(), flags.begin(), flags.end());
    const auto result = detail::run_process(argv, requests);
    ASSERT_EQ(result.exit_code, 0);
    EXPECT_TRUE(protocol::check_transcript(requests, result.out).empty());
  }
  std::vector<std::string> argv{FALLACY_MOCK_SCORER, "--drop-last"};
  EXPECT_FALSE(protocol::check_transcript(requests, detail::run_process(argv, requests).out).empty());
}
