#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fallacy/config.hpp"
#include "support.hpp"

using namespace fallacy;
using namespace testing_support;
using nlohmann::json;

namespace {

json minimal() { return {{"corpus", {{"posts", "p.jsonl"}, {"comments", "c.jsonl"}}}}; }

std::vector<std::string> violations(const json& user) {
  try {
    make_config(user, "/base");
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, std::string_view needle) {
  return std::any_of(v.begin(), v.end(), [&](const auto& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST(Config, DefaultsAndPathResolution) {
  const auto c = make_config(minimal(), "/base");
  EXPECT_EQ(c.corpus.posts, fs::path("/base/p.jsonl"));
  EXPECT_FALSE(c.corpus.profiles.has_value());
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.classifier.hash_bits, 18u);
  EXPECT_EQ(c.folds, 10u);
  EXPECT_EQ(c.sweep_fractions, (std::vector<double>{0.05, 0.1, 0.25, 0.5, 1.0}));
  EXPECT_EQ(c.networks.group_boundaries, (std::vector<std::size_t>{10, 50, 100, 2000}));
  EXPECT_EQ(c.temporal.k, 2u);
  EXPECT_EQ(c.temporal.min_size, 6u);
  EXPECT_EQ(c.wordshift.pi1, 0.5);
  EXPECT_EQ(c.resolved.at("corpus").at("posts"), "p.jsonl");
  EXPECT_EQ(c.resolved.at("temporal").at("gamma"), nullptr);
}

TEST(Config, ReportsEveryViolationAtOnce) {
  json user = minimal();
  user["seed"] = -1;
  user["classifier"] = {{"hash_bits", 40}, {"l2", "big"}};
  user["scorer"] = {{"threshold", 1.0}, {"kind", "remote"}};
  user["temporal"] = {{"quantities", {"comments", "mood"}}, {"k", 0}};
  user["networks"] = {{"lambdas", {5, 2}}};
  user["wordshift"] = {{"pi1", 0}};
  user["sweep"] = {{"fractions", {0.5, 0}}};
  const auto v = violations(user);
  for (const char* key : {"seed", "classifier.hash_bits", "classifier.l2", "scorer.threshold", "scorer.kind",
                          "temporal.quantities[1]", "temporal.k", "networks.lambdas", "wordshift.pi1", "sweep.fractions[1]"})
    EXPECT_TRUE(mentions(v, key)) << key;
  EXPECT_EQ(v.size(), 10u);
}

TEST(Config, MissingRequiredAndUnknownKeys) {
  json user{{"corpus", {{"posts", "p"}}}, {"temporal", {{"kk", 3}}}, {"classifer", {}}, {"seed", 1}};
  const auto v = violations(user);
  EXPECT_TRUE(mentions(v, "corpus.comments: required"));
  EXPECT_TRUE(mentions(v, "temporal.kk: unknown key"));
  EXPECT_TRUE(mentions(v, "classifer: unknown key"));
  json flat = minimal();
  flat["temporal"] = 3;
  EXPECT_TRUE(mentions(violations(flat), "temporal: expected a section"));
}

TEST(Config, CrossFieldRules) {
  json user = minimal();
  user["scorer"] = {{"kind", "external"}};
  user["networks"] = {{"group_boundaries", {10}}, {"count_buckets", {{1, 10}, {5, nullptr}}}};
  const auto v = violations(user);
  EXPECT_TRUE(mentions(v, "scorer.command: required"));
  EXPECT_TRUE(mentions(v, "group_boundaries: need at least two"));
  EXPECT_TRUE(mentions(v, "count_buckets"));
}

TEST(Config, OverridesParseJsonOrFallBackToString) {
  json tree = minimal();
  apply_override(tree, "temporal.k=3");
  apply_override(tree, "networks.lambdas=[0,4]");
  apply_override(tree, "corpus.salt=pepper");
  apply_override(tree, "temporal.gamma=null");
  const auto c = make_config(tree, "/base");
  EXPECT_EQ(c.temporal.k, 3u);
  EXPECT_EQ(c.networks.lambdas, (std::vector<std::size_t>{0, 4}));
  EXPECT_EQ(c.corpus.salt, "pepper");
  EXPECT_THROW(apply_override(tree, "novalue"), ConfigError);
  EXPECT_THROW(apply_override(tree, "=3"), ConfigError);
}

TEST(Config, LoadResolvesAgainstFileDirectory) {
  TempDir dir;
  {
    std::ofstream out(dir / "cfg.json");
    out << minimal().dump();
  }
  const auto c = load_config(dir / "cfg.json", {"seed=7"});
  EXPECT_EQ(c.corpus.comments, dir.path() / "c.jsonl");
  EXPECT_EQ(c.seed, 7u);
  {
    std::ofstream out(dir / "bad.json");
    out << "{ not json";
  }
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
}
