// mock-scorer: deterministic stand-in for an external scorer process. Reads
// {"id","text"} lines on stdin and answers {"id","p_adhominem","token_scores"} lines.
// Fault switches exercise the error paths of the caller.

#include <algorithm>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fallacy/tokenize.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
  CLI::App app{"Mock ad hominem scorer speaking the line protocol"};
  std::vector<std::string> keywords;
  std::optional<double> constant;
  bool specials = false, no_tokens = false, reverse = false;
  bool fail = false, drop_last = false, bad_p = false, duplicate = false, unknown = false;
  std::string fail_on;
  app.add_option("--keyword", keywords, "Token that marks a text as ad hominem (repeatable)");
  app.add_option("--constant", constant, "Answer this probability for every text");
  app.add_flag("--specials", specials, "Wrap token scores in [CLS] ... [SEP]");
  app.add_flag("--no-tokens", no_tokens, "Omit token_scores");
  app.add_flag("--reverse", reverse, "Answer in reverse request order");
  app.add_flag("--fail", fail, "Exit with status 3 after writing to stderr");
  app.add_option("--fail-on", fail_on, "Exit with status 4 if any text contains this string");
  app.add_flag("--drop-last", drop_last, "Leave the last request unanswered");
  app.add_flag("--bad-p", bad_p, "Answer p_adhominem = 1.5 for the first request");
  app.add_flag("--duplicate", duplicate, "Answer the first request twice");
  app.add_flag("--unknown-id", unknown, "Answer the first request under a foreign id");
  CLI11_PARSE(app, argc, argv);

  if (fail) {
    std::cerr << "mock scorer: simulated failure\n";
    return 3;
  }
  const std::set<std::string> marks(keywords.begin(), keywords.end());
  std::vector<json> responses;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto req = json::parse(line);
    const auto id = req.at("id").get<std::string>();
    const auto text = req.at("text").get<std::string>();
    if (!fail_on.empty() && text.find(fail_on) != std::string::npos) {
      std::cerr << "mock scorer: refusing text with '" << fail_on << "'\n";
      return 4;
    }
    json tokens = json::array();
    bool hit = false;
    if (specials) tokens.push_back({"[CLS]", 0.0});
    for (const auto& t : fallacy::tokenize_words(text)) {
      const bool mark = marks.count(t) > 0;
      hit = hit || mark;
      tokens.push_back({t, mark ? 1.0 : 0.0});
    }
    if (specials) tokens.push_back({"[SEP]", 0.0});
    json resp{{"id", id}, {"p_adhominem", constant ? *constant : (hit ? 0.9 : 0.1)}};
    if (!no_tokens) resp["token_scores"] = std::move(tokens);
    responses.push_back(std::move(resp));
  }
  if (!responses.empty()) {
    if (bad_p) responses.front()["p_adhominem"] = 1.5;
    if (unknown) responses.front()["id"] = "not-a-request";
    if (duplicate) responses.push_back(responses.front());
    if (drop_last) responses.pop_back();
  }
  if (reverse) std::reverse(responses.begin(), responses.end());
  for (const auto& r : responses) std::cout << r.dump() << "\n";
  return 0;
}
