#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "fallacy/corpus.hpp"
#include "fallacy/detail/process.hpp"
#include "fallacy/detail/time.hpp"
#include "fallacy/scorer.hpp"

namespace testing_support {

namespace fs = std::filesystem;
using namespace fallacy;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("fallacy-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline Timestamp ts(const char* iso) { return *parse_iso8601(iso); }

inline PostRecord post(std::string id, std::string topic, const char* when = "2015-01-01T00:00:00Z",
                       std::string author = "op") {
  return {std::move(id), std::move(author), ts(when), std::move(topic), "title"};
}

inline CommentRecord comment(std::string id, std::string post_id, std::optional<std::string> parent, std::string author,
                             std::string topic, const char* when = "2015-01-02T00:00:00Z", std::string text = "text",
                             Reaction reaction = Reaction::none) {
  if (parent && reaction == Reaction::none) reaction = Reaction::dispute;
  return {std::move(id), std::move(post_id), std::move(parent), std::move(author), ts(when),
          std::move(topic), std::move(text), reaction};
}

/// Annotates every comment: p = 0.9 for ids in `ah`, 0.1 otherwise.
inline AnnotatedCorpus annotate(const Corpus& corpus, const std::set<std::string>& ah) {
  std::vector<AnnotatedComment> anns;
  for (const auto& c : corpus.comments()) {
    AnnotatedComment a;
    a.id = c.id;
    a.p = ah.count(c.id) ? 0.9 : 0.1;
    a.label = *a.p >= 0.5;
    anns.push_back(std::move(a));
  }
  return AnnotatedCorpus(corpus, std::move(anns), "test", 0.5);
}

inline detail::ProcessResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), FALLACY_CLI);
  return detail::run_process(args, "");
}

}  // namespace testing_support
