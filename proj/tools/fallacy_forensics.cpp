// fallacy-forensics: command-line front end for the analysis pipeline.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fallacy/classifier.hpp"
#include "fallacy/config.hpp"
#include "fallacy/corpus.hpp"
#include "fallacy/detail/io.hpp"
#include "fallacy/pipeline.hpp"
#include "fallacy/synthetic.hpp"

namespace fs = std::filesystem;
using namespace fallacy;

namespace {

struct CommonOptions {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

using Step = std::function<pipeline::Outcome(const PipelineConfig&, const pipeline::Layout&, std::ostream&)>;

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Pipeline configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output bundle directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Override the configured seed");
  cmd->add_option("--set", o.overrides, "Override a config value, e.g. --set temporal.k=3");
}

int run_step(const CommonOptions& o, const Step& step) {
  auto overrides = o.overrides;
  if (o.seed) overrides.push_back("seed=" + std::to_string(*o.seed));
  const auto cfg = load_config(o.config, overrides);
  const pipeline::Layout layout{o.out};
  const auto outcome = step(cfg, layout, std::cerr);
  if (outcome.ok()) return 0;
  std::cerr << outcome.failures.size() << " analysis cell(s) failed:\n";
  for (const auto& f : outcome.failures) std::cerr << "  - " << f << "\n";
  return 1;
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
  std::string text;
  for (const auto& r : rows) text += r.dump() + "\n";
  detail::write_file_atomic(path, text);
}

int synth(const std::string& out, std::uint64_t seed, std::size_t docs) {
  const auto forum = synthetic::planted_forum({}, seed);
  std::vector<json> posts, comments, profiles;
  for (const auto& p : forum.posts) posts.push_back(to_json(p));
  for (const auto& c : forum.comments) comments.push_back(to_json(c));
  for (const auto& p : forum.profiles) profiles.push_back(to_json(p));
  const fs::path dir = out;
  write_jsonl(dir / "posts.jsonl", posts);
  write_jsonl(dir / "comments.jsonl", comments);
  write_jsonl(dir / "profiles.jsonl", profiles);
  const auto labeled = synthetic::planted_lexicon_corpus(docs, seed);
  detail::write_file_atomic(dir / "labeled.jsonl", labeled_dataset_to_jsonl(labeled));
  std::cerr << "synth: " << forum.posts.size() << " posts, " << forum.comments.size() << " comments, "
            << forum.profiles.size() << " profiles, " << labeled.size() << " labeled documents\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forensic analysis of ad hominem argumentation in threaded debate forums"};
  app.require_subcommand(1);

  CommonOptions common;
  Step selected;
  auto step = [&](CLI::App* parent, const std::string& name, const std::string& help, Step fn) {
    auto* cmd = parent->add_subcommand(name, help);
    add_common(cmd, common);
    cmd->callback([&selected, fn] { selected = fn; });
  };

  step(&app, "ingest", "Validate and pseudonymise the raw JSONL dump", pipeline::ingest);
  step(&app, "train", "Train the baseline classifier on the labeled dataset", pipeline::train);
  step(&app, "evaluate", "Stratified k-fold evaluation of the baseline", pipeline::evaluate);
  step(&app, "sweep", "Macro-F1 as a function of the labeled fraction", pipeline::sweep);
  step(&app, "score", "Annotate every comment with the configured scorer", pipeline::score);
  step(&app, "explain", "Trigger-trigram highlights for flagged comments", pipeline::explain);
  auto* analyze = app.add_subcommand("analyze", "Corpus analyses");
  analyze->require_subcommand(1);
  step(analyze, "networks", "Reciprocity surfaces, activity groups, top tables, topic overlap", pipeline::analyze_networks);
  step(analyze, "temporal", "Monthly series, change points and sub-corpus partition", pipeline::analyze_temporal);
  step(analyze, "wordshift", "Word-shift tables between sub-corpora", pipeline::analyze_wordshift);
  step(analyze, "users", "Profile comparison of users with and without ad hominem comments", pipeline::analyze_users);
  step(&app, "report", "Write config.resolved and the checksum manifest", pipeline::report);
  step(&app, "run", "Run every step in order", pipeline::run_all);

  std::string synth_out = "data/synthetic";
  std::uint64_t synth_seed = 20240601;
  std::size_t synth_docs = 2000;
  auto* syn = app.add_subcommand("synth", "Generate the planted synthetic dataset");
  syn->add_option("--out", synth_out, "Destination directory")->capture_default_str();
  syn->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
  syn->add_option("--docs", synth_docs, "Labeled documents")->capture_default_str();
  bool do_synth = false;
  syn->callback([&] { do_synth = true; });

  CLI11_PARSE(app, argc, argv);
  try {
    if (do_synth) return synth(synth_out, synth_seed, synth_docs);
    return run_step(common, selected);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
