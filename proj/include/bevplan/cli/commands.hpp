// Command implementations behind the CLI; callable directly from tests.
#pragma once

#include <optional>
#include <string>

#include "bevplan/cli/config.hpp"

namespace bevplan::cli {

struct GenArgs {
  std::string out_dir;
  int count = 0;
  std::optional<std::uint64_t> seed;  // defaults to config.seed
};

struct BuildAnchorsArgs {
  std::string out_path;
  std::string dataset_dir;  // empty: cluster the built-in synthetic corpus
};

struct TrainArgs {
  std::string dataset_dir;
  std::string anchors_path;
  std::string out_dir;
  bool mining = true;           // --no-mining clears this
  std::optional<int> layers;    // --layers override
};

struct EvalArgs {
  std::string dataset_dir;
  std::string anchors_path;
  std::string decoder_path;  // checkpoint base path (no extension)
  std::string scorer_path;
  std::string out_dir;
  bool use_scorer = true;
  bool use_postproc = true;
  std::optional<int> layers;
  std::string dump_bev_dir;  // plan only: per-scenario PGM dumps when set
  int dump_channel = 0;
};

int cmd_gen_synthetic(const GenArgs& args, const Config& config);
int cmd_build_anchors(const BuildAnchorsArgs& args, const Config& config);
int cmd_train(const TrainArgs& args, const Config& config);
int cmd_plan(const EvalArgs& args, const Config& config);
int cmd_evaluate(const EvalArgs& args, const Config& config);
int cmd_report(const std::string& summary_path);

// Text table over the aggregate means of a summary JSON (percentages, table
// column order NC DAC DDC TLC EP TTC LK HC EC EPDMS).
std::string render_report(const std::string& summary_json_text);

}  // namespace bevplan::cli
