// CLI entry point: gen-synthetic, build-anchors, train, plan, evaluate,
// report. Flags override nothing silently; the config file is the single
// source of tunables.
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bevplan/cli/commands.hpp"
#include "bevplan/cli/config.hpp"

namespace {

bevplan::cli::Config load(const std::string& config_path) {
  if (config_path.empty()) return bevplan::cli::Config{};
  return bevplan::cli::load_config(config_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anchor-based BEV trajectory planning, scoring, and evaluation"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Path to a key = value config file")
      ->envname("BEVPLAN_CONFIG");

  // gen-synthetic
  bevplan::cli::GenArgs gen;
  std::int64_t gen_seed = -1;
  auto* cmd_gen = app.add_subcommand("gen-synthetic", "Write a synthetic scenario dataset");
  cmd_gen->add_option("--out", gen.out_dir, "Output directory")->required();
  cmd_gen->add_option("--count", gen.count, "Number of scenarios")->required();
  cmd_gen->add_option("--seed", gen_seed, "Generator seed (default: config seed)");

  // build-anchors
  bevplan::cli::BuildAnchorsArgs build;
  auto* cmd_build = app.add_subcommand("build-anchors", "Cluster a trajectory corpus");
  cmd_build->add_option("--out", build.out_path, "Output dictionary JSON")->required();
  cmd_build->add_option("--dataset", build.dataset_dir,
                        "Cluster human trajectories from this dataset "
                        "(default: built-in synthetic corpus)");

  // train
  bevplan::cli::TrainArgs train;
  int train_layers = -1;
  auto* cmd_train = app.add_subcommand("train", "Train the decoder, then the scorer");
  cmd_train->add_option("--dataset", train.dataset_dir, "Scenario directory")->required();
  cmd_train->add_option("--anchors", train.anchors_path, "Anchor dictionary JSON")->required();
  cmd_train->add_option("--out-dir", train.out_dir, "Checkpoint directory")->required();
  cmd_train->add_flag("--no-mining", "Disable hard-case upsampling");
  cmd_train->add_option("--layers", train_layers, "Decoder layer count override");

  // plan / evaluate share most options.
  bevplan::cli::EvalArgs plan, eval;
  int plan_layers = -1, eval_layers = -1;
  auto* cmd_plan = app.add_subcommand("plan", "Emit the chosen trajectory per scenario");
  auto* cmd_eval = app.add_subcommand("evaluate", "Batch-evaluate with metric reports");
  const auto add_eval_opts = [](CLI::App* cmd, bevplan::cli::EvalArgs& args, int& layers) {
    cmd->add_option("--dataset", args.dataset_dir, "Scenario directory")->required();
    cmd->add_option("--anchors", args.anchors_path, "Anchor dictionary JSON")->required();
    cmd->add_option("--decoder", args.decoder_path, "Decoder checkpoint base path")->required();
    cmd->add_option("--scorer", args.scorer_path, "Scorer checkpoint base path")->required();
    cmd->add_option("--out", args.out_dir, "Output directory")->required();
    cmd->add_flag("--no-scorer", "Select uniformly at random (seeded) instead of by score");
    cmd->add_flag("--no-postproc", "Skip image-space post-selection");
    cmd->add_option("--layers", layers, "Decoder layer count override");
  };
  add_eval_opts(cmd_plan, plan, plan_layers);
  add_eval_opts(cmd_eval, eval, eval_layers);
  cmd_plan->add_option("--dump-bev", plan.dump_bev_dir, "Write per-scenario BEV channel PGMs");
  cmd_plan->add_option("--dump-channel", plan.dump_channel, "Channel index for --dump-bev");

  // report
  std::string summary_path;
  auto* cmd_report = app.add_subcommand("report", "Render the aggregate metric table");
  cmd_report->add_option("--summary", summary_path, "summary.json from evaluate")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const bevplan::cli::Config config = load(config_path);
    if (cmd_gen->parsed()) {
      if (gen_seed >= 0) gen.seed = static_cast<std::uint64_t>(gen_seed);
      return bevplan::cli::cmd_gen_synthetic(gen, config);
    }
    if (cmd_build->parsed()) return bevplan::cli::cmd_build_anchors(build, config);
    if (cmd_train->parsed()) {
      train.mining = cmd_train->count("--no-mining") == 0;
      if (train_layers > 0) train.layers = train_layers;
      return bevplan::cli::cmd_train(train, config);
    }
    if (cmd_plan->parsed()) {
      plan.use_scorer = cmd_plan->count("--no-scorer") == 0;
      plan.use_postproc = cmd_plan->count("--no-postproc") == 0;
      if (plan_layers > 0) plan.layers = plan_layers;
      return bevplan::cli::cmd_plan(plan, config);
    }
    if (cmd_eval->parsed()) {
      eval.use_scorer = cmd_eval->count("--no-scorer") == 0;
      eval.use_postproc = cmd_eval->count("--no-postproc") == 0;
      if (eval_layers > 0) eval.layers = eval_layers;
      return bevplan::cli::cmd_evaluate(eval, config);
    }
    if (cmd_report->parsed()) return bevplan::cli::cmd_report(summary_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
