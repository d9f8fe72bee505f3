#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

// Exit codes: 0 success, 1 usage/config error, 2 runtime failure.
int main(int argc, char** argv) {
  CLI::App app{"Egocentric audio-visual sounding-object localization toolkit"};
  app.require_subcommand(1);

  egoav::cli::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--config", synth.config_path, "Run config JSON")->required();
  synth_cmd->add_option("--out", synth.out_dir, "Output dataset directory")->required();
  synth_cmd->add_option("--clips", synth.clip_count_override, "Override clip count");
  synth_cmd->add_option("--seed", synth.seed_override, "Override seed");

  egoav::cli::TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train on a dataset's train split");
  train_cmd->add_option("--config", train.config_path, "Run config JSON")->required();
  train_cmd->add_option("--data", train.data_dir, "Dataset directory")->required();
  train_cmd->add_option("--out", train.out_dir, "Output directory")->required();
  train_cmd->add_option("--hom-cache", train.hom_cache_path, "Homography cache file");

  egoav::cli::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  eval_cmd->add_option("--config", eval.config_path, "Run config JSON")->required();
  eval_cmd->add_option("--checkpoint", eval.checkpoint_path, "Checkpoint file")->required();
  eval_cmd->add_option("--data", eval.data_dir, "Dataset directory")->required();
  eval_cmd->add_option("--split", eval.split, "Split name (train|val|test)");
  eval_cmd->add_option("--out", eval.report_path, "Metrics report JSON path");
  eval_cmd->add_option("--audio", eval.audio_source, "Audio source (mix|object)");
  eval_cmd->add_option("--hom-cache", eval.hom_cache_path, "Homography cache file");

  egoav::cli::VisualizeOptions vis;
  auto* vis_cmd = app.add_subcommand("visualize", "Write heatmap overlays for one clip");
  vis_cmd->add_option("--config", vis.config_path, "Run config JSON")->required();
  vis_cmd->add_option("--checkpoint", vis.checkpoint_path, "Checkpoint file")->required();
  vis_cmd->add_option("--data", vis.data_dir, "Dataset directory")->required();
  vis_cmd->add_option("--clip", vis.clip_id, "Clip id from the manifest")->required();
  vis_cmd->add_option("--out", vis.out_dir, "Output directory")->required();

  egoav::cli::VoteOptions vote;
  auto* vote_cmd = app.add_subcommand("vote", "Consensus-vote annotation records");
  vote_cmd->add_option("--records", vote.records_path, "Annotation records (JSONL)")->required();
  vote_cmd->add_option("--out", vote.out_path, "Consensus output (JSONL)")->required();
  vote_cmd->add_option("--stats", vote.stats_path, "Stats JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (synth_cmd->parsed()) egoav::cli::run_synth(synth);
    if (train_cmd->parsed()) egoav::cli::run_train(train);
    if (eval_cmd->parsed()) egoav::cli::run_eval(eval);
    if (vis_cmd->parsed()) egoav::cli::run_visualize(vis);
    if (vote_cmd->parsed()) egoav::cli::run_vote(vote);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
