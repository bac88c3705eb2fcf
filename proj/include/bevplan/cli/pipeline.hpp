// Per-scenario planning pipeline shared by the plan and evaluate commands:
// render, propose, score (or seeded-random pick), post-process, choose.
#pragma once

#include <vector>

#include "bevplan/cli/config.hpp"
#include "bevplan/decoder/decoder.hpp"
#include "bevplan/postproc/postproc.hpp"
#include "bevplan/rng.hpp"
#include "bevplan/scorer/scorer.hpp"

namespace bevplan::cli {

struct PlanOptions {
  bool use_scorer = true;    // false: uniform random selection (seeded)
  bool use_postproc = true;  // false: take the scorer's top pick directly
};

struct PlanOutcome {
  decoder::CandidateSet candidates;
  std::vector<scorer::ScorePrediction> predictions;  // empty when !use_scorer
  int scorer_choice = -1;   // argmax of epdms_hat (or the random pick)
  int chosen = -1;          // final index after post-processing
  bool fallback = false;
  std::vector<postproc::DiscardReason> reasons;  // empty when !use_postproc
};

// `random_pick` supplies the seeded uniform index used when the scorer is
// ablated; it is consumed once per call.
PlanOutcome plan_scenario(const scene::Scenario& s, const Config& config,
                          const decoder::DecoderModel& decoder_model,
                          const scorer::ScorerModel& scorer_model,
                          const anchors::AnchorDictionary& dict, const PlanOptions& options,
                          Rng* random_pick = nullptr);

}  // namespace bevplan::cli
