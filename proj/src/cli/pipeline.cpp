#include "bevplan/cli/pipeline.hpp"

#include <cmath>
#include <stdexcept>

namespace bevplan::cli {

PlanOutcome plan_scenario(const scene::Scenario& s, const Config& config,
                          const decoder::DecoderModel& decoder_model,
                          const scorer::ScorerModel& scorer_model,
                          const anchors::AnchorDictionary& dict, const PlanOptions& options,
                          Rng* random_pick) {
  PlanOutcome out;
  const bev::BevGrid grid = bev::render_bev(s, config.render);
  out.candidates = decoder::generate_candidates(decoder_model, dict, grid);
  const int n = static_cast<int>(out.candidates.trajectories.size());

  Scalar pick_u = 0.0;
  if (options.use_scorer) {
    out.predictions = scorer::score_batch(scorer_model, out.candidates, grid);
    out.scorer_choice = scorer::select_trajectory(out.predictions);
  } else {
    if (!random_pick) throw std::invalid_argument("plan_scenario: missing rng for --no-scorer");
    pick_u = random_pick->uniform();  // one draw per scenario
    out.scorer_choice = std::min(n - 1, static_cast<int>(pick_u * n));
  }

  if (!options.use_postproc) {
    out.chosen = out.scorer_choice;
    return out;
  }

  // Post-processing needs per-candidate scores for the survivor argmax; the
  // scorer ablation substitutes a uniform field and re-draws among survivors.
  std::vector<scorer::ScorePrediction> filter_scores =
      options.use_scorer ? out.predictions
                         : std::vector<scorer::ScorePrediction>(static_cast<std::size_t>(n));
  const postproc::FilterResult filtered =
      postproc::filter_candidates(out.candidates, filter_scores, s, config.filter);
  out.reasons = filtered.reasons;
  out.fallback = filtered.fallback;
  if (options.use_scorer) {
    out.chosen = filtered.chosen;
  } else if (filtered.survivors.empty()) {
    out.chosen = out.scorer_choice;
  } else {
    const int k = std::min(static_cast<int>(filtered.survivors.size()) - 1,
                           static_cast<int>(pick_u * filtered.survivors.size()));
    out.chosen = filtered.survivors[static_cast<std::size_t>(k)];
  }
  return out;
}

}  // namespace bevplan::cli
