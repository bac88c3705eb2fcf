#include "bevplan/cli/commands.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bevplan/cli/pipeline.hpp"
#include "bevplan/cli/synthetic.hpp"
#include "bevplan/mining/mining.hpp"
#include "bevplan/scene/io.hpp"

namespace bevplan::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Fixed-format float for CSV bytes that must reproduce exactly.
std::string fmt(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << content;
}

json trajectory_json(const scene::Trajectory& t) {
  json poses = json::array();
  for (const scene::Pose2& p : t.poses) poses.push_back(json::array({p.x, p.y, p.yaw}));
  return json{{"dt", t.dt}, {"poses", poses}};
}

struct LoadedModels {
  anchors::AnchorDictionary dict;
  decoder::DecoderModel decoder;
  scorer::ScorerModel scorer;
};

LoadedModels load_models(const EvalArgs& args, const Config& config) {
  decoder::DecoderConfig dec_cfg = config.decoder;
  if (args.layers) dec_cfg.layers = *args.layers;
  LoadedModels m{anchors::load_dictionary(args.anchors_path),
                 decoder::DecoderModel{dec_cfg, config.steps, bev::kChannelCount,
                                       nn::load_checkpoint(args.decoder_path)},
                 scorer::ScorerModel{config.steps, bev::kChannelCount, dec_cfg.embed_dim,
                                     dec_cfg.posenc_dim, nn::load_checkpoint(args.scorer_path)}};
  if (m.dict.steps() != config.steps) {
    throw std::runtime_error(args.anchors_path + ": dictionary steps (" +
                             std::to_string(m.dict.steps()) + ") do not match config steps (" +
                             std::to_string(config.steps) + ")");
  }
  // Fail early when the checkpoint does not cover the requested layer count.
  for (int j = 0; j < dec_cfg.layers; ++j) {
    if (!m.decoder.params.has(m.decoder.layer_prefix(j) + ".off.W")) {
      throw std::runtime_error(args.decoder_path + ": checkpoint has no layer " +
                               std::to_string(j) + "; train with --layers " +
                               std::to_string(dec_cfg.layers) + " or adjust the config");
    }
  }
  return m;
}

const char* reason_name(const PlanOutcome& outcome, int candidate) {
  if (outcome.reasons.empty()) return "kept";
  return postproc::discard_reason_name(outcome.reasons[static_cast<std::size_t>(candidate)]);
}

}  // namespace

int cmd_gen_synthetic(const GenArgs& args, const Config& config) {
  SyntheticParams params{config.steps, config.dt};
  generate_dataset(args.out_dir, args.count, args.seed.value_or(config.seed), params);
  std::cout << "wrote " << args.count << " scenarios to " << args.out_dir << "\n";
  return 0;
}

int cmd_build_anchors(const BuildAnchorsArgs& args, const Config& config) {
  std::vector<scene::Trajectory> corpus;
  if (args.dataset_dir.empty()) {
    corpus = anchors::synthetic_corpus(config.steps, config.dt, config.seed);
  } else {
    for (const scene::Scenario& s : scene::load_dataset(args.dataset_dir, config.steps)) {
      corpus.push_back(s.human_trajectory);
    }
  }
  const anchors::AnchorDictionary dict =
      anchors::build_dictionary(corpus, config.anchor_count, config.seed);
  anchors::save_dictionary(dict, args.out_path);
  std::cout << "clustered " << dict.corpus_size << " trajectories into " << dict.count()
            << " anchors (" << dict.iterations << " iterations) -> " << args.out_path << "\n";
  return 0;
}

int cmd_train(const TrainArgs& args, const Config& config) {
  Config cfg = config;
  if (args.layers) cfg.decoder.layers = *args.layers;

  const std::vector<scene::Scenario> dataset = scene::load_dataset(args.dataset_dir, cfg.steps);
  if (dataset.empty()) throw std::runtime_error(args.dataset_dir + ": dataset is empty");
  const anchors::AnchorDictionary dict = anchors::load_dictionary(args.anchors_path);

  // Mining schedule: hard cases appear multiplicity times.
  std::map<std::string, const scene::Scenario*> by_id;
  std::vector<std::string> ids;
  for (const scene::Scenario& s : dataset) {
    by_id[s.id] = &s;
    ids.push_back(s.id);
  }
  std::vector<std::string> schedule = ids;
  if (args.mining) {
    std::vector<mining::HardCaseReport> reports;
    for (const scene::Scenario& s : dataset) {
      reports.push_back(mining::detect_hard_case(s, cfg.mining));
    }
    schedule = mining::upsample(ids, reports, cfg.mining);
    json jr = json::array();
    for (const mining::HardCaseReport& r : reports) {
      jr.push_back({{"scenario", r.scenario_id},
                    {"tags", json(r.tags)},
                    {"max_curvature", r.max_curvature},
                    {"max_lateral_offset", r.max_lateral_offset}});
    }
    fs::create_directories(args.out_dir);
    write_file(fs::path(args.out_dir) / "hard_cases.json", jr.dump(2) + "\n");
  }
  fs::create_directories(args.out_dir);

  std::vector<const scene::Scenario*> train_set;
  for (const std::string& id : schedule) train_set.push_back(by_id.at(id));

  decoder::DecoderModel dec =
      decoder::make_decoder(cfg.decoder, cfg.steps, bev::kChannelCount, cfg.seed);
  decoder::TrainOptions dec_opts;
  dec_opts.epochs = cfg.epochs;
  dec_opts.lr = cfg.decoder_lr;
  dec_opts.gridmask_prob = cfg.gridmask_prob;
  dec_opts.gridmask = cfg.gridmask;
  dec_opts.seed = cfg.seed;
  const std::vector<Scalar> dec_loss =
      decoder::train_decoder(dec, train_set, dict, cfg.render, dec_opts);
  nn::save_checkpoint(dec.params, (fs::path(args.out_dir) / "decoder").string());

  scorer::ScorerModel sc = scorer::make_scorer(cfg.steps, bev::kChannelCount,
                                               cfg.decoder.embed_dim, cfg.decoder.posenc_dim,
                                               cfg.seed + 1);
  scorer::TrainOptions sc_opts;
  sc_opts.epochs = cfg.epochs;
  sc_opts.lr = cfg.scorer_lr;
  sc_opts.gridmask_prob = cfg.gridmask_prob;
  sc_opts.gridmask = cfg.gridmask;
  sc_opts.seed = cfg.seed;
  sc_opts.weights = cfg.weights;
  sc_opts.thresholds = cfg.thresholds;
  const std::vector<Scalar> sc_loss =
      scorer::train_scorer(sc, train_set, dict, dec, cfg.render, sc_opts);
  nn::save_checkpoint(sc.params, (fs::path(args.out_dir) / "scorer").string());

  // Per-epoch mean losses.
  const auto epoch_means = [&](const std::vector<Scalar>& losses) {
    json out = json::array();
    const std::size_t per = schedule.size();
    for (std::size_t i = 0; i < losses.size(); i += per) {
      Scalar sum = 0.0;
      const std::size_t end = std::min(losses.size(), i + per);
      for (std::size_t k = i; k < end; ++k) sum += losses[k];
      out.push_back(sum / static_cast<Scalar>(end - i));
    }
    return out;
  };
  const json history{{"decoder", epoch_means(dec_loss)}, {"scorer", epoch_means(sc_loss)}};
  write_file(fs::path(args.out_dir) / "loss_history.json", history.dump(2) + "\n");

  std::cout << "trained on " << dataset.size() << " scenarios (schedule " << schedule.size()
            << "); final decoder loss " << fmt(dec_loss.back()) << ", scorer loss "
            << fmt(sc_loss.back()) << "\n";
  return 0;
}

int cmd_plan(const EvalArgs& args, const Config& config) {
  Config cfg = config;
  if (args.layers) cfg.decoder.layers = *args.layers;
  const LoadedModels models = load_models(args, cfg);
  fs::create_directories(args.out_dir);
  if (!args.dump_bev_dir.empty()) fs::create_directories(args.dump_bev_dir);

  Rng pick_rng(cfg.seed ^ fnv1a("random-select"));
  const PlanOptions options{args.use_scorer, args.use_postproc};
  for (const std::string& id : scene::list_dataset(args.dataset_dir)) {
    const scene::Scenario s =
        scene::load_scenario((fs::path(args.dataset_dir) / (id + ".json")).string(), cfg.steps);
    const PlanOutcome outcome =
        plan_scenario(s, cfg, models.decoder, models.scorer, models.dict, options, &pick_rng);

    json j{{"scenario", id},
           {"chosen", outcome.chosen},
           {"fallback", outcome.fallback},
           {"trajectory",
            trajectory_json(outcome.candidates.trajectories[static_cast<std::size_t>(outcome.chosen)])}};
    write_file(fs::path(args.out_dir) / (id + "_plan.json"), j.dump(2) + "\n");

    if (!args.dump_bev_dir.empty()) {
      const bev::BevGrid grid = bev::render_bev(s, cfg.render);
      bev::write_channel_pgm(grid, args.dump_channel,
                             (fs::path(args.dump_bev_dir) / (id + ".pgm")).string());
    }
  }
  return 0;
}

int cmd_evaluate(const EvalArgs& args, const Config& config) {
  Config cfg = config;
  if (args.layers) cfg.decoder.layers = *args.layers;
  const LoadedModels models = load_models(args, cfg);
  fs::create_directories(args.out_dir);
  fs::create_directories(fs::path(args.out_dir) / "reports");

  std::ostringstream cand_csv;
  cand_csv << "scenario,candidate,epdms_hat,nc_hat,dac_hat,comfort_hat,oracle_epdms,"
              "discard_reason,chosen\n";
  std::ostringstream summary_csv;
  summary_csv << "scenario,chosen,fallback,nc,dac,ddc,tlc,ep,ttc,lk,hc,ec,epdms\n";

  json scenarios_json = json::array();
  Scalar mean_epdms = 0.0;
  Scalar sum_nc = 0, sum_dac = 0, sum_ddc = 0, sum_tlc = 0, sum_ep = 0, sum_ttc = 0,
         sum_lk = 0, sum_hc = 0, sum_ec = 0;

  Rng pick_rng(cfg.seed ^ fnv1a("random-select"));
  const PlanOptions options{args.use_scorer, args.use_postproc};
  const std::vector<std::string> ids = scene::list_dataset(args.dataset_dir);
  if (ids.empty()) throw std::runtime_error(args.dataset_dir + ": dataset is empty");

  for (const std::string& id : ids) {
    const scene::Scenario s =
        scene::load_scenario((fs::path(args.dataset_dir) / (id + ".json")).string(), cfg.steps);
    const PlanOutcome outcome =
        plan_scenario(s, cfg, models.decoder, models.scorer, models.dict, options, &pick_rng);

    const int n = static_cast<int>(outcome.candidates.trajectories.size());
    json cand_json = json::array();
    for (int i = 0; i < n; ++i) {
      const scene::Trajectory& traj = outcome.candidates.trajectories[static_cast<std::size_t>(i)];
      const epdms::MetricReport rep = epdms::evaluate(s, traj, cfg.weights, cfg.thresholds);
      const scorer::ScorePrediction pred =
          options.use_scorer ? outcome.predictions[static_cast<std::size_t>(i)]
                             : scorer::ScorePrediction{};
      cand_csv << id << ',' << i << ',' << fmt(pred.epdms_hat) << ',' << fmt(pred.nc_hat)
               << ',' << fmt(pred.dac_hat) << ',' << fmt(pred.comfort_hat) << ','
               << fmt(rep.epdms) << ',' << reason_name(outcome, i) << ','
               << (i == outcome.chosen ? 1 : 0) << "\n";
      cand_json.push_back({{"candidate", i},
                           {"epdms_hat", pred.epdms_hat},
                           {"oracle_epdms", rep.epdms},
                           {"discard_reason", reason_name(outcome, i)}});
    }

    const epdms::MetricReport chosen_rep = epdms::evaluate(
        s, outcome.candidates.trajectories[static_cast<std::size_t>(outcome.chosen)],
        cfg.weights, cfg.thresholds);
    const epdms::SubMetrics& m = chosen_rep.agent;
    summary_csv << id << ',' << outcome.chosen << ',' << (outcome.fallback ? 1 : 0) << ','
                << fmt(m.nc) << ',' << fmt(m.dac) << ',' << fmt(m.ddc) << ',' << fmt(m.tlc)
                << ',' << fmt(m.ep) << ',' << fmt(m.ttc) << ',' << fmt(m.lk) << ','
                << fmt(m.hc) << ',' << fmt(m.ec) << ',' << fmt(chosen_rep.epdms) << "\n";
    sum_nc += m.nc;
    sum_dac += m.dac;
    sum_ddc += m.ddc;
    sum_tlc += m.tlc;
    sum_ep += m.ep;
    sum_ttc += m.ttc;
    sum_lk += m.lk;
    sum_hc += m.hc;
    sum_ec += m.ec;
    mean_epdms += chosen_rep.epdms;

    scenarios_json.push_back({{"scenario", id},
                              {"chosen", outcome.chosen},
                              {"fallback", outcome.fallback},
                              {"epdms", chosen_rep.epdms},
                              {"candidates", cand_json}});

    json report_json = json::parse(epdms::report_to_json(chosen_rep));
    report_json["scenario"] = id;
    report_json["chosen"] = outcome.chosen;
    report_json["fallback"] = outcome.fallback;
    json reasons = json::array();
    for (int i = 0; i < n; ++i) reasons.push_back(reason_name(outcome, i));
    report_json["discard_reasons"] = reasons;
    write_file(fs::path(args.out_dir) / "reports" / (id + ".json"), report_json.dump(2) + "\n");
  }

  const Scalar count = static_cast<Scalar>(ids.size());
  const json aggregate{{"scenarios", ids.size()},
                       {"nc", sum_nc / count},
                       {"dac", sum_dac / count},
                       {"ddc", sum_ddc / count},
                       {"tlc", sum_tlc / count},
                       {"ep", sum_ep / count},
                       {"ttc", sum_ttc / count},
                       {"lk", sum_lk / count},
                       {"hc", sum_hc / count},
                       {"ec", sum_ec / count},
                       {"epdms", mean_epdms / count}};
  const json summary{{"aggregate", aggregate}, {"per_scenario", scenarios_json}};

  write_file(fs::path(args.out_dir) / "candidates.csv", cand_csv.str());
  write_file(fs::path(args.out_dir) / "summary.csv", summary_csv.str());
  write_file(fs::path(args.out_dir) / "summary.json", summary.dump(2) + "\n");
  std::cout << "evaluated " << ids.size() << " scenarios; mean EPDMS "
            << fmt(mean_epdms / count) << "\n";
  return 0;
}

std::string render_report(const std::string& summary_json_text) {
  const json summary = json::parse(summary_json_text);
  const json& agg = summary.at("aggregate");
  const char* columns[] = {"nc", "dac", "ddc", "tlc", "ep", "ttc", "lk", "hc", "ec", "epdms"};
  std::ostringstream out;
  out << "scenarios: " << agg.at("scenarios").get<std::size_t>() << "\n";
  for (const char* c : columns) {
    std::string label = c;
    for (char& ch : label) ch = static_cast<char>(std::toupper(ch));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%8s", label.c_str());
    out << buf;
  }
  out << "\n";
  for (const char* c : columns) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%8.2f", agg.at(c).get<Scalar>() * 100.0);
    out << buf;
  }
  out << "\n";
  return out.str();
}

int cmd_report(const std::string& summary_path) {
  std::ifstream in(summary_path);
  if (!in) throw std::runtime_error(summary_path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::cout << render_report(buf.str());
  return 0;
}

}  // namespace bevplan::cli
