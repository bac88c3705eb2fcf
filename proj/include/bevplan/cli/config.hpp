// Flat key = value configuration aggregating every module's tunables.
// Unknown keys are rejected; all values are validated on load.
#pragma once

#include <cstdint>
#include <string>

#include "bevplan/bev/grid.hpp"
#include "bevplan/bev/render.hpp"
#include "bevplan/decoder/decoder.hpp"
#include "bevplan/epdms/metrics.hpp"
#include "bevplan/mining/mining.hpp"
#include "bevplan/postproc/postproc.hpp"

namespace bevplan::cli {

struct Config {
  // Planning geometry.
  int steps = 8;       // T
  Scalar dt = 0.5;     // s
  int anchor_count = 20;  // N

  decoder::DecoderConfig decoder;
  bev::RenderParams render;
  bev::GridMaskParams gridmask;
  Scalar gridmask_prob = 0.5;  // training-time augmentation probability

  epdms::Thresholds thresholds;
  epdms::MetricWeights weights;
  postproc::FilterParams filter;
  mining::MiningParams mining;

  // Training.
  int epochs = 30;
  Scalar decoder_lr = 1e-2;
  Scalar scorer_lr = 5e-2;
  std::uint64_t seed = 42;

  // Throws std::invalid_argument with the offending field when inconsistent.
  void validate() const;
};

// Parses `key = value` lines; '#' starts a comment. Throws on unknown keys,
// malformed lines, or failed validation.
Config load_config(const std::string& path);
Config parse_config(const std::string& text, const std::string& name = "config");

// The full key set with current values, in file syntax.
std::string config_to_string(const Config& config);

}  // namespace bevplan::cli
