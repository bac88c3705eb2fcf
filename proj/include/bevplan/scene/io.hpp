// Scenario JSON ingestion and emission. One scenario per file; a directory
// of such files is a dataset.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bevplan/scene/types.hpp"

namespace bevplan::scene {

// Malformed JSON or I/O failure.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A type invariant violated; the message names the offending field path.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Loads and fully validates a scenario. Poses given as [x, y] (yaw omitted)
// get yaw filled by finite differences. If expected_steps > 0, the horizon
// length is checked against it.
Scenario load_scenario(const std::string& path, int expected_steps = -1);

// Parses scenario JSON text; `name` is used as the scenario id and in errors.
Scenario parse_scenario(const std::string& json_text, const std::string& name,
                        int expected_steps = -1);

void save_scenario(const Scenario& s, const std::string& path);
std::string scenario_to_json(const Scenario& s);

// Sorted scenario ids (filename stems) of all *.json files in a directory.
std::vector<std::string> list_dataset(const std::string& dir);

// Loads every scenario of a dataset directory in sorted id order.
std::vector<Scenario> load_dataset(const std::string& dir, int expected_steps = -1);

}  // namespace bevplan::scene
