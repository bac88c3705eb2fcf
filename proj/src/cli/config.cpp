#include "bevplan/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bevplan::cli {

namespace {

struct Field {
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

std::string format_scalar(Scalar v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Scalar parse_scalar(const std::string& key, const std::string& text) {
  std::size_t consumed = 0;
  Scalar v = 0.0;
  try {
    v = std::stod(text, &consumed);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": expected a number, got '" + text + "'");
  }
  if (consumed != text.size() || !std::isfinite(v)) {
    throw std::invalid_argument(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

long parse_int(const std::string& key, const std::string& text) {
  std::size_t consumed = 0;
  long v = 0;
  try {
    v = std::stol(text, &consumed);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": expected an integer, got '" + text + "'");
  }
  if (consumed != text.size()) {
    throw std::invalid_argument(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

const std::map<std::string, Field>& field_table() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    const auto scalar_field = [&t](const std::string& key, Scalar Config::* member) {
      t[key] = {[key, member](Config& c, const std::string& v) { c.*member = parse_scalar(key, v); },
                [member](const Config& c) { return format_scalar(c.*member); }};
    };
    const auto int_field = [&t](const std::string& key, int Config::* member) {
      t[key] = {[key, member](Config& c, const std::string& v) {
                  c.*member = static_cast<int>(parse_int(key, v));
                },
                [member](const Config& c) { return std::to_string(c.*member); }};
    };
    const auto nested_scalar = [&t](const std::string& key, auto accessor) {
      t[key] = {[key, accessor](Config& c, const std::string& v) { accessor(c) = parse_scalar(key, v); },
                [accessor](const Config& c) { return format_scalar(accessor(const_cast<Config&>(c))); }};
    };
    const auto nested_int = [&t](const std::string& key, auto accessor) {
      t[key] = {[key, accessor](Config& c, const std::string& v) {
                  accessor(c) = static_cast<int>(parse_int(key, v));
                },
                [accessor](const Config& c) {
                  return std::to_string(accessor(const_cast<Config&>(c)));
                }};
    };

    int_field("steps", &Config::steps);
    scalar_field("dt", &Config::dt);
    int_field("anchor_count", &Config::anchor_count);

    nested_int("decoder_layers", [](Config& c) -> int& { return c.decoder.layers; });
    nested_scalar("delta_max", [](Config& c) -> Scalar& { return c.decoder.delta_max; });
    nested_int("embed_dim", [](Config& c) -> int& { return c.decoder.embed_dim; });
    nested_int("posenc_dim", [](Config& c) -> int& { return c.decoder.posenc_dim; });

    nested_scalar("bev_extent", [](Config& c) -> Scalar& { return c.render.spec.extent; });
    nested_int("bev_cells", [](Config& c) -> int& { return c.render.spec.cells; });
    nested_scalar("bev_distance_clamp",
                  [](Config& c) -> Scalar& { return c.render.distance_clamp; });
    nested_scalar("bev_stop_line_halfwidth",
                  [](Config& c) -> Scalar& { return c.render.stop_line_halfwidth; });
    nested_int("gridmask_block", [](Config& c) -> int& { return c.gridmask.block; });
    nested_scalar("gridmask_keep", [](Config& c) -> Scalar& { return c.gridmask.keep; });
    scalar_field("gridmask_prob", &Config::gridmask_prob);

    nested_scalar("nc_stationary_speed",
                  [](Config& c) -> Scalar& { return c.thresholds.stationary_speed; });
    nested_scalar("ddc_minor", [](Config& c) -> Scalar& { return c.thresholds.ddc_minor; });
    nested_scalar("ddc_major", [](Config& c) -> Scalar& { return c.thresholds.ddc_major; });
    nested_scalar("ep_min_reference",
                  [](Config& c) -> Scalar& { return c.thresholds.ep_min_reference; });
    nested_scalar("ep_negligible",
                  [](Config& c) -> Scalar& { return c.thresholds.ep_negligible; });
    nested_scalar("ttc_horizon", [](Config& c) -> Scalar& { return c.thresholds.ttc_horizon; });
    nested_scalar("ttc_step", [](Config& c) -> Scalar& { return c.thresholds.ttc_step; });
    nested_scalar("hc_max_lon_accel",
                  [](Config& c) -> Scalar& { return c.thresholds.hc_max_lon_accel; });
    nested_scalar("hc_max_lat_accel",
                  [](Config& c) -> Scalar& { return c.thresholds.hc_max_lat_accel; });
    nested_scalar("hc_max_jerk", [](Config& c) -> Scalar& { return c.thresholds.hc_max_jerk; });
    nested_scalar("hc_max_yaw_rate",
                  [](Config& c) -> Scalar& { return c.thresholds.hc_max_yaw_rate; });
    nested_scalar("lk_max_lateral",
                  [](Config& c) -> Scalar& { return c.thresholds.lk_max_lateral; });
    nested_scalar("ec_max_accel_diff",
                  [](Config& c) -> Scalar& { return c.thresholds.ec_max_accel_diff; });

    nested_scalar("w_ttc", [](Config& c) -> Scalar& { return c.weights.ttc; });
    nested_scalar("w_ep", [](Config& c) -> Scalar& { return c.weights.ep; });
    nested_scalar("w_hc", [](Config& c) -> Scalar& { return c.weights.hc; });
    nested_scalar("w_lk", [](Config& c) -> Scalar& { return c.weights.lk; });
    nested_scalar("w_ec", [](Config& c) -> Scalar& { return c.weights.ec; });

    nested_scalar("a_min", [](Config& c) -> Scalar& { return c.filter.a_min; });
    nested_scalar("a_max", [](Config& c) -> Scalar& { return c.filter.a_max; });

    nested_scalar("curvature_threshold",
                  [](Config& c) -> Scalar& { return c.mining.curvature_threshold; });
    nested_scalar("lane_departure_threshold",
                  [](Config& c) -> Scalar& { return c.mining.lane_departure_threshold; });
    nested_int("upsample_multiplicity",
               [](Config& c) -> int& { return c.mining.multiplicity; });

    int_field("epochs", &Config::epochs);
    scalar_field("decoder_lr", &Config::decoder_lr);
    scalar_field("scorer_lr", &Config::scorer_lr);
    t["seed"] = {[](Config& c, const std::string& v) {
                   c.seed = static_cast<std::uint64_t>(parse_int("seed", v));
                 },
                 [](const Config& c) { return std::to_string(c.seed); }};
    return t;
  }();
  return table;
}

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void Config::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("config: ") + what);
  };
  require(steps >= 2, "steps must be >= 2");
  require(dt > 0.0, "dt must be > 0");
  require(anchor_count >= 1, "anchor_count must be >= 1");
  require(decoder.layers >= 1, "decoder_layers must be >= 1");
  require(decoder.delta_max > 0.0, "delta_max must be > 0");
  require(decoder.embed_dim >= 1, "embed_dim must be >= 1");
  require(decoder.posenc_dim >= 2 && decoder.posenc_dim % 2 == 0,
          "posenc_dim must be even and >= 2");
  require(render.spec.extent > 0.0, "bev_extent must be > 0");
  require(render.spec.cells >= 2, "bev_cells must be >= 2");
  require(render.distance_clamp > 0.0, "bev_distance_clamp must be > 0");
  require(gridmask_prob >= 0.0 && gridmask_prob <= 1.0, "gridmask_prob must be in [0, 1]");
  require(gridmask.block >= 1, "gridmask_block must be >= 1");
  require(gridmask.keep > 0.0 && gridmask.keep < 1.0, "gridmask_keep must be in (0, 1)");
  require(thresholds.stationary_speed >= 0.0, "nc_stationary_speed must be >= 0");
  require(thresholds.ddc_minor <= thresholds.ddc_major, "ddc_minor must be <= ddc_major");
  require(thresholds.ttc_horizon > 0.0 && thresholds.ttc_step > 0.0,
          "ttc_horizon and ttc_step must be > 0");
  require(thresholds.ttc_step <= thresholds.ttc_horizon, "ttc_step must be <= ttc_horizon");
  require(thresholds.lk_max_lateral >= 0.0, "lk_max_lateral must be >= 0");
  require(weights.ttc >= 0.0 && weights.ep >= 0.0 && weights.hc >= 0.0 &&
              weights.lk >= 0.0 && weights.ec >= 0.0,
          "metric weights must be >= 0");
  require(weights.ttc + weights.ep + weights.hc + weights.lk + weights.ec > 0.0,
          "metric weight sum must be > 0");
  require(filter.a_min <= filter.a_max, "a_min must be <= a_max");
  require(mining.curvature_threshold >= 0.0, "curvature_threshold must be >= 0");
  require(mining.lane_departure_threshold >= 0.0, "lane_departure_threshold must be >= 0");
  require(mining.multiplicity >= 1, "upsample_multiplicity must be >= 1");
  require(epochs >= 1, "epochs must be >= 1");
  require(decoder_lr > 0.0 && scorer_lr > 0.0, "learning rates must be > 0");
}

Config parse_config(const std::string& text, const std::string& name) {
  Config config;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(name + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto it = field_table().find(key);
    if (it == field_table().end()) {
      throw std::invalid_argument(name + ":" + std::to_string(lineno) + ": unknown key '" +
                                  key + "'");
    }
    it->second.set(config, value);
  }
  config.validate();
  return config;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string config_to_string(const Config& config) {
  std::ostringstream out;
  for (const auto& [key, field] : field_table()) {
    out << key << " = " << field.get(config) << "\n";
  }
  return out.str();
}

}  // namespace bevplan::cli
