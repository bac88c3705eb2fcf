#include "bevplan/scene/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bevplan::scene {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

Scalar get_finite(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const Scalar v = j.get<Scalar>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

const json& get_key(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) fail(path, std::string("missing key '") + key + "'");
  return j.at(key);
}

// Pose arrays are [x, y, yaw] or [x, y]; returns whether yaw was present.
Pose2 parse_pose(const json& j, const std::string& path, bool* had_yaw = nullptr) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3)) {
    fail(path, "expected [x, y] or [x, y, yaw]");
  }
  Pose2 p;
  p.x = get_finite(j[0], path + "[0]");
  p.y = get_finite(j[1], path + "[1]");
  if (j.size() == 3) {
    p.yaw = wrap_angle(get_finite(j[2], path + "[2]"));
    if (had_yaw) *had_yaw = true;
  } else if (had_yaw) {
    *had_yaw = false;
  }
  return p;
}

std::vector<Pose2> parse_pose_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of poses");
  std::vector<Pose2> poses;
  poses.reserve(j.size());
  bool any_missing_yaw = false;
  for (std::size_t i = 0; i < j.size(); ++i) {
    bool had_yaw = false;
    poses.push_back(parse_pose(j[i], path + "[" + std::to_string(i) + "]", &had_yaw));
    any_missing_yaw |= !had_yaw;
  }
  if (any_missing_yaw) fill_yaw_from_positions(poses);
  return poses;
}

Trajectory parse_trajectory(const json& j, const std::string& path) {
  Trajectory t;
  t.dt = get_finite(get_key(j, "dt", path), path + ".dt");
  if (t.dt <= 0.0) fail(path + ".dt", "must be > 0");
  t.poses = parse_pose_list(get_key(j, "poses", path), path + ".poses");
  if (t.poses.empty()) fail(path + ".poses", "must be non-empty");
  return t;
}

Vec2 parse_point(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [x, y]");
  return Vec2(get_finite(j[0], path + "[0]"), get_finite(j[1], path + "[1]"));
}

Polygon parse_polygon(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() < 3) fail(path, "polygon needs at least 3 vertices");
  Polygon poly;
  for (std::size_t i = 0; i < j.size(); ++i) {
    poly.push_back(parse_point(j[i], path + "[" + std::to_string(i) + "]"));
  }
  // Simple non-degeneracy checks: positive CCW area, no repeated neighbors.
  Scalar area2 = 0.0;
  for (std::size_t i = 0, n = poly.size(), k = n - 1; i < n; k = i++) {
    area2 += poly[k].x() * poly[i].y() - poly[i].x() * poly[k].y();
    if ((poly[i] - poly[k]).squaredNorm() == 0.0) fail(path, "repeated consecutive vertex");
  }
  if (area2 <= 0.0) fail(path, "vertices must be CCW with positive area");
  return poly;
}

json pose_to_json(const Pose2& p) { return json::array({p.x, p.y, p.yaw}); }

json point_to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

json trajectory_to_json(const Trajectory& t) {
  json poses = json::array();
  for (const Pose2& p : t.poses) poses.push_back(pose_to_json(p));
  return json{{"dt", t.dt}, {"poses", poses}};
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& name,
                        int expected_steps) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(name + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(name + ": top level must be an object");

  static const char* kKeys[] = {"ego",          "ego_history", "agents",
                                "drivable_area", "centerlines", "traffic_lights",
                                "route",         "human_trajectory", "prev_plan",
                                "camera",        "detections2d", "tags"};
  for (const char* k : kKeys) {
    if (!j.contains(k)) fail(name, std::string("missing top-level key '") + k + "'");
  }

  Scenario s;
  s.id = name;

  {
    const json& je = j.at("ego");
    s.ego.pose = parse_pose(get_key(je, "pose", "ego"), "ego.pose");
    s.ego.speed = get_finite(get_key(je, "speed", "ego"), "ego.speed");
    s.ego.accel = get_finite(get_key(je, "accel", "ego"), "ego.accel");
    s.ego.width = get_finite(get_key(je, "width", "ego"), "ego.width");
    s.ego.length = get_finite(get_key(je, "length", "ego"), "ego.length");
    if (s.ego.speed < 0.0) fail("ego.speed", "must be >= 0");
    if (s.ego.width <= 0.0) fail("ego.width", "must be > 0");
    if (s.ego.length <= 0.0) fail("ego.length", "must be > 0");
  }

  s.ego_history = parse_pose_list(j.at("ego_history"), "ego_history");

  s.human_trajectory = parse_trajectory(j.at("human_trajectory"), "human_trajectory");
  const int steps = s.human_trajectory.steps();
  if (expected_steps > 0 && steps != expected_steps) {
    fail("human_trajectory.poses", "expected " + std::to_string(expected_steps) +
                                       " poses, got " + std::to_string(steps));
  }

  {
    const json& ja = j.at("agents");
    if (!ja.is_array()) fail("agents", "expected an array");
    for (std::size_t i = 0; i < ja.size(); ++i) {
      const std::string path = "agents[" + std::to_string(i) + "]";
      const json& e = ja[i];
      Agent a;
      a.id = get_key(e, "id", path).get<std::string>();
      a.width = get_finite(get_key(e, "width", path), path + ".width");
      a.length = get_finite(get_key(e, "length", path), path + ".length");
      if (a.width <= 0.0) fail(path + ".width", "must be > 0");
      if (a.length <= 0.0) fail(path + ".length", "must be > 0");
      a.is_stationary = get_key(e, "is_stationary", path).get<bool>();
      a.track = parse_pose_list(get_key(e, "track", path), path + ".track");
      if (static_cast<int>(a.track.size()) != steps + 1) {
        fail(path + ".track", "expected " + std::to_string(steps + 1) + " poses, got " +
                                  std::to_string(a.track.size()));
      }
      s.agents.push_back(std::move(a));
    }
  }

  {
    const json& jd = j.at("drivable_area");
    if (!jd.is_array()) fail("drivable_area", "expected an array of polygons");
    for (std::size_t i = 0; i < jd.size(); ++i) {
      s.drivable_area.push_back(parse_polygon(jd[i], "drivable_area[" + std::to_string(i) + "]"));
    }
  }

  {
    const json& jc = j.at("centerlines");
    if (!jc.is_array()) fail("centerlines", "expected an array of polylines");
    for (std::size_t i = 0; i < jc.size(); ++i) {
      const std::string path = "centerlines[" + std::to_string(i) + "]";
      const json& line = jc[i];
      if (!line.is_array() || line.empty()) fail(path, "expected a non-empty array");
      Centerline cl;
      for (std::size_t k = 0; k < line.size(); ++k) {
        const std::string pp = path + "[" + std::to_string(k) + "]";
        const json& pt = line[k];
        if (!pt.is_array() || pt.size() != 3) fail(pp, "expected [x, y, theta]");
        cl.push_back({get_finite(pt[0], pp), get_finite(pt[1], pp),
                      wrap_angle(get_finite(pt[2], pp))});
      }
      s.centerlines.push_back(std::move(cl));
    }
  }

  {
    const json& jt = j.at("traffic_lights");
    if (!jt.is_array()) fail("traffic_lights", "expected an array");
    for (std::size_t i = 0; i < jt.size(); ++i) {
      const std::string path = "traffic_lights[" + std::to_string(i) + "]";
      const json& e = jt[i];
      TrafficLight tl;
      const json& line = get_key(e, "stop_line", path);
      if (!line.is_array() || line.size() != 2) fail(path + ".stop_line", "expected two points");
      tl.stop_line_a = parse_point(line[0], path + ".stop_line[0]");
      tl.stop_line_b = parse_point(line[1], path + ".stop_line[1]");
      const std::string state = get_key(e, "state", path).get<std::string>();
      if (state == "red") {
        tl.state = LightState::kRed;
      } else if (state == "green") {
        tl.state = LightState::kGreen;
      } else {
        fail(path + ".state", "expected 'red' or 'green'");
      }
      s.traffic_lights.push_back(tl);
    }
  }

  {
    const json& jr = j.at("route");
    if (!jr.is_array() || jr.empty()) fail("route", "must be a non-empty array of points");
    for (std::size_t i = 0; i < jr.size(); ++i) {
      s.route.push_back(parse_point(jr[i], "route[" + std::to_string(i) + "]"));
    }
  }

  if (!j.at("prev_plan").is_null()) {
    Trajectory prev = parse_trajectory(j.at("prev_plan"), "prev_plan");
    if (prev.steps() != steps) {
      fail("prev_plan.poses", "expected " + std::to_string(steps) + " poses, got " +
                                  std::to_string(prev.steps()));
    }
    s.prev_plan = std::move(prev);
  }

  {
    const json& jc = j.at("camera");
    s.camera.fx = get_finite(get_key(jc, "fx", "camera"), "camera.fx");
    s.camera.fy = get_finite(get_key(jc, "fy", "camera"), "camera.fy");
    s.camera.cx = get_finite(get_key(jc, "cx", "camera"), "camera.cx");
    s.camera.cy = get_finite(get_key(jc, "cy", "camera"), "camera.cy");
    if (s.camera.fx <= 0.0 || s.camera.fy <= 0.0) fail("camera", "fx, fy must be > 0");
    s.camera.width = get_key(jc, "width", "camera").get<int>();
    s.camera.height = get_key(jc, "height", "camera").get<int>();
    if (s.camera.width <= 0 || s.camera.height <= 0) fail("camera", "image dims must be > 0");
    const json& jr = get_key(jc, "R", "camera");
    if (!jr.is_array() || jr.size() != 9) fail("camera.R", "expected 9 values (row-major)");
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        s.camera.rotation(r, c) = get_finite(jr[static_cast<std::size_t>(3 * r + c)], "camera.R");
      }
    }
    const json& jtr = get_key(jc, "t", "camera");
    if (!jtr.is_array() || jtr.size() != 3) fail("camera.t", "expected 3 values");
    for (int r = 0; r < 3; ++r) {
      s.camera.translation(r) = get_finite(jtr[static_cast<std::size_t>(r)], "camera.t");
    }
  }

  {
    const json& jd = j.at("detections2d");
    const Scalar w = static_cast<Scalar>(s.camera.width);
    const Scalar h = static_cast<Scalar>(s.camera.height);
    const json& jl = get_key(jd, "lane_lines", "detections2d");
    if (!jl.is_array()) fail("detections2d.lane_lines", "expected an array");
    for (std::size_t i = 0; i < jl.size(); ++i) {
      const std::string path = "detections2d.lane_lines[" + std::to_string(i) + "]";
      if (!jl[i].is_array()) fail(path, "expected an array of points");
      std::vector<Vec2> line;
      for (std::size_t k = 0; k < jl[i].size(); ++k) {
        Vec2 p = parse_point(jl[i][k], path + "[" + std::to_string(k) + "]");
        line.emplace_back(std::clamp(p.x(), 0.0, w), std::clamp(p.y(), 0.0, h));
      }
      s.detections2d.lane_lines.push_back(std::move(line));
    }
    const json& jo = get_key(jd, "obstacles", "detections2d");
    if (!jo.is_array()) fail("detections2d.obstacles", "expected an array");
    for (std::size_t i = 0; i < jo.size(); ++i) {
      const std::string path = "detections2d.obstacles[" + std::to_string(i) + "]";
      const json& e = jo[i];
      if (!e.is_array() || e.size() != 4) fail(path, "expected [u_min, v_min, u_max, v_max]");
      ImageBox b;
      b.u_min = std::clamp(get_finite(e[0], path), 0.0, w);
      b.v_min = std::clamp(get_finite(e[1], path), 0.0, h);
      b.u_max = std::clamp(get_finite(e[2], path), 0.0, w);
      b.v_max = std::clamp(get_finite(e[3], path), 0.0, h);
      if (b.u_min > b.u_max || b.v_min > b.v_max) fail(path, "box min must not exceed max");
      s.detections2d.obstacles.push_back(b);
    }
  }

  {
    const json& jt = j.at("tags");
    if (!jt.is_array()) fail("tags", "expected an array of strings");
    for (const json& e : jt) s.tags.insert(e.get<std::string>());
  }

  return s;
}

Scenario load_scenario(const std::string& path, int expected_steps) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), std::filesystem::path(path).stem().string(),
                        expected_steps);
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["ego"] = {{"pose", pose_to_json(s.ego.pose)}, {"speed", s.ego.speed},
              {"accel", s.ego.accel},             {"width", s.ego.width},
              {"length", s.ego.length}};
  json hist = json::array();
  for (const Pose2& p : s.ego_history) hist.push_back(pose_to_json(p));
  j["ego_history"] = hist;

  json agents = json::array();
  for (const Agent& a : s.agents) {
    json track = json::array();
    for (const Pose2& p : a.track) track.push_back(pose_to_json(p));
    agents.push_back({{"id", a.id},
                      {"width", a.width},
                      {"length", a.length},
                      {"is_stationary", a.is_stationary},
                      {"track", track}});
  }
  j["agents"] = agents;

  json drivable = json::array();
  for (const Polygon& poly : s.drivable_area) {
    json jp = json::array();
    for (const Vec2& v : poly) jp.push_back(point_to_json(v));
    drivable.push_back(jp);
  }
  j["drivable_area"] = drivable;

  json centerlines = json::array();
  for (const Centerline& line : s.centerlines) {
    json jl = json::array();
    for (const CenterlinePoint& p : line) jl.push_back(json::array({p.x, p.y, p.theta}));
    centerlines.push_back(jl);
  }
  j["centerlines"] = centerlines;

  json lights = json::array();
  for (const TrafficLight& tl : s.traffic_lights) {
    lights.push_back(
        {{"stop_line", json::array({point_to_json(tl.stop_line_a), point_to_json(tl.stop_line_b)})},
         {"state", tl.state == LightState::kRed ? "red" : "green"}});
  }
  j["traffic_lights"] = lights;

  json route = json::array();
  for (const Vec2& v : s.route) route.push_back(point_to_json(v));
  j["route"] = route;

  j["human_trajectory"] = trajectory_to_json(s.human_trajectory);
  j["prev_plan"] = s.prev_plan ? trajectory_to_json(*s.prev_plan) : json();

  j["camera"] = {{"fx", s.camera.fx},
                 {"fy", s.camera.fy},
                 {"cx", s.camera.cx},
                 {"cy", s.camera.cy},
                 {"width", s.camera.width},
                 {"height", s.camera.height},
                 {"R", json::array({s.camera.rotation(0, 0), s.camera.rotation(0, 1),
                                    s.camera.rotation(0, 2), s.camera.rotation(1, 0),
                                    s.camera.rotation(1, 1), s.camera.rotation(1, 2),
                                    s.camera.rotation(2, 0), s.camera.rotation(2, 1),
                                    s.camera.rotation(2, 2)})},
                 {"t", json::array({s.camera.translation(0), s.camera.translation(1),
                                    s.camera.translation(2)})}};

  json lanes = json::array();
  for (const auto& line : s.detections2d.lane_lines) {
    json jl = json::array();
    for (const Vec2& p : line) jl.push_back(point_to_json(p));
    lanes.push_back(jl);
  }
  json obstacles = json::array();
  for (const ImageBox& b : s.detections2d.obstacles) {
    obstacles.push_back(json::array({b.u_min, b.v_min, b.u_max, b.v_max}));
  }
  j["detections2d"] = {{"lane_lines", lanes}, {"obstacles", obstacles}};

  j["tags"] = json(s.tags);

  return j.dump(2) + "\n";
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << scenario_to_json(s);
}

std::vector<std::string> list_dataset(const std::string& dir) {
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<Scenario> load_dataset(const std::string& dir, int expected_steps) {
  std::vector<Scenario> out;
  for (const std::string& id : list_dataset(dir)) {
    out.push_back(load_scenario((std::filesystem::path(dir) / (id + ".json")).string(),
                                expected_steps));
  }
  return out;
}

}  // namespace bevplan::scene
