#include "bevplan/anchors/dictionary.hpp"

#include <cassert>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bevplan/rng.hpp"

namespace bevplan::anchors {

using nlohmann::json;
using scene::Pose2;
using scene::Trajectory;

namespace {

Vec flatten_xy(const Trajectory& t) {
  Vec v(2 * t.steps());
  for (int i = 0; i < t.steps(); ++i) {
    v(2 * i) = t.poses[static_cast<std::size_t>(i)].x;
    v(2 * i + 1) = t.poses[static_cast<std::size_t>(i)].y;
  }
  return v;
}

Trajectory unflatten_xy(const Vec& v, Scalar dt) {
  Trajectory t;
  t.dt = dt;
  const int steps = static_cast<int>(v.size()) / 2;
  t.poses.resize(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    t.poses[static_cast<std::size_t>(i)].x = v(2 * i);
    t.poses[static_cast<std::size_t>(i)].y = v(2 * i + 1);
  }
  scene::fill_yaw_from_positions(t.poses);
  return t;
}

}  // namespace

AnchorDictionary build_dictionary(const std::vector<Trajectory>& corpus, int n,
                                  std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("build_dictionary: n must be >= 1");
  const int m = static_cast<int>(corpus.size());
  if (m < n) throw std::invalid_argument("build_dictionary: corpus smaller than n");
  const int steps = corpus.front().steps();
  const Scalar dt = corpus.front().dt;
  for (const Trajectory& t : corpus) {
    if (t.steps() != steps) {
      throw std::invalid_argument("build_dictionary: inconsistent trajectory lengths");
    }
  }

  Mat points(m, 2 * steps);
  for (int i = 0; i < m; ++i) {
    points.row(i) = flatten_xy(corpus[static_cast<std::size_t>(i)]).transpose();
  }

  // k-means++ seeding.
  Rng rng(seed);
  Mat centroids(n, 2 * steps);
  centroids.row(0) = points.row(rng.uniform_int(0, m - 1));
  Vec d2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < n; ++k) {
    const Scalar total = d2.sum();
    int pick = 0;
    if (total > 0.0) {
      const Scalar target = rng.uniform() * total;
      Scalar acc = 0.0;
      for (int i = 0; i < m; ++i) {
        acc += d2(i);
        if (acc >= target) {
          pick = i;
          break;
        }
        pick = i;
      }
    } else {
      pick = rng.uniform_int(0, m - 1);
    }
    centroids.row(k) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centroids.row(k)).rowwise().squaredNorm());
  }

  std::vector<int> assign(static_cast<std::size_t>(m), 0);
  AnchorDictionary dict;
  constexpr Scalar kShiftTol = 1e-6;
  constexpr int kMaxIter = 100;
  Scalar prev_inertia = std::numeric_limits<Scalar>::infinity();

  for (int iter = 0; iter < kMaxIter; ++iter) {
    // Assignment; ties break to the lowest centroid index.
    Scalar inertia = 0.0;
    for (int i = 0; i < m; ++i) {
      Scalar best = std::numeric_limits<Scalar>::infinity();
      int best_k = 0;
      for (int k = 0; k < n; ++k) {
        const Scalar d = (points.row(i) - centroids.row(k)).squaredNorm();
        if (d < best) {
          best = d;
          best_k = k;
        }
      }
      assign[static_cast<std::size_t>(i)] = best_k;
      inertia += best;
    }
    assert(inertia <= prev_inertia + 1e-9);
    prev_inertia = inertia;
    dict.inertia_history.push_back(inertia);
    dict.iterations = iter + 1;

    // Mean update.
    Mat sums = Mat::Zero(n, 2 * steps);
    std::vector<int> counts(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < m; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
      counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])]++;
    }
    Mat next = centroids;
    for (int k = 0; k < n; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) {
        next.row(k) = sums.row(k) / counts[static_cast<std::size_t>(k)];
      }
    }
    // Reseed empty clusters to the point farthest from its assigned centroid.
    for (int k = 0; k < n; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) continue;
      Scalar worst = -1.0;
      int worst_i = 0;
      for (int i = 0; i < m; ++i) {
        const Scalar d =
            (points.row(i) - next.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > worst) {
          worst = d;
          worst_i = i;
        }
      }
      next.row(k) = points.row(worst_i);
    }

    const Scalar shift = (next - centroids).rowwise().norm().maxCoeff();
    centroids = next;
    if (shift < kShiftTol) break;
  }

  dict.corpus_size = m;
  dict.anchors.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    dict.anchors.push_back(unflatten_xy(centroids.row(k).transpose(), dt));
  }
  return dict;
}

int nearest_anchor(const AnchorDictionary& dict, const Trajectory& traj) {
  if (dict.anchors.empty()) throw std::invalid_argument("nearest_anchor: empty dictionary");
  if (traj.steps() != dict.steps()) {
    throw std::invalid_argument("nearest_anchor: step count mismatch");
  }
  const Vec q = flatten_xy(traj);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  int best_k = 0;
  for (int k = 0; k < dict.count(); ++k) {
    const Scalar d = (flatten_xy(dict.anchors[static_cast<std::size_t>(k)]) - q).squaredNorm();
    if (d < best) {
      best = d;
      best_k = k;
    }
  }
  return best_k;
}

void save_dictionary(const AnchorDictionary& dict, const std::string& path) {
  json anchors = json::array();
  for (const Trajectory& t : dict.anchors) {
    json poses = json::array();
    for (const Pose2& p : t.poses) poses.push_back(json::array({p.x, p.y, p.yaw}));
    anchors.push_back(poses);
  }
  const json j{{"N", dict.count()},
               {"T", dict.steps()},
               {"dt", dict.anchors.empty() ? 0.5 : dict.anchors.front().dt},
               {"anchors", anchors}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
}

AnchorDictionary load_dictionary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  json j;
  in >> j;
  AnchorDictionary dict;
  const Scalar dt = j.at("dt").get<Scalar>();
  const int steps = j.at("T").get<int>();
  for (const json& ja : j.at("anchors")) {
    Trajectory t;
    t.dt = dt;
    for (const json& jp : ja) {
      t.poses.push_back({jp.at(0).get<Scalar>(), jp.at(1).get<Scalar>(),
                         wrap_angle(jp.at(2).get<Scalar>())});
    }
    if (t.steps() != steps) throw std::runtime_error(path + ": anchor length mismatch");
    dict.anchors.push_back(std::move(t));
  }
  if (dict.count() != j.at("N").get<int>()) {
    throw std::runtime_error(path + ": anchor count mismatch");
  }
  return dict;
}

std::vector<Trajectory> synthetic_corpus(int steps, Scalar dt, std::uint64_t seed,
                                         int variants_per_shape) {
  Rng rng(seed);
  std::vector<Trajectory> corpus;

  const Scalar speeds[] = {1.5, 3.0, 5.0, 8.0, 11.0};
  const Scalar curvatures[] = {-0.10, -0.05, -0.02, 0.0, 0.02, 0.05, 0.10};

  const auto arc = [&](Scalar v, Scalar kappa, Scalar jitter) {
    Trajectory t;
    t.dt = dt;
    for (int i = 1; i <= steps; ++i) {
      const Scalar s = v * dt * i;
      Pose2 p;
      if (std::abs(kappa) < 1e-9) {
        p.x = s;
        p.y = 0.0;
      } else {
        p.x = std::sin(kappa * s) / kappa;
        p.y = (1.0 - std::cos(kappa * s)) / kappa;
      }
      p.x += jitter * rng.uniform(-1.0, 1.0);
      p.y += jitter * rng.uniform(-1.0, 1.0);
      t.poses.push_back(p);
    }
    scene::fill_yaw_from_positions(t.poses);
    return t;
  };

  const auto lane_change = [&](Scalar v, Scalar offset, Scalar jitter) {
    Trajectory t;
    t.dt = dt;
    const Scalar total = steps * dt;
    for (int i = 1; i <= steps; ++i) {
      const Scalar u = (i * dt) / total;
      const Scalar blend = u * u * (3.0 - 2.0 * u);  // smoothstep
      Pose2 p;
      p.x = v * dt * i + jitter * rng.uniform(-1.0, 1.0);
      p.y = offset * blend + jitter * rng.uniform(-1.0, 1.0);
      t.poses.push_back(p);
    }
    scene::fill_yaw_from_positions(t.poses);
    return t;
  };

  for (Scalar v : speeds) {
    for (Scalar kappa : curvatures) {
      corpus.push_back(arc(v, kappa, 0.0));
      for (int r = 1; r < variants_per_shape; ++r) corpus.push_back(arc(v, kappa, 0.05));
    }
    for (Scalar offset : {-3.5, 3.5}) {
      corpus.push_back(lane_change(v, offset, 0.0));
      for (int r = 1; r < variants_per_shape; ++r) corpus.push_back(lane_change(v, offset, 0.05));
    }
  }
  // Stationary / creeping starts.
  for (int r = 0; r < variants_per_shape; ++r) corpus.push_back(arc(0.3, 0.0, 0.01));
  return corpus;
}

}  // namespace bevplan::anchors
