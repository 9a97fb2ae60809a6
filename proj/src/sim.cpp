#include "orrecon/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "orrecon/metrics.hpp"

namespace orrecon::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRayEps = 1e-9;

// splitmix64 finalizer; decorrelates nearby seed/camera/frame indices.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint32_t frame_seed(std::uint64_t seed, int cam, int frame) {
  const std::uint64_t key =
      (std::uint64_t(std::uint32_t(cam)) << 32) | std::uint32_t(frame);
  const std::uint64_t h = mix64(seed ^ mix64(key));
  return std::uint32_t(h ^ (h >> 32));
}

// Smallest ray parameter s > kRayEps with |o + s*d - c| = r, else +inf.
double ray_sphere(const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                  const Eigen::Vector3d& c, double r) {
  const Eigen::Vector3d m = o - c;
  const double a = d.squaredNorm();
  const double b = 2.0 * m.dot(d);
  const double cc = m.squaredNorm() - r * r;
  const double disc = b * b - 4.0 * a * cc;
  if (disc < 0.0 || a <= 0.0) {
    return kInf;
  }
  const double sq = std::sqrt(disc);
  const double s0 = (-b - sq) / (2.0 * a);
  if (s0 > kRayEps) {
    return s0;
  }
  const double s1 = (-b + sq) / (2.0 * a);
  return s1 > kRayEps ? s1 : kInf;
}

// Capsule = segment c0..c1 swept by radius r. Degenerate segment = sphere.
double ray_capsule(const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                   const Eigen::Vector3d& c0, const Eigen::Vector3d& c1,
                   double r) {
  const Eigen::Vector3d ab = c1 - c0;
  const double len = ab.norm();
  if (len < 1e-9) {
    return ray_sphere(o, d, c0, r);
  }
  const Eigen::Vector3d axis = ab / len;
  const Eigen::Vector3d m = o - c0;
  const Eigen::Vector3d mp = m - m.dot(axis) * axis;
  const Eigen::Vector3d dp = d - d.dot(axis) * axis;
  double best = kInf;
  const double qa = dp.squaredNorm();
  if (qa > 1e-18) {  // lateral cylinder surface
    const double qb = 2.0 * mp.dot(dp);
    const double qc = mp.squaredNorm() - r * r;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (const double s : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
        if (s <= kRayEps || s >= best) {
          continue;
        }
        const double along = (m + s * d).dot(axis);
        if (along >= 0.0 && along <= len) {
          best = s;
        }
      }
    }
  }
  best = std::min(best, ray_sphere(o, d, c0, r));
  best = std::min(best, ray_sphere(o, d, c1, r));
  return best;
}

// Axis-aligned slab test in the box frame; half extents h. Returns the
// nearest boundary crossing in front of the ray origin (rays starting
// inside the box hit the far face).
double ray_aabb(const Eigen::Vector3d& ob, const Eigen::Vector3d& db,
                const Eigen::Vector3d& h) {
  double tmin = -kInf;
  double tmax = kInf;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(db[i]) < 1e-15) {
      if (std::abs(ob[i]) > h[i]) {
        return kInf;
      }
      continue;
    }
    double t1 = (-h[i] - ob[i]) / db[i];
    double t2 = (h[i] - ob[i]) / db[i];
    if (t1 > t2) {
      std::swap(t1, t2);
    }
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
    if (tmin > tmax) {
      return kInf;
    }
  }
  if (tmin > kRayEps) {
    return tmin;
  }
  return tmax > kRayEps ? tmax : kInf;
}

void require_strictly_increasing(const std::vector<io::TimedPose>& keyposes,
                                 const char* what) {
  if (keyposes.empty()) {
    throw std::invalid_argument(std::string(what) + ": no keyposes");
  }
  for (size_t i = 1; i < keyposes.size(); ++i) {
    if (keyposes[i].first <= keyposes[i - 1].first) {
      throw std::invalid_argument(std::string(what) +
                                  ": keypose times must be strictly increasing");
    }
  }
}

// Right-handed camera frame with +z toward the target; roll about the
// optical axis applied last.
RigidTransform lookat_world_from_cam(const Eigen::Vector3d& eye,
                                     const Eigen::Vector3d& target,
                                     Eigen::Vector3d up_hint, double roll_rad) {
  const Eigen::Vector3d fwd = (target - eye).normalized();
  if (std::abs(fwd.dot(up_hint.normalized())) > 0.999) {
    up_hint = Eigen::Vector3d::UnitX();
  }
  const Eigen::Vector3d right = up_hint.cross(fwd).normalized();
  const Eigen::Vector3d down = fwd.cross(right);
  Eigen::Matrix3d r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = fwd;
  r = r * Eigen::AngleAxisd(roll_rad, Eigen::Vector3d::UnitZ())
              .toRotationMatrix();
  return RigidTransform(r, eye);
}

void write_json_file(const std::filesystem::path& path,
                     const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error(path.string() + ": cannot open for writing");
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error(path.string() + ": write failed");
  }
}

nlohmann::json matrix_json(const RigidTransform& t) {
  const Eigen::Matrix4d m = t.matrix();
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    rows.push_back({m(i, 0), m(i, 1), m(i, 2), m(i, 3)});
  }
  return rows;
}

nlohmann::json intrinsics_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx},         {"fy", k.fy},     {"cx", k.cx},
          {"cy", k.cy},         {"width", k.width}, {"height", k.height}};
}

}  // namespace

void SceneConfig::validate() const {
  if (table.size_mm.minCoeff() <= 0.0) {
    throw std::invalid_argument("SceneConfig: table dimensions must be > 0");
  }
  for (const auto& human : humans) {
    if (human.waypoints_xy_mm.empty()) {
      throw std::invalid_argument("SceneConfig: human needs >= 1 waypoint");
    }
    if (human.radius_mm <= 0.0 || human.height_mm <= 0.0) {
      throw std::invalid_argument(
          "SceneConfig: human radius and height must be > 0");
    }
    if (human.speed_mm_s < 0.0) {
      throw std::invalid_argument("SceneConfig: human speed must be >= 0");
    }
  }
}

void CalibCaptureConfig::validate() const {
  board.validate();
  if (num_samples < 4) {
    throw std::invalid_argument("CalibCaptureConfig: need >= 4 samples");
  }
  if (orbit_radius_mm <= 0.0) {
    throw std::invalid_argument("CalibCaptureConfig: orbit radius must be > 0");
  }
  if (corner_noise_px < 0.0) {
    throw std::invalid_argument("CalibCaptureConfig: corner noise must be >= 0");
  }
}

CameraIntrinsics RigConfig::default_intrinsics() {
  CameraIntrinsics k;
  k.fx = 1000.0;
  k.fy = 1000.0;
  k.cx = 640.0;
  k.cy = 360.0;
  k.width = 1280;
  k.height = 720;
  return k;
}

CameraIntrinsics RigConfig::desk_intrinsics() {
  CameraIntrinsics k;
  k.fx = 250.0;
  k.fy = 250.0;
  k.cx = 160.0;
  k.cy = 144.0;
  k.width = 320;
  k.height = 288;
  return k;
}

void RigConfig::validate() const {
  require_strictly_increasing(base_keyposes, "RigConfig base trajectory");
  require_strictly_increasing(kin_keyposes, "RigConfig kinematics program");
  if (fps <= 0.0) {
    throw std::invalid_argument("RigConfig: fps must be > 0");
  }
  cam_base.validate();
  cam_op.validate();
  if (cam_base.depth_scale != cam_op.depth_scale) {
    throw std::invalid_argument(
        "RigConfig: both cameras must share one depth scale");
  }
  calib.validate();
}

void CorruptionConfig::validate() const {
  if (depth_sigma0_mm < 0.0 || depth_sigma1_per_mm < 0.0) {
    throw std::invalid_argument("CorruptionConfig: sigma must be >= 0");
  }
  for (const double rate : {dropout_rate, false_blob_rate, label_leak_prob}) {
    if (rate < 0.0 || rate > 1.0) {
      throw std::invalid_argument("CorruptionConfig: rates must be in [0,1]");
    }
  }
  if (mask_jitter_radius_px < 0 || false_blob_radius_px < 0) {
    throw std::invalid_argument("CorruptionConfig: radii must be >= 0");
  }
}

RigidTransform interpolate_pose(const std::vector<io::TimedPose>& keyposes,
                                double t) {
  require_strictly_increasing(keyposes, "interpolate_pose");
  if (t <= keyposes.front().first) {
    return keyposes.front().second;
  }
  if (t >= keyposes.back().first) {
    return keyposes.back().second;
  }
  const auto hi = std::upper_bound(
      keyposes.begin(), keyposes.end(), t,
      [](double value, const io::TimedPose& kp) { return value < kp.first; });
  const auto lo = hi - 1;
  const double a = (t - lo->first) / (hi->first - lo->first);
  const Eigen::Quaterniond q0(lo->second.rotation());
  const Eigen::Quaterniond q1(hi->second.rotation());
  const Eigen::Vector3d tr =
      (1.0 - a) * lo->second.translation() + a * hi->second.translation();
  return RigidTransform(q0.slerp(a, q1).toRotationMatrix(), tr);
}

Eigen::Vector3d human_position(const HumanConfig& human, double t) {
  const auto& wp = human.waypoints_xy_mm;
  if (wp.empty()) {
    throw std::invalid_argument("human_position: no waypoints");
  }
  if (wp.size() == 1 || human.speed_mm_s <= 0.0) {
    return {wp[0].x(), wp[0].y(), 0.0};
  }
  std::vector<double> seg_len(wp.size());
  double total = 0.0;
  for (size_t i = 0; i < wp.size(); ++i) {
    seg_len[i] = (wp[(i + 1) % wp.size()] - wp[i]).norm();
    total += seg_len[i];
  }
  if (total < 1e-9) {
    return {wp[0].x(), wp[0].y(), 0.0};
  }
  double s = std::fmod(human.speed_mm_s * t + human.start_phase * total, total);
  if (s < 0.0) {
    s += total;
  }
  for (size_t i = 0; i < wp.size(); ++i) {
    if (s <= seg_len[i] || i + 1 == wp.size()) {
      const double a =
          seg_len[i] > 0.0 ? std::min(s / seg_len[i], 1.0) : 0.0;
      const Eigen::Vector2d p = wp[i] + a * (wp[(i + 1) % wp.size()] - wp[i]);
      return {p.x(), p.y(), 0.0};
    }
    s -= seg_len[i];
  }
  return {wp[0].x(), wp[0].y(), 0.0};  // unreachable
}

FrameBundle render_frame(const SceneConfig& scene,
                         const RigidTransform& world_from_cam,
                         const CameraIntrinsics& intrinsics, double t) {
  scene.validate();
  intrinsics.validate();

  FrameBundle frame;
  frame.timestamp_s = t;
  frame.index = 0;
  frame.depth = DepthImage{intrinsics.width, intrinsics.height};
  frame.mask = LabelMask{intrinsics.width, intrinsics.height};

  const Eigen::Matrix3d r_wc = world_from_cam.rotation();
  const Eigen::Vector3d origin = world_from_cam.translation();

  const Eigen::Matrix3d box_rot = scene.table.pose.rotation().transpose();
  const Eigen::Vector3d origin_box =
      box_rot * (origin - scene.table.pose.translation());
  const Eigen::Vector3d half = 0.5 * scene.table.size_mm;

  struct Capsule {
    Eigen::Vector3d c0, c1;
    double r;
  };
  std::vector<Capsule> capsules;
  capsules.reserve(scene.humans.size());
  for (const auto& human : scene.humans) {
    const Eigen::Vector3d base = human_position(human, t);
    const double z0 = std::min(human.radius_mm, 0.5 * human.height_mm);
    const double z1 =
        std::max(human.height_mm - human.radius_mm, 0.5 * human.height_mm);
    capsules.push_back({base + Eigen::Vector3d(0, 0, z0),
                        base + Eigen::Vector3d(0, 0, z1), human.radius_mm});
  }

  for (int v = 0; v < intrinsics.height; ++v) {
    for (int u = 0; u < intrinsics.width; ++u) {
      const Eigen::Vector3d dir_cam((u - intrinsics.cx) / intrinsics.fx,
                                    (v - intrinsics.cy) / intrinsics.fy, 1.0);
      const Eigen::Vector3d d = r_wc * dir_cam;

      // Static primitives first; ties at identical range keep the static
      // label (dynamic hits must be strictly closer to win).
      double best = kInf;
      std::uint8_t label = kLabelBackground;
      if (scene.floor && std::abs(d.z()) > 1e-15) {
        const double s = -origin.z() / d.z();
        if (s > kRayEps && s < best) {
          best = s;
          label = kLabelFloor;
        }
      }
      const double s_table = ray_aabb(origin_box, box_rot * d, half);
      if (s_table < best) {
        best = s_table;
        label = kLabelTable;
      }
      for (const auto& cap : capsules) {
        const double s = ray_capsule(origin, d, cap.c0, cap.c1, cap.r);
        if (s < best) {
          best = s;
          label = kLabelHuman;
        }
      }
      if (std::isfinite(best)) {
        // dir_cam.z == 1, so the ray parameter is the camera-frame depth.
        frame.depth.at(u, v) = best;
        frame.mask.at(u, v) = label;
      }
    }
  }
  return frame;
}

FrameBundle corrupt_frame(const FrameBundle& frame,
                          const CorruptionConfig& corruption,
                          std::mt19937& rng) {
  corruption.validate();
  frame.check_consistent();
  FrameBundle out = frame;
  const int w = out.depth.width;
  const int h = out.depth.height;

  if (corruption.depth_sigma0_mm > 0.0 || corruption.depth_sigma1_per_mm > 0.0) {
    std::normal_distribution<double> n01(0.0, 1.0);
    for (auto& z : out.depth.mm) {
      if (z <= 0.0) {
        continue;
      }
      const double sigma =
          corruption.depth_sigma0_mm + corruption.depth_sigma1_per_mm * z * z;
      z += sigma * n01(rng);
      if (z <= 0.0) {
        z = 0.0;
      }
    }
  }

  if (corruption.dropout_rate > 0.0) {
    std::bernoulli_distribution drop(corruption.dropout_rate);
    for (auto& z : out.depth.mm) {
      if (z > 0.0 && drop(rng)) {
        z = 0.0;
      }
    }
  }

  if (corruption.mask_jitter_radius_px > 0) {
    const int r = corruption.mask_jitter_radius_px;
    const LabelMask src = out.mask;
    std::uniform_int_distribution<int> offset(-r, r);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const std::uint8_t here = src.at(u, v);
        bool boundary = false;
        for (int dv = -1; dv <= 1 && !boundary; ++dv) {
          for (int du = -1; du <= 1; ++du) {
            const int uu = u + du;
            const int vv = v + dv;
            if (uu < 0 || uu >= w || vv < 0 || vv >= h) {
              continue;
            }
            if (src.at(uu, vv) != here) {
              boundary = true;
              break;
            }
          }
        }
        if (!boundary) {
          continue;
        }
        const int su = std::clamp(u + offset(rng), 0, w - 1);
        const int sv = std::clamp(v + offset(rng), 0, h - 1);
        out.mask.at(u, v) = src.at(su, sv);
      }
    }
  }

  if (corruption.false_blob_rate > 0.0 && corruption.false_blob_radius_px > 0) {
    std::bernoulli_distribution spawn(corruption.false_blob_rate);
    if (spawn(rng)) {
      std::uniform_int_distribution<int> pick_u(0, w - 1);
      std::uniform_int_distribution<int> pick_v(0, h - 1);
      const int cu = pick_u(rng);
      const int cv = pick_v(rng);
      const int r = corruption.false_blob_radius_px;
      for (int dv = -r; dv <= r; ++dv) {
        for (int du = -r; du <= r; ++du) {
          if (du * du + dv * dv > r * r) {
            continue;
          }
          const int uu = cu + du;
          const int vv = cv + dv;
          if (uu >= 0 && uu < w && vv >= 0 && vv < h) {
            out.mask.at(uu, vv) = kLabelTable;
          }
        }
      }
    }
  }

  if (corruption.label_leak_prob > 0.0) {
    std::bernoulli_distribution leak(corruption.label_leak_prob);
    for (auto& label : out.mask.labels) {
      if (label == kLabelHuman && leak(rng)) {
        label = kLabelTable;
      }
    }
  }

  return out;
}

std::vector<calib::CalibrationSample> make_calib_samples(const RigConfig& rig,
                                                         std::uint64_t seed) {
  rig.validate();
  const auto& cc = rig.calib;
  const std::vector<Eigen::Vector3d> board_pts = cc.board.corner_points();

  const RigidTransform world_from_base0 = rig.base_keyposes.front().second;
  const RigidTransform cambase_from_world =
      (world_from_base0 * rig.y.inverse()).inverse();

  const Eigen::Vector3d center_board(
      0.5 * (cc.board.inner_cols - 1) * cc.board.square_size_mm,
      0.5 * (cc.board.inner_rows - 1) * cc.board.square_size_mm, 0.0);
  const Eigen::Vector3d center_world = cc.world_from_board * center_board;
  const Eigen::Vector3d board_normal_world =
      cc.world_from_board.rotation().col(2);
  const Eigen::Vector3d board_x_world = cc.world_from_board.rotation().col(0);
  const Eigen::Vector3d board_y_world = cc.world_from_board.rotation().col(1);

  std::mt19937 rng(frame_seed(seed, /*cam=*/-1, /*frame=*/0));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  const auto project_all = [&](const RigidTransform& cam_from_world,
                               const CameraIntrinsics& k, const char* name,
                               double noise_px) {
    std::vector<calib::CornerCorrespondence> corners;
    corners.reserve(board_pts.size());
    for (const auto& pb : board_pts) {
      const Eigen::Vector3d pc =
          cam_from_world * (cc.world_from_board * pb);
      auto uv = k.project(pc);
      if (!uv) {
        throw std::runtime_error(
            std::string("make_calib_samples: board corner out of view of the ") +
            name + " camera; adjust board pose or orbit radius");
      }
      if (noise_px > 0.0) {
        (*uv) += noise_px * Eigen::Vector2d(gauss(rng), gauss(rng));
      }
      corners.emplace_back(*uv, pb);
    }
    return corners;
  };

  std::vector<calib::CalibrationSample> samples;
  samples.reserve(cc.num_samples);
  for (int i = 0; i < cc.num_samples; ++i) {
    const double az = 2.0 * M_PI * i / cc.num_samples;
    const double el = (35.0 + 18.0 * (i % 3)) * M_PI / 180.0;
    const double radius = cc.orbit_radius_mm * (1.0 + 0.2 * (i % 4) / 3.0);
    const Eigen::Vector3d dir = std::cos(el) * std::cos(az) * board_x_world +
                                std::cos(el) * std::sin(az) * board_y_world +
                                std::sin(el) * board_normal_world;
    const Eigen::Vector3d eye = center_world + radius * dir;
    const double roll = 0.3 * uni(rng);
    const RigidTransform camop_from_world =
        lookat_world_from_cam(eye, center_world, board_x_world, roll).inverse();

    calib::CalibrationSample sample;
    sample.kinematics = rig.x.inverse() * camop_from_world * world_from_base0;
    sample.board_corners_op =
        project_all(camop_from_world, rig.cam_op, "op", cc.corner_noise_px);
    sample.board_corners_base = project_all(cambase_from_world, rig.cam_base,
                                            "base", cc.corner_noise_px);
    samples.push_back(std::move(sample));
  }
  return samples;
}

DatasetSummary generate_dataset(const SceneConfig& scene, const RigConfig& rig,
                                const CorruptionConfig& corruption,
                                double duration_s,
                                const std::filesystem::path& out_dir) {
  scene.validate();
  rig.validate();
  corruption.validate();
  if (!(duration_s > 0.0)) {
    throw std::invalid_argument("generate_dataset: duration must be > 0");
  }

  const int frames = std::max(1, int(std::llround(duration_s * rig.fps)));
  const double depth_scale = rig.cam_base.depth_scale;

  struct Cam {
    const char* name;
    const CameraIntrinsics* k;
  };
  const std::array<Cam, 2> cams = {Cam{"base", &rig.cam_base},
                                   Cam{"op", &rig.cam_op}};
  for (const auto& cam : cams) {
    for (const char* sub : {"depth", "mask", "gt_mask"}) {
      std::filesystem::create_directories(out_dir / cam.name / sub);
    }
  }

  std::vector<io::TimedPose> kin_rows;
  kin_rows.reserve(frames);
  std::array<metrics::Trajectory, 2> gt_traj;

  for (int i = 0; i < frames; ++i) {
    const double t = i / rig.fps;
    const RigidTransform world_from_base = interpolate_pose(rig.base_keyposes, t);
    const RigidTransform kin = interpolate_pose(rig.kin_keyposes, t);
    kin_rows.emplace_back(t, kin);

    const std::array<RigidTransform, 2> world_from_cam = {
        world_from_base * rig.y.inverse(),
        world_from_base * kin.inverse() * rig.x.inverse()};

    char name[16];
    std::snprintf(name, sizeof name, "%06d.png", i);
    for (size_t c = 0; c < cams.size(); ++c) {
      FrameBundle clean =
          render_frame(scene, world_from_cam[c], *cams[c].k, t);
      clean.index = i;
      std::mt19937 rng(frame_seed(scene.seed, int(c), i));
      const FrameBundle dirty = corrupt_frame(clean, corruption, rng);

      const auto cam_dir = out_dir / cams[c].name;
      io::write_depth_png(cam_dir / "depth" / name, dirty.depth, depth_scale);
      io::write_mask_png(cam_dir / "mask" / name, dirty.mask);
      io::write_mask_png(cam_dir / "gt_mask" / name, clean.mask);
      gt_traj[c].push_back(t, world_from_cam[c]);
    }
  }

  io::write_kinematics_csv(out_dir / "kinematics.csv", kin_rows);
  for (size_t c = 0; c < cams.size(); ++c) {
    io::write_tum(out_dir / cams[c].name / "gt_trajectory.tum", gt_traj[c]);
  }

  write_json_file(out_dir / "calib.json", {{"units", "mm"},
                                           {"X", matrix_json(rig.x)},
                                           {"Y", matrix_json(rig.y)}});

  const auto samples = make_calib_samples(rig, scene.seed);
  nlohmann::json samples_j;
  samples_j["board"] = {{"inner_cols", rig.calib.board.inner_cols},
                        {"inner_rows", rig.calib.board.inner_rows},
                        {"square_size_mm", rig.calib.board.square_size_mm}};
  samples_j["samples"] = nlohmann::json::array();
  for (const auto& sample : samples) {
    nlohmann::json s;
    s["kinematics"] = matrix_json(sample.kinematics);
    auto corners_json = [](const std::vector<calib::CornerCorrespondence>& cs) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& [uv, pb] : cs) {
        arr.push_back({uv.x(), uv.y()});
      }
      return arr;
    };
    s["op_corners"] = corners_json(sample.board_corners_op);
    if (sample.board_corners_base) {
      s["base_corners"] = corners_json(*sample.board_corners_base);
    }
    samples_j["samples"].push_back(std::move(s));
  }
  write_json_file(out_dir / "calib_samples.json", samples_j);

  nlohmann::json manifest;
  manifest["format"] = "orrecon-dataset-v1";
  manifest["fps"] = rig.fps;
  manifest["frames"] = frames;
  manifest["depth_scale"] = depth_scale;
  manifest["label_map"] = {{"background", kLabelBackground},
                           {"table", kLabelTable},
                           {"human", kLabelHuman},
                           {"floor", kLabelFloor}};
  manifest["cameras"] = nlohmann::json::array();
  for (const auto& cam : cams) {
    const std::string base = cam.name;
    manifest["cameras"].push_back(
        {{"name", cam.name},
         {"intrinsics", intrinsics_json(*cam.k)},
         {"depth_dir", base + "/depth"},
         {"mask_dir", base + "/mask"},
         {"gt_mask_dir", base + "/gt_mask"},
         {"gt_trajectory", base + "/gt_trajectory.tum"}});
  }
  manifest["kinematics"] = "kinematics.csv";
  manifest["calibration"] = "calib.json";
  manifest["calib_samples"] = "calib_samples.json";
  write_json_file(out_dir / "manifest.json", manifest);

  return {frames, out_dir / "manifest.json"};
}

}  // namespace orrecon::sim
