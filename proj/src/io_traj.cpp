#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>

#include "orrecon/io.hpp"

namespace orrecon::io {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

}  // namespace

void write_tum(const std::filesystem::path& path,
               const metrics::Trajectory& trajectory) {
  trajectory.validate();
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out << "# timestamp tx ty tz qx qy qz qw (translation in meters)\n";
  char line[256];
  for (const auto& [t, pose] : trajectory.samples) {
    const Eigen::Quaterniond q(pose.rotation());
    const Eigen::Vector3d m = pose.translation() / 1000.0;  // mm -> m
    std::snprintf(line, sizeof(line),
                  "%.6f %.12f %.12f %.12f %.12f %.12f %.12f %.12f\n", t,
                  m.x(), m.y(), m.z(), q.x(), q.y(), q.z(), q.w());
    out << line;
  }
  if (!out) fail(path, "write failed");
}

metrics::Trajectory read_tum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  metrics::Trajectory trajectory;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double t, tx, ty, tz, qx, qy, qz, qw;
    if (!(ls >> t >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      fail(path, "malformed line " + std::to_string(lineno));
    }
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (std::abs(q.norm() - 1.0) > 1e-6) {
      fail(path, "non-unit quaternion at line " + std::to_string(lineno));
    }
    trajectory.push_back(
        t, RigidTransform(q.normalized().toRotationMatrix(),
                          Eigen::Vector3d(tx, ty, tz) * 1000.0));  // m -> mm
  }
  trajectory.validate();
  return trajectory;
}

void write_kinematics_csv(const std::filesystem::path& path,
                          const std::vector<TimedPose>& poses) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out << "timestamp,r00,r01,r02,r10,r11,r12,r20,r21,r22,tx,ty,tz\n";
  char line[512];
  for (const auto& [t, pose] : poses) {
    const Eigen::Matrix3d& r = pose.rotation();
    const Eigen::Vector3d& tr = pose.translation();
    std::snprintf(line, sizeof(line),
                  "%.6f,%.12f,%.12f,%.12f,%.12f,%.12f,%.12f,%.12f,%.12f,"
                  "%.12f,%.6f,%.6f,%.6f\n",
                  t, r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2),
                  r(2, 0), r(2, 1), r(2, 2), tr.x(), tr.y(), tr.z());
    out << line;
  }
  if (!out) fail(path, "write failed");
}

std::vector<TimedPose> read_kinematics_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::vector<TimedPose> poses;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("timestamp", 0) == 0) continue;  // header
    std::istringstream ls(line);
    double v[13];
    for (int i = 0; i < 13; ++i) {
      std::string cell;
      if (!std::getline(ls, cell, ',')) {
        fail(path, "malformed row at line " + std::to_string(lineno));
      }
      try {
        v[i] = std::stod(cell);
      } catch (const std::exception&) {
        fail(path, "bad number at line " + std::to_string(lineno));
      }
    }
    Eigen::Matrix3d r;
    r << v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9];
    poses.emplace_back(
        v[0], RigidTransform(nearest_rotation(r),
                             Eigen::Vector3d(v[10], v[11], v[12])));
    if (poses.size() > 1 &&
        poses[poses.size() - 2].first >= poses.back().first) {
      fail(path, "timestamps not strictly increasing at line " +
                     std::to_string(lineno));
    }
  }
  return poses;
}

}  // namespace orrecon::io
