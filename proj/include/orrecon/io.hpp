#ifndef ORRECON_IO_HPP
#define ORRECON_IO_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "orrecon/cloud.hpp"
#include "orrecon/image.hpp"
#include "orrecon/metrics.hpp"

namespace orrecon::io {

// --- PNG -----------------------------------------------------------------
// Depth: single-channel 16-bit, value = millimeters (scaled by depth_scale
// on read/write; default 1.0). Fractions round to the nearest integer
// value; out-of-range values clamp. Masks: 8-bit label ids.

void write_depth_png(const std::filesystem::path& path,
                     const DepthImage& depth, double depth_scale = 1.0);
DepthImage read_depth_png(const std::filesystem::path& path,
                          double depth_scale = 1.0);

void write_mask_png(const std::filesystem::path& path, const LabelMask& mask);
LabelMask read_mask_png(const std::filesystem::path& path);

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_rgb_png(const std::filesystem::path& path);

// --- PLY -----------------------------------------------------------------
// Vertex layout: float32 x, y, z (mm) + uchar label. ASCII or binary
// little-endian; the reader detects the format from the header.

void write_ply(const std::filesystem::path& path,
               const LabeledPointCloud& cloud, bool binary = true);
LabeledPointCloud read_ply(const std::filesystem::path& path);

// --- Trajectories --------------------------------------------------------
// TUM format: "timestamp tx ty tz qx qy qz qw" per line, translation in
// meters in the file; converted to/from internal millimeters here.

void write_tum(const std::filesystem::path& path,
               const metrics::Trajectory& trajectory);
metrics::Trajectory read_tum(const std::filesystem::path& path);

// --- Kinematics ----------------------------------------------------------
// CSV rows: timestamp, r00..r22 row-major, tx, ty, tz (mm). The reader
// enforces strictly increasing timestamps.

using TimedPose = std::pair<double, RigidTransform>;

void write_kinematics_csv(const std::filesystem::path& path,
                          const std::vector<TimedPose>& poses);
std::vector<TimedPose> read_kinematics_csv(const std::filesystem::path& path);

}  // namespace orrecon::io

#endif  // ORRECON_IO_HPP
