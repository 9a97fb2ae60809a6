#ifndef ORRECON_DATASET_HPP
#define ORRECON_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "orrecon/geom.hpp"
#include "orrecon/image.hpp"
#include "orrecon/io.hpp"
#include "orrecon/metrics.hpp"

namespace orrecon::io {

/// One camera's streams inside a dataset. Pixel files are loaded lazily;
/// the ground-truth trajectory is small and kept in memory.
struct CameraStream {
  std::string name;
  CameraIntrinsics intrinsics;  // depth_scale filled from the manifest
  std::filesystem::path depth_dir;
  std::filesystem::path mask_dir;
  std::filesystem::path gt_mask_dir;  // empty when the dataset has none
  metrics::Trajectory gt_trajectory;  // world_from_camera per frame

  bool has_gt_masks() const { return !gt_mask_dir.empty(); }
};

/// Parsed + validated dataset: existence of every referenced frame file,
/// kinematics/trajectory timestamp agreement and label-map sanity are all
/// checked up front; pixel data loads on demand via load_frame.
struct DatasetManifest {
  std::filesystem::path root;
  double fps = 0.0;
  int frames = 0;
  double depth_scale = 1.0;
  std::map<std::string, std::uint8_t> label_map;  // injective
  std::vector<CameraStream> cameras;
  std::vector<TimedPose> kinematics;  // op_from_base per frame
  std::filesystem::path calibration_file;    // empty if absent
  std::filesystem::path calib_samples_file;  // empty if absent

  /// Label id for a class name; throws for names missing from the map.
  std::uint8_t label_id(const std::string& name) const;
  const CameraStream& camera(const std::string& name) const;
};

/// Load `dir/manifest.json` (or a manifest path directly) and validate the
/// whole dataset contract. Errors name the offending file or key.
DatasetManifest load_dataset(const std::filesystem::path& path);

/// Depth + corrupted mask for one frame; timestamp comes from the
/// kinematics row. Dimension mismatches against the intrinsics throw.
FrameBundle load_frame(const DatasetManifest& dataset,
                       const CameraStream& camera, int index);

/// Clean ground-truth mask for one frame (evaluation only).
LabelMask load_gt_mask(const DatasetManifest& dataset,
                       const CameraStream& camera, int index);

/// Frame file name convention shared by the simulator and the loader.
std::string frame_file_name(int index);

}  // namespace orrecon::io

#endif  // ORRECON_DATASET_HPP
