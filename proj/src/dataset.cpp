#include "orrecon/dataset.hpp"

#include <cstdio>
#include <set>

#include "json_util.hpp"

namespace orrecon::io {

namespace {

using jsonutil::as_int;
using jsonutil::as_number;
using jsonutil::require_keys;

CameraIntrinsics parse_intrinsics(const nlohmann::json& j,
                                  const std::string& ctx, double depth_scale) {
  require_keys(j, ctx, {"fx", "fy", "cx", "cy", "width", "height"});
  CameraIntrinsics k;
  k.fx = as_number(j.at("fx"), ctx + ".fx");
  k.fy = as_number(j.at("fy"), ctx + ".fy");
  k.cx = as_number(j.at("cx"), ctx + ".cx");
  k.cy = as_number(j.at("cy"), ctx + ".cy");
  k.width = as_int(j.at("width"), ctx + ".width");
  k.height = as_int(j.at("height"), ctx + ".height");
  k.depth_scale = depth_scale;
  k.validate();
  return k;
}

void require_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw std::runtime_error(path.string() + ": missing file");
  }
}

}  // namespace

std::string frame_file_name(int index) {
  char name[16];
  std::snprintf(name, sizeof name, "%06d.png", index);
  return name;
}

std::uint8_t DatasetManifest::label_id(const std::string& name) const {
  const auto it = label_map.find(name);
  if (it == label_map.end()) {
    throw std::invalid_argument("dataset label map has no class \"" + name +
                                "\"");
  }
  return it->second;
}

const CameraStream& DatasetManifest::camera(const std::string& name) const {
  for (const auto& cam : cameras) {
    if (cam.name == name) {
      return cam;
    }
  }
  throw std::invalid_argument("dataset has no camera \"" + name + "\"");
}

DatasetManifest load_dataset(const std::filesystem::path& path) {
  const std::filesystem::path manifest_path =
      std::filesystem::is_directory(path) ? path / "manifest.json" : path;
  const nlohmann::json j = jsonutil::parse_file(manifest_path);

  const std::string ctx = manifest_path.string();
  require_keys(j, ctx,
               {"format", "fps", "frames", "depth_scale", "label_map",
                "cameras", "kinematics"},
               {"calibration", "calib_samples"});
  if (j.at("format") != "orrecon-dataset-v1") {
    throw std::runtime_error(ctx + ": unsupported format (expected "
                             "\"orrecon-dataset-v1\")");
  }

  DatasetManifest dataset;
  dataset.root = manifest_path.parent_path();
  dataset.fps = as_number(j.at("fps"), ctx + ".fps");
  dataset.frames = as_int(j.at("frames"), ctx + ".frames");
  dataset.depth_scale = as_number(j.at("depth_scale"), ctx + ".depth_scale");
  if (dataset.fps <= 0.0 || dataset.frames < 1 || dataset.depth_scale <= 0.0) {
    throw std::runtime_error(ctx + ": fps, frames and depth_scale must be > 0");
  }

  jsonutil::require_object(j.at("label_map"), ctx + ".label_map");
  std::set<int> used_ids;
  for (const auto& [name, id] : j.at("label_map").items()) {
    const int value = as_int(id, ctx + ".label_map." + name);
    if (value < 0 || value > 255) {
      throw std::runtime_error(ctx + ".label_map." + name +
                               ": id must be in [0,255]");
    }
    if (!used_ids.insert(value).second) {
      throw std::runtime_error(ctx + ".label_map: duplicate id " +
                               std::to_string(value) +
                               " (map must be injective)");
    }
    dataset.label_map[name] = std::uint8_t(value);
  }
  for (const char* required : {"table", "human"}) {
    if (!dataset.label_map.count(required)) {
      throw std::runtime_error(ctx + ".label_map: class \"" +
                               std::string(required) + "\" is required");
    }
  }

  dataset.kinematics = read_kinematics_csv(
      dataset.root / j.at("kinematics").get<std::string>());
  if (int(dataset.kinematics.size()) != dataset.frames) {
    throw std::runtime_error(ctx + ": kinematics row count " +
                             std::to_string(dataset.kinematics.size()) +
                             " != frames " + std::to_string(dataset.frames));
  }

  if (!j.at("cameras").is_array() || j.at("cameras").empty()) {
    throw std::runtime_error(ctx + ".cameras: expected a non-empty array");
  }
  for (const auto& cam_j : j.at("cameras")) {
    const std::string cam_ctx = ctx + ".cameras[]";
    require_keys(cam_j, cam_ctx,
                 {"name", "intrinsics", "depth_dir", "mask_dir",
                  "gt_trajectory"},
                 {"gt_mask_dir"});
    CameraStream cam;
    cam.name = cam_j.at("name").get<std::string>();
    cam.intrinsics = parse_intrinsics(cam_j.at("intrinsics"),
                                      cam_ctx + ".intrinsics",
                                      dataset.depth_scale);
    cam.depth_dir = dataset.root / cam_j.at("depth_dir").get<std::string>();
    cam.mask_dir = dataset.root / cam_j.at("mask_dir").get<std::string>();
    if (cam_j.contains("gt_mask_dir")) {
      cam.gt_mask_dir =
          dataset.root / cam_j.at("gt_mask_dir").get<std::string>();
    }
    cam.gt_trajectory =
        read_tum(dataset.root / cam_j.at("gt_trajectory").get<std::string>());
    if (int(cam.gt_trajectory.size()) != dataset.frames) {
      throw std::runtime_error(cam_ctx + " \"" + cam.name +
                               "\": ground-truth pose count != frames");
    }
    for (int i = 0; i < dataset.frames; ++i) {
      const std::string name = frame_file_name(i);
      require_file(cam.depth_dir / name);
      require_file(cam.mask_dir / name);
      if (cam.has_gt_masks()) {
        require_file(cam.gt_mask_dir / name);
      }
      // Trajectory and kinematics timestamps must describe the same clock.
      if (std::abs(cam.gt_trajectory.samples[i].first -
                   dataset.kinematics[i].first) > 1e-6) {
        throw std::runtime_error(cam_ctx + " \"" + cam.name +
                                 "\": trajectory timestamps disagree with "
                                 "kinematics");
      }
    }
    dataset.cameras.push_back(std::move(cam));
  }

  if (j.contains("calibration")) {
    dataset.calibration_file =
        dataset.root / j.at("calibration").get<std::string>();
    require_file(dataset.calibration_file);
  }
  if (j.contains("calib_samples")) {
    dataset.calib_samples_file =
        dataset.root / j.at("calib_samples").get<std::string>();
    require_file(dataset.calib_samples_file);
  }
  return dataset;
}

FrameBundle load_frame(const DatasetManifest& dataset,
                       const CameraStream& camera, int index) {
  if (index < 0 || index >= dataset.frames) {
    throw std::invalid_argument("load_frame: index out of range");
  }
  const std::string name = frame_file_name(index);
  FrameBundle frame;
  frame.index = index;
  frame.timestamp_s = dataset.kinematics[index].first;
  frame.depth = read_depth_png(camera.depth_dir / name, dataset.depth_scale);
  frame.mask = read_mask_png(camera.mask_dir / name);
  if (frame.depth.width != camera.intrinsics.width ||
      frame.depth.height != camera.intrinsics.height) {
    throw std::runtime_error((camera.depth_dir / name).string() +
                             ": dimensions disagree with intrinsics");
  }
  frame.check_consistent();
  return frame;
}

LabelMask load_gt_mask(const DatasetManifest& dataset,
                       const CameraStream& camera, int index) {
  if (index < 0 || index >= dataset.frames) {
    throw std::invalid_argument("load_gt_mask: index out of range");
  }
  if (!camera.has_gt_masks()) {
    throw std::runtime_error("camera \"" + camera.name +
                             "\" has no ground-truth masks");
  }
  LabelMask mask = read_mask_png(camera.gt_mask_dir / frame_file_name(index));
  if (mask.width != camera.intrinsics.width ||
      mask.height != camera.intrinsics.height) {
    throw std::runtime_error(
        (camera.gt_mask_dir / frame_file_name(index)).string() +
        ": dimensions disagree with intrinsics");
  }
  return mask;
}

}  // namespace orrecon::io
