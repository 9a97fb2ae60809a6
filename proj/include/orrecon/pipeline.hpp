#ifndef ORRECON_PIPELINE_HPP
#define ORRECON_PIPELINE_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "orrecon/config.hpp"
#include "orrecon/dataset.hpp"

// End-to-end reconstruction over a two-camera dataset: per-frame poses,
// keyframe selection, per-camera semantic reconstruction, fusion into the
// robot base frame, and every artifact the evaluation stages consume.
namespace orrecon::pipeline {

struct RunOptions {
  std::filesystem::path out_dir;
  bool keyframe_snapshots = false;  // per-keyframe camera-cloud PLYs
};

struct RunSummary {
  int frames = 0;
  int keyframes_base = 0;
  int keyframes_op = 0;
  int fusions = 0;
  int eval_frames = 0;  // frames with refined masks on disk
  std::size_t base_cloud_size = 0;
  std::size_t op_cloud_size = 0;
  std::size_t global_cloud_size = 0;
  std::vector<std::string> warnings;
};

/// Runs the full reconstruction and writes under options.out_dir:
///   trajectory_base.txt / trajectory_op.txt   estimated poses, TUM format
///   cloud_base.ply / cloud_op.ply             final per-camera clouds
///   cloud_global.ply                          final fused cloud (base frame)
///   recon_percentage.csv                      per-frame size curves
///   fusion_log.csv                            per-fusion diagnostics
///   masks/slam/<cam>/ and masks/fused/<cam>/  refined masks, every
///                                             eval_stride-th frame once the
///                                             fused cloud exists
///   snapshots/<cam>/                          keyframe PLYs (flag-gated)
///
/// The cameras advance strictly in frame order, BASE before OP at each
/// index; fusion runs after any index that produced a keyframe, once both
/// cameras have a reconstruction. A fusion step or frame that fails is
/// skipped with a warning; only a first frame with no usable pose aborts.
RunSummary run_reconstruction(const io::DatasetManifest& dataset,
                              const io::CalibrationFile& calibration,
                              const PipelineConfig& config,
                              const RunOptions& options);

}  // namespace orrecon::pipeline

#endif  // ORRECON_PIPELINE_HPP
