#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orrecon/calib.hpp"
#include "orrecon/config.hpp"
#include "orrecon/dataset.hpp"
#include "orrecon/metrics.hpp"
#include "orrecon/pipeline.hpp"
#include "orrecon/sim.hpp"

namespace fs = std::filesystem;
using namespace orrecon;

namespace {

int cmd_simulate(const fs::path& config_path, const fs::path& out_dir) {
  const io::SimulateConfig config = io::load_simulate_config(config_path);
  const sim::DatasetSummary summary = sim::generate_dataset(
      config.scene, config.rig, config.corruption, config.duration_s, out_dir);
  std::printf("wrote %d frames per camera to %s\n", summary.frames,
              summary.manifest_path.string().c_str());
  return 0;
}

int cmd_calibrate(const fs::path& dataset_dir, const fs::path& out_path) {
  const io::DatasetManifest dataset = io::load_dataset(dataset_dir);
  if (dataset.calib_samples_file.empty()) {
    throw std::runtime_error("dataset has no calib_samples file");
  }
  const io::CalibSamplesFile samples =
      io::load_calib_samples(dataset.calib_samples_file);

  const CameraIntrinsics& k_op = dataset.camera("op").intrinsics;
  const CameraIntrinsics& k_base = dataset.camera("base").intrinsics;
  const calib::HandEyeResult hand_eye =
      calib::solve_ax_xb(samples.samples, k_op);
  const calib::StaticCameraResult static_cam =
      calib::solve_y(hand_eye.x, samples.samples, k_base, k_op);

  io::CalibrationFile calibration;
  calibration.x = hand_eye.x;
  calibration.y = static_cam.y;
  calibration.hand_eye_mean_residual = hand_eye.mean_residual;
  calibration.hand_eye_max_residual = hand_eye.max_residual;
  calibration.y_rotation_spread_deg = static_cam.rotation_spread_deg;
  calibration.y_translation_spread_mm = static_cam.translation_spread_mm;
  io::save_calibration(out_path, calibration);

  std::printf("hand-eye X from %d motion pairs: residual mean %.6g, max %.6g\n",
              hand_eye.pairs_used, hand_eye.mean_residual,
              hand_eye.max_residual);
  std::printf(
      "static Y from %d samples: rotation spread %.6g deg, translation "
      "spread %.6g mm\n",
      static_cam.samples_used, static_cam.rotation_spread_deg,
      static_cam.translation_spread_mm);
  std::printf("wrote %s\n", out_path.string().c_str());
  return 0;
}

int cmd_reconstruct(const fs::path& dataset_dir, const fs::path& calib_path,
                    const fs::path& config_path, const fs::path& out_dir,
                    bool snapshots) {
  const io::DatasetManifest dataset = io::load_dataset(dataset_dir);
  const io::CalibrationFile calibration = io::load_calibration(calib_path);
  const PipelineConfig config = config_path.empty()
                                    ? PipelineConfig{}
                                    : io::load_pipeline_config(config_path);

  pipeline::RunOptions options;
  options.out_dir = out_dir;
  options.keyframe_snapshots = snapshots;
  const pipeline::RunSummary summary =
      pipeline::run_reconstruction(dataset, calibration, config, options);

  std::printf(
      "%d frames: %d base keyframes, %d op keyframes, %d fusions, "
      "%d eval frames\n",
      summary.frames, summary.keyframes_base, summary.keyframes_op,
      summary.fusions, summary.eval_frames);
  std::printf("clouds: base %zu, op %zu, global %zu points\n",
              summary.base_cloud_size, summary.op_cloud_size,
              summary.global_cloud_size);
  for (const std::string& w : summary.warnings) {
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  }
  return 0;
}

int cmd_evaluate_traj(const fs::path& est_path, const fs::path& gt_path,
                      const fs::path& report_path) {
  const metrics::Trajectory est = io::read_tum(est_path);
  const metrics::Trajectory gt = io::read_tum(gt_path);
  const metrics::TrajectoryError err = metrics::evaluate_trajectory(est, gt);

  std::printf("ATE %.3f mm (rmse), mean %.3f mm, median %.3f mm\n",
              err.ate_rmse, err.ate_mean, err.ate_median);
  std::printf("RPE %.3f deg/s (mean), median %.3f deg/s\n", err.rpe_mean,
              err.rpe_median);
  std::printf("%d matched pairs\n", err.matched_pairs);

  if (!report_path.empty()) {
    nlohmann::json report = {
        {"ate_rmse_mm", err.ate_rmse},     {"ate_mean_mm", err.ate_mean},
        {"ate_median_mm", err.ate_median}, {"rpe_mean_deg_s", err.rpe_mean},
        {"rpe_median_deg_s", err.rpe_median},
        {"matched_pairs", err.matched_pairs}};
    std::ofstream out(report_path);
    if (!out) {
      throw std::runtime_error("cannot write " + report_path.string());
    }
    out << report.dump(2) << '\n';
  }
  return 0;
}

// Label ids every generated dataset uses; a manifest overrides them.
std::map<std::string, uint8_t> default_label_map() {
  return {{"background", sim::kLabelBackground},
          {"table", sim::kLabelTable},
          {"human", sim::kLabelHuman},
          {"floor", sim::kLabelFloor}};
}

uint8_t resolve_class(const std::string& name, const fs::path& manifest_path) {
  if (!name.empty() &&
      std::all_of(name.begin(), name.end(),
                  [](unsigned char c) { return std::isdigit(c); })) {
    const int id = std::stoi(name);
    if (id < 0 || id > 255) {
      throw std::runtime_error("class id out of range: " + name);
    }
    return static_cast<uint8_t>(id);
  }
  if (!manifest_path.empty()) {
    return io::load_dataset(manifest_path).label_id(name);
  }
  const auto labels = default_label_map();
  const auto it = labels.find(name);
  if (it == labels.end()) {
    throw std::runtime_error("unknown class \"" + name +
                             "\"; pass a numeric id or --manifest");
  }
  return it->second;
}

int cmd_evaluate_seg(const fs::path& pred_dir, const fs::path& gt_dir,
                     const std::string& class_name,
                     const fs::path& manifest_path,
                     const fs::path& report_path) {
  const uint8_t class_id = resolve_class(class_name, manifest_path);

  std::vector<fs::path> pred_files;
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    if (entry.path().extension() == ".png") {
      pred_files.push_back(entry.path());
    }
  }
  std::sort(pred_files.begin(), pred_files.end());

  std::vector<std::pair<std::string, double>> scores;
  for (const fs::path& pred_path : pred_files) {
    const fs::path gt_path = gt_dir / pred_path.filename();
    if (!fs::exists(gt_path)) {
      throw std::runtime_error("no ground-truth mask for " +
                               pred_path.filename().string());
    }
    const LabelMask pred = io::read_mask_png(pred_path);
    const LabelMask gt = io::read_mask_png(gt_path);
    scores.emplace_back(pred_path.filename().string(),
                        metrics::dice(pred, gt, class_id));
  }
  if (scores.empty()) {
    throw std::runtime_error("no .png masks under " + pred_dir.string());
  }

  double sum = 0.0;
  for (const auto& [name, score] : scores) {
    sum += score;
  }
  const double mean = sum / static_cast<double>(scores.size());
  std::printf("DICE %.4f (mean over %zu frames, class %s=%d)\n", mean,
              scores.size(), class_name.c_str(), class_id);

  if (!report_path.empty()) {
    nlohmann::json report;
    report["class"] = class_name;
    report["class_id"] = class_id;
    report["mean_dice"] = mean;
    report["frames"] = nlohmann::json::object();
    for (const auto& [name, score] : scores) {
      report["frames"][name] = score;
    }
    std::ofstream out(report_path);
    if (!out) {
      throw std::runtime_error("cannot write " + report_path.string());
    }
    out << report.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-camera semantic RGB-D reconstruction toolkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  fs::path sim_config, sim_out;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Generate a synthetic dataset");
  simulate->add_option("--config", sim_config, "scene/rig/corruption JSON")
      ->required();
  simulate->add_option("--out", sim_out, "output dataset directory")
      ->required();

  fs::path cal_dataset, cal_out;
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "Solve hand-eye X and static-camera Y from a dataset");
  calibrate->add_option("--dataset", cal_dataset, "dataset directory")
      ->required();
  calibrate->add_option("--out", cal_out, "calibration JSON to write")
      ->required();

  fs::path rec_dataset, rec_calib, rec_config, rec_out;
  bool rec_snapshots = false;
  CLI::App* reconstruct =
      app.add_subcommand("reconstruct", "Run the full reconstruction");
  reconstruct->add_option("--dataset", rec_dataset, "dataset directory")
      ->required();
  reconstruct->add_option("--calib", rec_calib, "calibration JSON")
      ->required();
  reconstruct->add_option("--config", rec_config,
                          "pipeline JSON (defaults when omitted)");
  reconstruct->add_option("--out", rec_out, "output directory")->required();
  reconstruct->add_flag("--snapshots", rec_snapshots,
                        "write per-keyframe camera-cloud PLYs");

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Trajectory / segmentation metrics");
  evaluate->require_subcommand(1);

  fs::path traj_est, traj_gt, traj_report;
  CLI::App* traj = evaluate->add_subcommand("traj", "ATE + RPE of a TUM file");
  traj->add_option("--est", traj_est, "estimated trajectory")->required();
  traj->add_option("--gt", traj_gt, "ground-truth trajectory")->required();
  traj->add_option("--out", traj_report, "JSON report path");

  fs::path seg_pred, seg_gt, seg_manifest, seg_report;
  std::string seg_class = "table";
  CLI::App* seg =
      evaluate->add_subcommand("seg", "DICE of a mask directory pair");
  seg->add_option("--pred", seg_pred, "predicted mask directory")->required();
  seg->add_option("--gt", seg_gt, "ground-truth mask directory")->required();
  seg->add_option("--class", seg_class,
                  "class name or numeric id (default: table)");
  seg->add_option("--manifest", seg_manifest,
                  "dataset manifest for class-name lookup");
  seg->add_option("--out", seg_report, "JSON report path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return cmd_simulate(sim_config, sim_out);
    }
    if (calibrate->parsed()) {
      return cmd_calibrate(cal_dataset, cal_out);
    }
    if (reconstruct->parsed()) {
      return cmd_reconstruct(rec_dataset, rec_calib, rec_config, rec_out,
                             rec_snapshots);
    }
    if (traj->parsed()) {
      return cmd_evaluate_traj(traj_est, traj_gt, traj_report);
    }
    if (seg->parsed()) {
      return cmd_evaluate_seg(seg_pred, seg_gt, seg_class, seg_manifest,
                              seg_report);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
