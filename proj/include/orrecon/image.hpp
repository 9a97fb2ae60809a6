#ifndef ORRECON_IMAGE_HPP
#define ORRECON_IMAGE_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace orrecon {

/// Single-channel depth image in millimeters. 0 marks invalid pixels.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> mm;  // row-major, size width*height

  DepthImage() = default;
  DepthImage(int w, int h, double fill = 0.0)
      : width(w), height(h), mm(static_cast<size_t>(w) * h, fill) {}

  double& at(int u, int v) { return mm[static_cast<size_t>(v) * width + u]; }
  double at(int u, int v) const {
    return mm[static_cast<size_t>(v) * width + u];
  }
};

/// Per-pixel class-id mask. 0 is background.
struct LabelMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> labels;  // row-major, size width*height

  LabelMask() = default;
  LabelMask(int w, int h, uint8_t fill = 0)
      : width(w), height(h), labels(static_cast<size_t>(w) * h, fill) {}

  uint8_t& at(int u, int v) {
    return labels[static_cast<size_t>(v) * width + u];
  }
  uint8_t at(int u, int v) const {
    return labels[static_cast<size_t>(v) * width + u];
  }

  bool same_size(const LabelMask& other) const {
    return width == other.width && height == other.height;
  }
};

/// Flat-shaded RGB image, only emitted for human inspection.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;  // row-major, 3 bytes per pixel

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), rgb(size_t(w) * h * 3, 0) {}
};

/// One timestamped capture: depth + label mask, optional color.
struct FrameBundle {
  double timestamp_s = 0.0;
  int index = -1;
  DepthImage depth;
  LabelMask mask;
  std::optional<RgbImage> rgb;

  void check_consistent() const {
    if (depth.width != mask.width || depth.height != mask.height) {
      throw std::invalid_argument("FrameBundle: depth/mask dimension mismatch");
    }
  }
};

}  // namespace orrecon

#endif  // ORRECON_IMAGE_HPP
