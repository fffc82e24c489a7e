#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpad/image.hpp"

namespace kpad {

enum class DetectorKind { dog, fast_hessian };

std::string_view to_string(DetectorKind kind);
DetectorKind detector_from_string(std::string_view name);

struct Keypoint {
  double x = 0.0;         // sub-pixel column, full-resolution coordinates
  double y = 0.0;         // sub-pixel row
  double scale = 0.0;     // characteristic sigma in pixels
  double response = 0.0;  // |DoG| or |det H|
  DetectorKind detector = DetectorKind::dog;
  // Pyramid location of the underlying grid sample. Diagnostic only.
  int octave = 0;
  int layer = 0;
};

/// Strict weak order used everywhere keypoints are ranked:
/// response desc, then scale desc, then y asc, then x asc.
bool stronger(const Keypoint& a, const Keypoint& b);

struct DetectorConfig {
  int octaves = 4;
  int scales_per_octave = 3;
  double base_sigma = 1.6;
  double contrast_threshold = 0.03;
  double edge_ratio_threshold = 10.0;
  int border_margin = 5;

  static DetectorConfig dog_defaults() { return {}; }
  static DetectorConfig fast_hessian_defaults() {
    DetectorConfig cfg;
    cfg.contrast_threshold = 1e-4;
    return cfg;
  }
  static DetectorConfig defaults_for(DetectorKind kind) {
    return kind == DetectorKind::dog ? dog_defaults() : fast_hessian_defaults();
  }
};

void validate(const DetectorConfig& cfg);

// --- Difference of Gaussians ---------------------------------------------

/// Nominal blur already present in an input image.
inline constexpr double kAssumedInputBlur = 0.5;

struct DogOctave {
  std::vector<GrayImage> gaussians;  // scales_per_octave + 3 levels
  std::vector<GrayImage> dogs;       // scales_per_octave + 2 levels
};

/// Gaussian and DoG pyramid. Every Gaussian level inside an octave is blurred
/// directly from the octave base; the next octave base is the level with twice
/// the base sigma, decimated by 2.
std::vector<DogOctave> build_dog_pyramid(const GrayImage& image, const DetectorConfig& cfg);

/// SIFT-style scale-space extrema with quadratic refinement and the
/// principal-curvature edge test. Requires at least 16x16 pixels.
std::vector<Keypoint> detect_dog(const GrayImage& image, const DetectorConfig& cfg = DetectorConfig::dog_defaults());

// --- Fast Hessian ------------------------------------------------------------

/// Box-filter side lengths used by `octave`: 3 * (2^(octave+1) * (i+1) + 1), i = 0..3.
std::vector<int> hessian_filter_sizes(int octave);

/// Approximated Hessian determinant Dxx*Dyy - (0.9*Dxy)^2 at pixel (row, col) for
/// box filters of side `filter_size`, normalized by filter area. The filter must
/// fit inside the image.
double hessian_determinant(const IntegralImage& integral, int row, int col, int filter_size);

/// SURF-style blob detector over the integral image. Requires at least 24x24 pixels.
std::vector<Keypoint> detect_fast_hessian(const GrayImage& image,
                                          const DetectorConfig& cfg = DetectorConfig::fast_hessian_defaults());

std::vector<Keypoint> detect(DetectorKind kind, const GrayImage& image, const DetectorConfig& cfg);

/// CSV dump with header `x,y,scale,response,detector`.
std::string keypoints_to_csv(std::span<const Keypoint> keypoints);

}  // namespace kpad
