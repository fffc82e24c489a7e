#include "kpad/detector.hpp"

#include <sstream>
#include <tuple>

#include "kpad/csv.hpp"
#include "kpad/errors.hpp"

namespace kpad {

std::string_view to_string(DetectorKind kind) { return kind == DetectorKind::dog ? "dog" : "fast_hessian"; }

DetectorKind detector_from_string(std::string_view name) {
  if (name == "dog" || name == "sift") return DetectorKind::dog;
  if (name == "fast_hessian" || name == "surf") return DetectorKind::fast_hessian;
  throw InvalidArgument("unknown detector '" + std::string(name) + "' (expected dog or fast_hessian)");
}

bool stronger(const Keypoint& a, const Keypoint& b) {
  // Note the mixed directions: larger response/scale first, smaller y/x first.
  return std::tie(b.response, b.scale, a.y, a.x) < std::tie(a.response, a.scale, b.y, b.x);
}

void validate(const DetectorConfig& cfg) {
  if (cfg.octaves < 1) throw InvalidArgument("detector octaves must be >= 1");
  if (cfg.scales_per_octave < 2) throw InvalidArgument("detector scales_per_octave must be >= 2");
  if (!(cfg.base_sigma > 0.0)) throw InvalidArgument("detector base_sigma must be > 0");
  if (!(cfg.contrast_threshold >= 0.0) || !(cfg.edge_ratio_threshold >= 0.0))
    throw InvalidArgument("detector thresholds must be >= 0");
  if (cfg.border_margin < 0) throw InvalidArgument("detector border_margin must be >= 0");
}

std::vector<Keypoint> detect(DetectorKind kind, const GrayImage& image, const DetectorConfig& cfg) {
  return kind == DetectorKind::dog ? detect_dog(image, cfg) : detect_fast_hessian(image, cfg);
}

std::string keypoints_to_csv(std::span<const Keypoint> keypoints) {
  std::ostringstream out;
  out << "x,y,scale,response,detector\n";
  for (const auto& kp : keypoints) {
    out << csv::format_number(kp.x) << ',' << csv::format_number(kp.y) << ',' << csv::format_number(kp.scale) << ','
        << csv::format_number(kp.response) << ',' << to_string(kp.detector) << '\n';
  }
  return out.str();
}

}  // namespace kpad
