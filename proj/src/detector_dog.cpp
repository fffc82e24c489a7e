#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "kpad/detector.hpp"
#include "kpad/errors.hpp"

namespace kpad {

namespace {

int min_octave_side(const DetectorConfig& cfg) { return 2 * std::max(cfg.border_margin, 1) + 1; }

bool is_strict_extremum(const std::vector<GrayImage>& dogs, int layer, int x, int y) {
  const double v = dogs[layer].at(x, y);
  const bool is_max = v > 0.0;
  for (int dl = -1; dl <= 1; ++dl) {
    const auto& img = dogs[layer + dl];
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dl == 0 && dx == 0 && dy == 0) continue;
        const double n = img.at(x + dx, y + dy);
        if (is_max ? !(v > n) : !(v < n)) return false;
      }
    }
  }
  return true;
}

}  // namespace

std::vector<DogOctave> build_dog_pyramid(const GrayImage& image, const DetectorConfig& cfg) {
  validate(cfg);
  const int s = cfg.scales_per_octave;
  const double sigma0 = cfg.base_sigma;

  GrayImage base = sigma0 > kAssumedInputBlur
                       ? gaussian_blur(image, std::sqrt(sigma0 * sigma0 - kAssumedInputBlur * kAssumedInputBlur))
                       : image;

  std::vector<DogOctave> pyramid;
  for (int o = 0; o < cfg.octaves; ++o) {
    if (std::min(base.width, base.height) < min_octave_side(cfg)) break;
    DogOctave octave;
    octave.gaussians.reserve(s + 3);
    octave.gaussians.push_back(base);
    for (int l = 1; l < s + 3; ++l) {
      const double extra = sigma0 * std::sqrt(std::pow(2.0, 2.0 * l / s) - 1.0);
      octave.gaussians.push_back(gaussian_blur(base, extra));
    }
    for (int l = 0; l < s + 2; ++l) {
      GrayImage d(base.width, base.height);
      const auto& lo = octave.gaussians[l].data;
      const auto& hi = octave.gaussians[l + 1].data;
      for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] = hi[i] - lo[i];
      octave.dogs.push_back(std::move(d));
    }
    base = downsample(octave.gaussians[s]);
    pyramid.push_back(std::move(octave));
  }
  return pyramid;
}

std::vector<Keypoint> detect_dog(const GrayImage& image, const DetectorConfig& cfg) {
  validate(image);
  validate(cfg);
  if (image.width < 16 || image.height < 16) throw InvalidArgument("detect_dog needs an image of at least 16x16 pixels");

  const auto pyramid = build_dog_pyramid(image, cfg);
  const int s = cfg.scales_per_octave;
  const double r = cfg.edge_ratio_threshold;
  const double prefilter = 0.5 * cfg.contrast_threshold;

  std::vector<Keypoint> out;
  for (int o = 0; o < static_cast<int>(pyramid.size()); ++o) {
    const auto& dogs = pyramid[o].dogs;
    const int w = dogs[0].width;
    const int h = dogs[0].height;
    const int margin = std::max(cfg.border_margin, 1);
    const double step = std::ldexp(1.0, o);

    for (int l = 1; l <= s; ++l) {
      const auto& cur = dogs[l];
      const auto& below = dogs[l - 1];
      const auto& above = dogs[l + 1];
      for (int y = margin; y < h - margin; ++y) {
        for (int x = margin; x < w - margin; ++x) {
          const double v = cur.at(x, y);
          if (std::abs(v) <= prefilter || v == 0.0) continue;
          if (!is_strict_extremum(dogs, l, x, y)) continue;

          const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - 2.0 * v;
          const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - 2.0 * v;
          const double dxy = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) - cur.at(x + 1, y - 1) +
                                     cur.at(x - 1, y - 1));

          // Principal-curvature ratio test on the spatial Hessian.
          const double tr = dxx + dyy;
          const double det = dxx * dyy - dxy * dxy;
          if (det <= 0.0 || tr * tr * r >= (r + 1.0) * (r + 1.0) * det) continue;

          const double dss = above.at(x, y) + below.at(x, y) - 2.0 * v;
          const double dxs =
              0.25 * (above.at(x + 1, y) - above.at(x - 1, y) - below.at(x + 1, y) + below.at(x - 1, y));
          const double dys =
              0.25 * (above.at(x, y + 1) - above.at(x, y - 1) - below.at(x, y + 1) + below.at(x, y - 1));
          const Eigen::Vector3d grad(0.5 * (cur.at(x + 1, y) - cur.at(x - 1, y)),
                                     0.5 * (cur.at(x, y + 1) - cur.at(x, y - 1)),
                                     0.5 * (above.at(x, y) - below.at(x, y)));
          Eigen::Matrix3d hess;
          hess << dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss;

          // Quadratic fit of the extremum; kept on the grid sample when the fit
          // lands closer to a neighbouring sample or the Hessian is singular.
          Eigen::Vector3d offset = Eigen::Vector3d::Zero();
          const auto lu = hess.fullPivLu();
          if (lu.isInvertible()) {
            Eigen::Vector3d candidate = -lu.solve(grad);
            if (candidate.cwiseAbs().maxCoeff() <= 0.5) offset = candidate;
          }
          const double response = std::abs(v + 0.5 * grad.dot(offset));
          if (response < cfg.contrast_threshold) continue;

          Keypoint kp;
          kp.x = (x + offset[0]) * step;
          kp.y = (y + offset[1]) * step;
          kp.scale = cfg.base_sigma * std::pow(2.0, o + (l + offset[2]) / s);
          kp.response = response;
          kp.detector = DetectorKind::dog;
          kp.octave = o;
          kp.layer = l;
          out.push_back(kp);
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), stronger);
  return out;
}

}  // namespace kpad
