#include <algorithm>
#include <cmath>

#include "kpad/detector.hpp"
#include "kpad/errors.hpp"

namespace kpad {

namespace {

constexpr int kLayersPerOctave = 4;

// Determinant responses of one filter size on the octave's sampling grid.
struct ResponseLayer {
  int filter_size = 0;
  int cols = 0;
  int rows = 0;
  std::vector<double> det;  // 0 where the filter does not fit

  double at(int c, int r) const { return det[static_cast<std::size_t>(r) * cols + c]; }
};

}  // namespace

std::vector<int> hessian_filter_sizes(int octave) {
  std::vector<int> sizes(kLayersPerOctave);
  for (int i = 0; i < kLayersPerOctave; ++i) sizes[i] = 3 * ((1 << (octave + 1)) * (i + 1) + 1);
  return sizes;
}

double hessian_determinant(const IntegralImage& ii, int r, int c, int filter_size) {
  const int lobe = filter_size / 3;
  const int half = (filter_size - 1) / 2;
  const int mid = lobe / 2;
  const double inv_area = 1.0 / (static_cast<double>(filter_size) * filter_size);

  const double dxx = ii.box_sum(r - lobe + 1, c - half, 2 * lobe - 1, filter_size) -
                     3.0 * ii.box_sum(r - lobe + 1, c - mid, 2 * lobe - 1, lobe);
  const double dyy = ii.box_sum(r - half, c - lobe + 1, filter_size, 2 * lobe - 1) -
                     3.0 * ii.box_sum(r - mid, c - lobe + 1, lobe, 2 * lobe - 1);
  const double dxy = ii.box_sum(r - lobe, c + 1, lobe, lobe) + ii.box_sum(r + 1, c - lobe, lobe, lobe) -
                     ii.box_sum(r - lobe, c - lobe, lobe, lobe) - ii.box_sum(r + 1, c + 1, lobe, lobe);

  const double xx = dxx * inv_area;
  const double yy = dyy * inv_area;
  const double xy = 0.9 * dxy * inv_area;
  return xx * yy - xy * xy;
}

std::vector<Keypoint> detect_fast_hessian(const GrayImage& image, const DetectorConfig& cfg) {
  validate(image);
  validate(cfg);
  if (image.width < 24 || image.height < 24)
    throw InvalidArgument("detect_fast_hessian needs an image of at least 24x24 pixels");

  const IntegralImage ii(image);
  const int w = image.width;
  const int h = image.height;

  std::vector<Keypoint> out;
  for (int o = 0; o < cfg.octaves; ++o) {
    const int step = 1 << o;
    const int cols = (w - 1) / step + 1;
    const int rows = (h - 1) / step + 1;
    const auto sizes = hessian_filter_sizes(o);
    if (sizes[2] > std::min(w, h)) break;

    std::vector<ResponseLayer> layers;
    for (int size : sizes) {
      ResponseLayer layer{size, cols, rows, std::vector<double>(static_cast<std::size_t>(cols) * rows, 0.0)};
      const int half = (size - 1) / 2;
      for (int r = 0; r < rows; ++r) {
        const int py = r * step;
        if (py - half < 0 || py + half >= h) continue;
        for (int c = 0; c < cols; ++c) {
          const int px = c * step;
          if (px - half < 0 || px + half >= w) continue;
          layer.det[static_cast<std::size_t>(r) * cols + c] = hessian_determinant(ii, py, px, size);
        }
      }
      layers.push_back(std::move(layer));
    }

    for (int l = 1; l + 1 < kLayersPerOctave; ++l) {
      const auto& cur = layers[l];
      // Neighbours in the largest filter of the triple must also be valid.
      const int half = (layers[l + 1].filter_size - 1) / 2;
      for (int r = 1; r + 1 < rows; ++r) {
        const int py = r * step;
        if (py - half - step < 0 || py + half + step >= h) continue;
        if (py < cfg.border_margin || py >= h - cfg.border_margin) continue;
        for (int c = 1; c + 1 < cols; ++c) {
          const int px = c * step;
          if (px - half - step < 0 || px + half + step >= w) continue;
          if (px < cfg.border_margin || px >= w - cfg.border_margin) continue;

          const double v = cur.at(c, r);
          if (!(v > cfg.contrast_threshold)) continue;
          bool is_max = true;
          for (int dl = -1; dl <= 1 && is_max; ++dl) {
            for (int dr = -1; dr <= 1 && is_max; ++dr) {
              for (int dc = -1; dc <= 1; ++dc) {
                if (dl == 0 && dr == 0 && dc == 0) continue;
                if (!(v > layers[l + dl].at(c + dc, r + dr))) {
                  is_max = false;
                  break;
                }
              }
            }
          }
          if (!is_max) continue;

          Keypoint kp;
          kp.x = px;
          kp.y = py;
          kp.scale = 1.2 * cur.filter_size / 9.0;
          kp.response = std::abs(v);
          kp.detector = DetectorKind::fast_hessian;
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
