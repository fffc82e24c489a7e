#include "kpad/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kpad/errors.hpp"

namespace kpad {

GrayImage::GrayImage(int w, int h, double fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

double GrayImage::clamped(int x, int y) const {
  x = std::clamp(x, 0, width - 1);
  y = std::clamp(y, 0, height - 1);
  return at(x, y);
}

void validate(const GrayImage& image) {
  if (image.width <= 0 || image.height <= 0) throw InvalidArgument("image has no pixels");
  if (image.data.size() != static_cast<std::size_t>(image.width) * image.height)
    throw InvalidArgument("image data length does not match width x height");
  for (double v : image.data) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw InvalidArgument("image values must be finite and in [0,1]");
  }
}

IntegralImage::IntegralImage(const GrayImage& image)
    : width_(image.width),
      height_(image.height),
      table_(static_cast<std::size_t>(image.width + 1) * (image.height + 1), 0.0) {
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  for (int r = 0; r < height_; ++r) {
    double row_sum = 0.0;
    for (int c = 0; c < width_; ++c) {
      row_sum += image.at(c, r);
      table_[(r + 1) * stride + c + 1] = table_[r * stride + c + 1] + row_sum;
    }
  }
}

IntegralImage to_integral(const GrayImage& image) { return IntegralImage(image); }

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian sigma must be positive, got " + std::to_string(sigma));
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += k[i + radius];
  }
  for (double& w : k) w /= total;
  return k;
}

GrayImage gaussian_blur(const GrayImage& image, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = image.width;
  const int h = image.height;

  GrayImage tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * image.at(std::clamp(x + i, 0, w - 1), y);
      tmp.at(x, y) = acc;
    }
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.at(x, std::clamp(y + i, 0, h - 1));
      out.at(x, y) = acc;
    }
  }
  return out;
}

GrayImage rotate90(const GrayImage& image) {
  GrayImage out(image.height, image.width);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) out.at(image.height - 1 - y, x) = image.at(x, y);
  return out;
}

GrayImage downsample(const GrayImage& image) {
  const int w = (image.width + 1) / 2;
  const int h = (image.height + 1) / 2;
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = image.at(2 * x, 2 * y);
  return out;
}

GrayImage to_gray(const RgbImage& image) {
  GrayImage out(image.width, image.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const auto* px = &image.data[3 * i];
    out.data[i] = std::clamp((0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0, 0.0, 1.0);
  }
  return out;
}

}  // namespace kpad
