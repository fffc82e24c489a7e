#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace kpad {

/// Row-major luminance raster with values in [0,1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0);

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  // Clamp-to-border access.
  double clamped(int x, int y) const;

  bool empty() const { return width == 0 || height == 0; }
  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Interleaved 8-bit RGB raster. Grayscale files are loaded with R=G=B.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // size = 3 * width * height

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}
};

/// Summed-area table with a zero row on top and a zero column on the left:
/// at(i, j) is the sum of all pixels with row < i and col < j.
class IntegralImage {
public:
  explicit IntegralImage(const GrayImage& image);

  int width() const { return width_; }
  int height() const { return height_; }
  double at(int row, int col) const { return table_[static_cast<std::size_t>(row) * (width_ + 1) + col]; }

  // Sum over rows [row, row+rows) and cols [col, col+cols). The rectangle must lie inside the image.
  double box_sum(int row, int col, int rows, int cols) const {
    const double a = at(row, col);
    const double b = at(row, col + cols);
    const double c = at(row + rows, col);
    const double d = at(row + rows, col + cols);
    return (d - b) - (c - a);
  }

private:
  int width_;
  int height_;
  std::vector<double> table_;
};

IntegralImage to_integral(const GrayImage& image);

/// Throws InvalidArgument when the raster is malformed or has values outside [0,1].
void validate(const GrayImage& image);

/// Separable Gaussian blur, kernel truncated at radius ceil(3 sigma), clamp-to-border edges.
GrayImage gaussian_blur(const GrayImage& image, double sigma);

/// Normalized 1-D Gaussian weights for offsets -radius..radius.
std::vector<double> gaussian_kernel(double sigma);

/// Rotate by 90 degrees: pixel (x, y) moves to (height-1-y, x). Output is height x width.
GrayImage rotate90(const GrayImage& image);

/// Keep every second pixel in both directions.
GrayImage downsample(const GrayImage& image);

/// Luminance 0.299 R + 0.587 G + 0.114 B, scaled to [0,1].
GrayImage to_gray(const RgbImage& image);

// PNG/BMP loading and saving. Throws IoError.
RgbImage load_rgb(const std::filesystem::path& path);
void save_png(const GrayImage& image, const std::filesystem::path& path);
void save_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace kpad
