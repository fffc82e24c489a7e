#include <algorithm>
#include <cmath>
#include <opencv2/imgcodecs.hpp>

#include "kpad/errors.hpp"
#include "kpad/image.hpp"

namespace kpad {

RgbImage load_rgb(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError("cannot read image " + path.string());
  RgbImage out(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      auto* px = &out.data[3 * (static_cast<std::size_t>(y) * out.width + x)];
      px[0] = row[x][2];
      px[1] = row[x][1];
      px[2] = row[x][0];
    }
  }
  return out;
}

void save_png(const GrayImage& image, const std::filesystem::path& path) {
  cv::Mat m(image.height, image.width, CV_8UC1);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      m.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(std::lround(std::clamp(image.at(x, y), 0.0, 1.0) * 255.0));
  if (!cv::imwrite(path.string(), m)) throw IoError("cannot write image " + path.string());
}

void save_png(const RgbImage& image, const std::filesystem::path& path) {
  cv::Mat m(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const auto* px = &image.data[3 * (static_cast<std::size_t>(y) * image.width + x)];
      m.at<cv::Vec3b>(y, x) = cv::Vec3b(px[2], px[1], px[0]);
    }
  }
  if (!cv::imwrite(path.string(), m)) throw IoError("cannot write image " + path.string());
}

}  // namespace kpad
