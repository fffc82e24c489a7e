#include "kpad/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace kpad::synth {

namespace {

// Fraction of the pixel (x, y) covered by the disc.
double coverage(int x, int y, double cx, double cy, double radius) {
  int inside = 0;
  for (int sy = 0; sy < 4; ++sy) {
    for (int sx = 0; sx < 4; ++sx) {
      const double px = x + (sx + 0.5) / 4.0 - 0.5;
      const double py = y + (sy + 0.5) / 4.0 - 0.5;
      inside += (px - cx) * (px - cx) + (py - cy) * (py - cy) <= radius * radius;
    }
  }
  return inside / 16.0;
}

void paint(GrayImage& img, double cx, double cy, double radius, double value) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius - 1)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + radius + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius - 1)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + radius + 1)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double c = coverage(x, y, cx, cy, radius);
      img.at(x, y) = (1.0 - c) * img.at(x, y) + c * value;
    }
  }
}

}  // namespace

GrayImage disc(int width, int height, double cx, double cy, double radius, double inside, double outside) {
  GrayImage img(width, height, outside);
  paint(img, cx, cy, radius, inside);
  return img;
}

GrayImage texture(Rng& rng, int width, int height, double smoothing_sigma) {
  GrayImage noise(width, height);
  for (double& v : noise.data) v = rng.uniform();
  GrayImage smooth = gaussian_blur(noise, smoothing_sigma);
  const auto [lo, hi] = std::minmax_element(smooth.data.begin(), smooth.data.end());
  const double a = *lo;
  const double span = std::max(*hi - *lo, 1e-12);
  for (double& v : smooth.data) v = std::clamp((v - a) / span, 0.0, 1.0);
  return smooth;
}

GrayImage biscuit(Rng& rng, Defect defect, const BiscuitStyle& style) {
  const int n = style.size;
  const double center = 0.5 * (n - 1);
  const double cx = center + rng.uniform(-3.0, 3.0);
  const double cy = center + rng.uniform(-3.0, 3.0);
  const double radius = style.radius_fraction * n * rng.uniform(0.95, 1.05);

  GrayImage img = disc(n, n, cx, cy, radius, style.biscuit, style.background);

  // Mild surface texture on the biscuit only.
  GrayImage grain = texture(rng, n, n, 2.0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double c = coverage(x, y, cx, cy, radius - 1.0);
      img.at(x, y) += c * style.texture_amplitude * (grain.at(x, y) - 0.5) * 2.0;
    }
  }

  switch (defect) {
    case Defect::none:
      break;
    case Defect::spots: {
      const int count = 1 + static_cast<int>(rng.below(3));
      for (int s = 0; s < count; ++s) {
        const double r = rng.uniform(0.2, 0.6) * radius;
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        paint(img, cx + r * std::cos(phi), cy + r * std::sin(phi), rng.uniform(2.0, 4.0), 0.05);
      }
      break;
    }
    case Defect::bite: {
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      paint(img, cx + radius * std::cos(phi), cy + radius * std::sin(phi), rng.uniform(0.3, 0.5) * radius,
            style.background);
      // Crumbs left on the rim.
      paint(img, cx + 0.6 * radius * std::cos(phi), cy + 0.6 * radius * std::sin(phi), rng.uniform(2.0, 3.0), 0.1);
      break;
    }
    case Defect::color: {
      const double r = rng.uniform(0.1, 0.5) * radius;
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      paint(img, cx + r * std::cos(phi), cy + r * std::sin(phi), rng.uniform(3.0, 5.0), 0.1);
      break;
    }
  }
  for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
  return img;
}

std::vector<SampleRecord> write_dataset(const std::filesystem::path& root, std::size_t ok_count, std::size_t nok_count,
                                        std::uint64_t seed, const BiscuitStyle& style) {
  Rng rng(seed + Rng::kSynthStream);
  std::vector<SampleRecord> out;
  auto emit = [&](SampleClass cls, Defect defect, std::size_t index) {
    char name[32];
    std::snprintf(name, sizeof name, "img%04zu", index);
    const auto path = root / std::string(to_string(cls)) / (std::string(name) + ".png");
    std::filesystem::create_directories(path.parent_path());
    save_png(biscuit(rng, defect, style), path);
    out.push_back({std::string(to_string(cls)) + "/" + name, path, cls, 0});
  };
  for (std::size_t i = 0; i < ok_count; ++i) emit(SampleClass::ok, Defect::none, i);
  constexpr std::array<Defect, 3> defects{Defect::bite, Defect::spots, Defect::color};
  for (std::size_t i = 0; i < nok_count; ++i) emit(kNokClasses[i % 3], defects[i % 3], i);
  return out;
}

}  // namespace kpad::synth
