#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kpad/errors.hpp"
#include "kpad/random.hpp"
#include "kpad/synthetic.hpp"
#include "oracles.hpp"

using namespace kpad;

namespace {

constexpr int kSide = 97;  // (side - 1) divisible by 2^(octaves - 1) keeps decimation aligned under rotation

GrayImage disc_image(double cx, double cy, double radius) {
  return synth::disc(kSide, kSide, cx, cy, radius, 0.1, 0.9);
}

double dist(const Keypoint& k, double x, double y) { return std::hypot(k.x - x, k.y - y); }

// DoG pyramid rebuilt with direct 2-D convolution.
std::vector<std::vector<std::vector<double>>> oracle_dogs(const GrayImage& img, const DetectorConfig& cfg,
                                                          std::vector<std::pair<int, int>>& dims) {
  const int s = cfg.scales_per_octave;
  std::vector<double> base = oracle::blur_2d(img.data, img.width, img.height, std::sqrt(cfg.base_sigma * cfg.base_sigma - 0.25));
  int w = img.width;
  int h = img.height;
  std::vector<std::vector<std::vector<double>>> out;
  for (int o = 0; o < cfg.octaves && std::min(w, h) >= 2 * cfg.border_margin + 1; ++o) {
    std::vector<std::vector<double>> gauss{base};
    for (int l = 1; l < s + 3; ++l)
      gauss.push_back(oracle::blur_2d(base, w, h, cfg.base_sigma * std::sqrt(std::pow(2.0, 2.0 * l / s) - 1.0)));
    std::vector<std::vector<double>> dogs;
    for (int l = 0; l < s + 2; ++l) {
      std::vector<double> d(base.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = gauss[l + 1][i] - gauss[l][i];
      dogs.push_back(std::move(d));
    }
    out.push_back(std::move(dogs));
    dims.emplace_back(w, h);
    const int nw = (w + 1) / 2;
    const int nh = (h + 1) / 2;
    std::vector<double> next(static_cast<std::size_t>(nw) * nh);
    for (int y = 0; y < nh; ++y)
      for (int x = 0; x < nw; ++x) next[static_cast<std::size_t>(y) * nw + x] = gauss[s][static_cast<std::size_t>(2 * y) * w + 2 * x];
    base = std::move(next);
    w = nw;
    h = nh;
  }
  return out;
}

bool oracle_strict_extremum(const std::vector<std::vector<double>>& dogs, int w, int l, int x, int y) {
  const double v = dogs[l][static_cast<std::size_t>(y) * w + x];
  int above = 0;
  int below = 0;
  for (int dl = -1; dl <= 1; ++dl)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dl && !dy && !dx) continue;
        const double n = dogs[l + dl][static_cast<std::size_t>(y + dy) * w + x + dx];
        above += v > n;
        below += v < n;
      }
  return above == 26 || below == 26;
}

// Weighted pixel sum of the box-filter Hessian, built from explicit masks.
double naive_hessian(const GrayImage& img, int r, int c, int size) {
  const int lobe = size / 3;
  const int half = (size - 1) / 2;
  double xx = 0.0, yy = 0.0, xy = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const double v = img.at(c + dx, r + dy);
      if (std::abs(dy) <= lobe - 1) xx += (std::abs(dx) <= lobe / 2 ? -2.0 : 1.0) * v;
      if (std::abs(dx) <= lobe - 1) yy += (std::abs(dy) <= lobe / 2 ? -2.0 : 1.0) * v;
      if (dx != 0 && dy != 0 && std::abs(dx) <= lobe && std::abs(dy) <= lobe) xy += (dx * dy < 0 ? 1.0 : -1.0) * v;
    }
  }
  const double area = static_cast<double>(size) * size;
  xx /= area;
  yy /= area;
  xy = 0.9 * xy / area;
  return xx * yy - xy * xy;
}

}  // namespace

TEST_CASE("flat images give no keypoints") {
  for (double v : {0.0, 0.5, 1.0}) {
    const GrayImage img(kSide, kSide, v);
    CHECK(detect_dog(img).empty());
    CHECK(detect_fast_hessian(img).empty());
  }
}

TEST_CASE("too small images are rejected") {
  CHECK_THROWS_AS(detect_dog(GrayImage(15, 40, 0.5)), InvalidArgument);
  CHECK_NOTHROW(detect_dog(GrayImage(16, 16, 0.5)));
  CHECK_THROWS_AS(detect_fast_hessian(GrayImage(40, 23, 0.5)), InvalidArgument);
  CHECK_NOTHROW(detect_fast_hessian(GrayImage(24, 24, 0.5)));
}

TEST_CASE("invalid detector configs are rejected") {
  DetectorConfig cfg;
  cfg.scales_per_octave = 1;
  CHECK_THROWS_AS(detect_dog(GrayImage(32, 32, 0.5), cfg), InvalidArgument);
  cfg = {};
  cfg.octaves = 0;
  CHECK_THROWS_AS(detect_fast_hessian(GrayImage(32, 32, 0.5), cfg), InvalidArgument);
  cfg = {};
  cfg.contrast_threshold = -1.0;
  CHECK_THROWS_AS(detect_dog(GrayImage(32, 32, 0.5), cfg), InvalidArgument);
  CHECK_THROWS_AS(detector_from_string("orb"), InvalidArgument);
  CHECK(detector_from_string("surf") == DetectorKind::fast_hessian);
  CHECK(detector_from_string("sift") == DetectorKind::dog);
}

TEST_CASE("DoG finds one keypoint at a dark disc with scale near radius/sqrt2") {
  for (auto [cx, cy] : {std::pair{48.0, 48.0}, std::pair{40.3, 55.7}}) {
    const double radius = 6.0;
    const auto kps = detect_dog(disc_image(cx, cy, radius));
    REQUIRE(!kps.empty());
    int near = 0;
    for (const auto& k : kps) near += dist(k, cx, cy) <= 2.0;
    CHECK(near == 1);
    CHECK(dist(kps[0], cx, cy) <= 2.0);
    const double expected = radius / std::sqrt(2.0);
    CHECK(kps[0].scale <= 1.5 * expected);
    CHECK(kps[0].scale >= expected / 1.5);
  }
}

TEST_CASE("fast-Hessian finds one dominant keypoint at a dark disc") {
  for (double radius : {4.0, 6.0, 10.0}) {
    const auto kps = detect_fast_hessian(disc_image(48.0, 48.0, radius));
    REQUIRE(!kps.empty());
    CHECK(dist(kps[0], 48.0, 48.0) <= 2.0);
    for (const auto& k : kps)
      if (dist(k, 48.0, 48.0) > 2.0) CHECK(k.response * 5.0 < kps[0].response);
  }
}

TEST_CASE("every DoG keypoint is a strict extremum of an independently built pyramid") {
  Rng rng(17);
  const DetectorConfig cfg;
  for (int t = 0; t < 2; ++t) {
    const auto img = synth::texture(rng, 65, 65);
    const auto kps = detect_dog(img, cfg);
    REQUIRE(kps.size() > 3);
    std::vector<std::pair<int, int>> dims;
    const auto dogs = oracle_dogs(img, cfg, dims);
    for (const auto& k : kps) {
      CHECK(k.response >= cfg.contrast_threshold);
      REQUIRE(k.octave < static_cast<int>(dogs.size()));
      const double step = std::ldexp(1.0, k.octave);
      const auto [w, h] = dims[static_cast<std::size_t>(k.octave)];
      bool found = false;
      for (int gy = static_cast<int>(std::floor(k.y / step - 0.5)); gy <= static_cast<int>(std::ceil(k.y / step + 0.5)); ++gy)
        for (int gx = static_cast<int>(std::floor(k.x / step - 0.5)); gx <= static_cast<int>(std::ceil(k.x / step + 0.5)); ++gx) {
          if (std::abs(gx - k.x / step) > 0.5 + 1e-9 || std::abs(gy - k.y / step) > 0.5 + 1e-9) continue;
          if (gx < 1 || gy < 1 || gx >= w - 1 || gy >= h - 1) continue;
          const double v = dogs[static_cast<std::size_t>(k.octave)][static_cast<std::size_t>(k.layer)][static_cast<std::size_t>(gy) * w + gx];
          found = found || (std::abs(v) > 0.5 * cfg.contrast_threshold &&
                            oracle_strict_extremum(dogs[static_cast<std::size_t>(k.octave)], w, k.layer, gx, gy));
        }
      CHECK(found);
    }
  }
}

TEST_CASE("DoG keypoint scale follows base_sigma * 2^(octave + layer/s) up to the refinement offset") {
  Rng rng(3);
  const DetectorConfig cfg;
  for (const auto& k : detect_dog(synth::texture(rng, 97, 97), cfg)) {
    const double grid = cfg.base_sigma * std::pow(2.0, k.octave + static_cast<double>(k.layer) / cfg.scales_per_octave);
    const double half_step = std::pow(2.0, 0.5 / cfg.scales_per_octave);
    CHECK(k.scale <= grid * half_step * (1 + 1e-12));
    CHECK(k.scale >= grid / half_step * (1 - 1e-12));
  }
}

TEST_CASE("box-filter determinant matches explicit mask sums") {
  Rng rng(5);
  const auto img = synth::texture(rng, 60, 60);
  const IntegralImage ii(img);
  for (int size : {9, 15, 21, 27, 39, 51}) {
    const int half = (size - 1) / 2;
    for (int r = half; r < 60 - half; r += 5)
      for (int c = half; c < 60 - half; c += 7)
        CHECK(std::abs(hessian_determinant(ii, r, c, size) - naive_hessian(img, r, c, size)) <= 1e-12);
  }
}

TEST_CASE("fast-Hessian filter sizes") {
  CHECK(hessian_filter_sizes(0) == std::vector<int>{9, 15, 21, 27});
  CHECK(hessian_filter_sizes(1) == std::vector<int>{15, 27, 39, 51});
  CHECK(hessian_filter_sizes(2) == std::vector<int>{27, 51, 75, 99});
}

TEST_CASE("fast-Hessian scale is 1.2 * filter size / 9") {
  Rng rng(8);
  for (const auto& k : detect_fast_hessian(synth::texture(rng, 97, 97))) {
    const int size = hessian_filter_sizes(k.octave)[static_cast<std::size_t>(k.layer)];
    CHECK(k.scale == doctest::Approx(1.2 * size / 9.0).epsilon(1e-12));
    CHECK(k.response > 0.0);
  }
}

TEST_CASE("raising the contrast threshold only removes keypoints") {
  Rng rng(21);
  for (int t = 0; t < 3; ++t) {
    const auto img = synth::texture(rng, 97, 97);
    for (auto kind : {DetectorKind::dog, DetectorKind::fast_hessian}) {
      auto cfg = DetectorConfig::defaults_for(kind);
      const auto base = detect(kind, img, cfg);
      cfg.contrast_threshold *= 2.0;
      const auto strict = detect(kind, img, cfg);
      CHECK(strict.size() <= base.size());
      for (const auto& k : strict) {
        const bool present = std::any_of(base.begin(), base.end(), [&](const Keypoint& b) {
          return b.x == k.x && b.y == k.y && b.scale == k.scale && b.response == k.response;
        });
        CHECK(present);
      }
    }
  }
}

TEST_CASE("keypoints are sorted, in bounds and deterministic") {
  Rng rng(4);
  const auto img = synth::texture(rng, 81, 97);
  for (auto kind : {DetectorKind::dog, DetectorKind::fast_hessian}) {
    const auto cfg = DetectorConfig::defaults_for(kind);
    const auto a = detect(kind, img, cfg);
    const auto b = detect(kind, img, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].x == b[i].x);
      CHECK(a[i].response == b[i].response);
      CHECK(a[i].x >= 0.0);
      CHECK(a[i].x < img.width);
      CHECK(a[i].y >= 0.0);
      CHECK(a[i].y < img.height);
      CHECK(a[i].scale > 0.0);
      CHECK(a[i].response >= 0.0);
      CHECK(a[i].detector == kind);
      if (i > 0) CHECK(!stronger(a[i], a[i - 1]));
    }
  }
}

TEST_CASE("keypoint sets map under 90 degree rotation") {
  Rng rng(99);
  for (int t = 0; t < 4; ++t) {
    const auto img = synth::texture(rng, 97, 97);
    const auto rot = rotate90(img);
    for (auto kind : {DetectorKind::dog, DetectorKind::fast_hessian}) {
      const auto cfg = DetectorConfig::defaults_for(kind);
      const auto a = detect(kind, img, cfg);
      const auto b = detect(kind, rot, cfg);
      const std::size_t n = std::min<std::size_t>(10, std::min(a.size(), b.size()));
      REQUIRE(n >= 5);
      for (std::size_t i = 0; i < n; ++i) {
        const double mx = img.height - 1 - a[i].y;
        const double my = a[i].x;
        const auto nearest = std::min_element(b.begin(), b.end(), [&](const Keypoint& p, const Keypoint& q) {
          return std::hypot(p.x - mx, p.y - my) < std::hypot(q.x - mx, q.y - my);
        });
        CHECK(std::hypot(nearest->x - mx, nearest->y - my) <= 1e-6);
        CHECK(std::abs(nearest->response - a[i].response) <= 1e-3 * a[i].response);
      }
    }
  }
}

TEST_CASE("keypoint CSV dump") {
  Keypoint k{1.5, 2.0, 3.25, 0.125, DetectorKind::fast_hessian, 0, 1};
  const std::vector<Keypoint> kps{k};
  CHECK(keypoints_to_csv(kps) == "x,y,scale,response,detector\n1.5,2,3.25,0.125,fast_hessian\n");
}
