#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "kpad/dataset.hpp"
#include "kpad/errors.hpp"
#include "kpad/random.hpp"
#include "kpad/synthetic.hpp"

using namespace kpad;
namespace fs = std::filesystem;

namespace {

RgbImage to_rgb(const GrayImage& g) {
  RgbImage out(g.width, g.height);
  for (std::size_t i = 0; i < g.data.size(); ++i)
    for (int c = 0; c < 3; ++c) out.data[3 * i + static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(std::lround(g.data[i] * 255.0));
  return out;
}

// Hard-edged disc so the expected bounding box is exact.
GrayImage hard_disc(int w, int h, int cx, int cy, int r) {
  GrayImage img(w, h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) img.at(x, y) = 1.0;
  return img;
}

// Fake originals: `ok` OK plus `per_nok` of each NOK class, paths never read.
std::vector<SampleRecord> fake_originals(int ok, int per_nok) {
  std::vector<SampleRecord> out;
  auto add = [&](SampleClass cls, int n) {
    for (int i = 0; i < n; ++i) {
      char stem[16];
      std::snprintf(stem, sizeof stem, "img%04d", i);
      const std::string id = std::string(to_string(cls)) + "/" + stem;
      out.push_back({id, fs::path("/nonexistent") / (id + ".png"), cls, 0});
    }
  };
  add(SampleClass::ok, ok);
  for (auto cls : kNokClasses) add(cls, per_nok);
  return out;
}

std::set<std::string> groups_of(const std::vector<SampleRecord>& rows) {
  std::set<std::string> out;
  for (const auto& r : rows) out.insert(r.group());
  return out;
}

}  // namespace

TEST_CASE("crop of a centred disc is its bounding square plus padding") {
  const auto img = to_rgb(hard_disc(100, 100, 50, 50, 20));
  const auto crop = crop_to_bbox(img);
  CHECK(crop.width == 41 + 4);
  CHECK(crop.height == 41 + 4);
  CHECK(crop.at(0, 0) == 0.0);
  CHECK(crop.at(22, 22) == 1.0);
  CropConfig none;
  none.padding = 0;
  CHECK(crop_to_bbox(img, none).width == 41);
}

TEST_CASE("crop handles a bright background and a dark object") {
  GrayImage g = hard_disc(80, 60, 40, 30, 10);
  for (double& v : g.data) v = 1.0 - v;
  const auto crop = crop_to_bbox(to_rgb(g));
  CHECK(crop.width == 25);
  CHECK(crop.height == 25);
}

TEST_CASE("crop padding is clamped to the image bounds") {
  GrayImage g(30, 30, 0.0);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 12; ++x) g.at(x, y) = 1.0;
  const auto crop = crop_to_bbox(to_rgb(g));
  CHECK(crop.width == 14);
  CHECK(crop.height == 12);
}

TEST_CASE("crop keeps the largest component") {
  GrayImage g = hard_disc(100, 100, 60, 60, 15);
  for (int y = 5; y < 8; ++y)
    for (int x = 5; x < 8; ++x) g.at(x, y) = 1.0;
  const auto crop = crop_to_bbox(to_rgb(g));
  CHECK(crop.width == 35);
}

TEST_CASE("crop is translation invariant") {
  const auto a = crop_to_bbox(to_rgb(hard_disc(100, 100, 50, 50, 20)));
  const auto b = crop_to_bbox(to_rgb(hard_disc(100, 100, 60, 54, 20)));
  CHECK(a == b);
  Rng rng(3);
  const auto tex = synth::texture(rng, 120, 120);
  GrayImage s1(120, 120, 0.0), s2(120, 120, 0.0);
  for (int y = 0; y < 120; ++y)
    for (int x = 0; x < 120; ++x) {
      if ((x - 50) * (x - 50) + (y - 50) * (y - 50) <= 400) s1.at(x, y) = 0.6 + 0.3 * tex.at(x - 30, y - 30 + 10);
      if ((x - 60) * (x - 60) + (y - 54) * (y - 54) <= 400) s2.at(x, y) = 0.6 + 0.3 * tex.at(x - 40, y - 34 + 10);
    }
  CHECK(crop_to_bbox(to_rgb(s1)) == crop_to_bbox(to_rgb(s2)));
}

TEST_CASE("crop rejects images without foreground") {
  CHECK_THROWS_AS(crop_to_bbox(to_rgb(GrayImage(20, 20, 0.5))), InvalidArgument);
  CHECK_THROWS_AS(crop_to_bbox(RgbImage()), InvalidArgument);
}

TEST_CASE("rotations form a cyclic group of order four") {
  Rng rng(4);
  const auto img = synth::texture(rng, 13, 7);
  const auto rots = augment_rotations(img);
  CHECK(rots[0] == img);
  CHECK(rots[1].width == 7);
  CHECK(rots[1].height == 13);
  CHECK(rots[2].width == 13);
  CHECK(rotate90(rots[3]) == img);
  CHECK(rotate(img, 360) == img);
  CHECK(rotate(img, 180) == rots[2]);
  CHECK(rotate(img, -90) == rots[3]);
  CHECK_THROWS_AS(rotate(img, 45), InvalidArgument);
  // Exact permutation: the multiset of pixels is preserved.
  auto a = img.data, b = rots[1].data;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("augmentation quadruples the records") {
  const auto originals = fake_originals(1000, 75);
  REQUIRE(originals.size() == 1225);
  const auto aug = augment_records(originals);
  CHECK(aug.size() == 4900);
  CHECK(aug[1].id == originals[0].id + "_r90");
  CHECK(aug[3].rotation == 270);
  CHECK(aug[3].group() == originals[0].id);
  std::set<std::string> ids;
  for (const auto& r : aug) ids.insert(r.id);
  CHECK(ids.size() == 4900);
}

TEST_CASE("sample class names") {
  for (auto cls : {SampleClass::ok, SampleClass::nok_incomplete, SampleClass::nok_strange, SampleClass::nok_color})
    CHECK(sample_class_from_string(to_string(cls)) == cls);
  CHECK_THROWS_AS(sample_class_from_string("broken"), InvalidArgument);
  CHECK(label_of(SampleClass::nok_color) == Label::nok);
}

TEST_CASE("test NOK composition follows the ratio") {
  SplitSpec spec;
  CHECK(nok_class_counts(spec) == std::array<std::size_t, 3>{80, 60, 60});
  spec.test_nok = 7;
  const auto c = nok_class_counts(spec);
  CHECK(c[0] + c[1] + c[2] == 7);
  spec.nok_ratio = {0.5, 0.5, 0.1};
  CHECK_THROWS_AS(validate(spec), InvalidArgument);
}

TEST_CASE("1000/50/200/200 split on augmented records") {
  const auto records = augment_records(fake_originals(500, 100));
  SplitSpec spec;
  const auto s = build_splits(records, spec);
  CHECK(s.train.size() == 1050);
  CHECK(s.test.size() == 400);
  CHECK(s.validation.empty());
  std::map<SampleClass, std::size_t> test_counts;
  for (const auto& r : s.test) ++test_counts[r.cls];
  CHECK(test_counts[SampleClass::ok] == 200);
  CHECK(test_counts[SampleClass::nok_incomplete] == 80);
  CHECK(test_counts[SampleClass::nok_strange] == 60);
  CHECK(test_counts[SampleClass::nok_color] == 60);
  std::size_t train_nok = 0;
  for (const auto& r : s.train) train_nok += r.cls != SampleClass::ok;
  CHECK(train_nok == 50);

  const auto train_groups = groups_of(s.train);
  for (const auto& g : groups_of(s.test)) CHECK(train_groups.count(g) == 0);

  const auto again = build_splits(records, spec);
  CHECK(splits_to_manifest(again, spec) == splits_to_manifest(s, spec));
  spec.seed = 43;
  CHECK(splits_to_manifest(build_splits(records, spec), spec) != splits_to_manifest(s, spec));
}

TEST_CASE("validation split is group disjoint from both others") {
  const auto records = augment_records(fake_originals(200, 40));
  SplitSpec spec;
  spec.train_ok = 200;
  spec.train_nok = 10;
  spec.validation_ok = 40;
  spec.validation_nok = 20;
  spec.test_ok = 100;
  spec.test_nok = 60;
  const auto s = build_splits(records, spec);
  const auto tr = groups_of(s.train), va = groups_of(s.validation), te = groups_of(s.test);
  for (const auto& g : va) {
    CHECK(tr.count(g) == 0);
    CHECK(te.count(g) == 0);
  }
  std::set<std::string> ids;
  for (const auto* part : {&s.train, &s.validation, &s.test})
    for (const auto& r : *part) CHECK(ids.insert(r.id).second);
}

TEST_CASE("one-class split and original units") {
  const auto records = augment_records(fake_originals(100, 20));
  SplitSpec spec;
  spec.train_ok = 60;
  spec.train_nok = 0;
  spec.test_ok = 20;
  spec.test_nok = 30;
  spec.unit = SampleUnit::original;
  const auto s = build_splits(records, spec);
  for (const auto* part : {&s.train, &s.test})
    for (const auto& r : *part) CHECK(r.rotation == 0);
  for (const auto& r : s.train) CHECK(r.cls == SampleClass::ok);
}

TEST_CASE("insufficient samples are reported") {
  const auto records = augment_records(fake_originals(50, 10));
  SplitSpec spec;
  CHECK_THROWS_AS(build_splits(records, spec), InvalidArgument);
  // 50 OK groups: 20 test groups leave 30 x 4 = 120 train records, not 150.
  spec.test_ok = 20;
  spec.test_nok = 10;
  spec.train_ok = 150;
  spec.train_nok = 0;
  spec.nok_ratio = {0.4, 0.3, 0.3};
  CHECK_THROWS_AS(build_splits(records, spec), InvalidArgument);
  spec.group_disjoint = false;
  CHECK_NOTHROW(build_splits(records, spec));
}

TEST_CASE("directory scan, record manifests and split manifests") {
  const auto root = fs::temp_directory_path() / "kpad_test_dataset";
  fs::remove_all(root);
  const auto written = synth::write_dataset(root / "images", 4, 3, 11);
  const auto scanned = scan_directory(root / "images");
  REQUIRE(scanned.size() == 7);
  CHECK(std::is_sorted(scanned.begin(), scanned.end(), [](auto& a, auto& b) { return a.id < b.id; }));
  CHECK(std::count_if(scanned.begin(), scanned.end(), [](auto& r) { return r.cls == SampleClass::ok; }) == 4);
  for (const auto& r : scanned) CHECK(fs::exists(r.path));
  { std::ofstream(root / "images" / "ok" / "notes.txt") << "x"; }
  CHECK(scan_directory(root / "images").size() == 7);
  CHECK_THROWS_AS(scan_directory(root / "missing"), IoError);

  {
    std::ofstream m(root / "list.csv");
    m << "path,class\nimages/ok/img0000.png,ok\nimages/nok_strange/img0001.png,nok_strange\n";
  }
  const auto listed = read_records(root / "list.csv");
  REQUIRE(listed.size() == 2);
  CHECK(listed[0].id == "ok/img0000");
  CHECK(fs::exists(listed[0].path));
  CHECK(listed[1].cls == SampleClass::nok_strange);

  SplitSpec spec;
  spec.train_ok = 8;
  spec.train_nok = 2;
  spec.test_ok = 4;
  spec.test_nok = 4;
  spec.nok_ratio = {0.5, 0.25, 0.25};
  spec.group_disjoint = false;
  const auto records = augment_records(scan_directory(root / "images"));
  const auto splits = build_splits(records, spec);
  { std::ofstream(root / "splits.csv") << splits_to_manifest(splits, spec); }
  const auto rows = read_split_manifest(root / "splits.csv");
  CHECK(rows.size() == 18);
  for (const auto& row : rows) {
    const auto& part = row.split == "train" ? splits.train : splits.test;
    const auto it = std::find_if(part.begin(), part.end(), [&](auto& r) { return r.id == row.record.id; });
    REQUIRE(it != part.end());
    CHECK(it->rotation == row.record.rotation);
    CHECK(it->cls == row.record.cls);
  }
  CHECK(read_records(root / "splits.csv").size() == 18);
  { std::ofstream(root / "dup.csv") << "path,class\na.png,ok\na.png,ok\n"; }
  CHECK_THROWS_AS(read_records(root / "dup.csv"), InvalidArgument);
  fs::remove_all(root);
}
