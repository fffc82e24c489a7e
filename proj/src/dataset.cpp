#include "kpad/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <opencv2/imgproc.hpp>
#include <set>
#include <sstream>

#include "kpad/csv.hpp"
#include "kpad/errors.hpp"
#include "kpad/random.hpp"

namespace kpad {

namespace fs = std::filesystem;

std::string_view to_string(SampleClass cls) {
  switch (cls) {
    case SampleClass::ok: return "ok";
    case SampleClass::nok_incomplete: return "nok_incomplete";
    case SampleClass::nok_strange: return "nok_strange";
    case SampleClass::nok_color: return "nok_color";
  }
  return "ok";
}

SampleClass sample_class_from_string(std::string_view name) {
  for (auto cls : {SampleClass::ok, SampleClass::nok_incomplete, SampleClass::nok_strange, SampleClass::nok_color})
    if (name == to_string(cls)) return cls;
  throw InvalidArgument("unknown sample class '" + std::string(name) +
                        "' (expected ok, nok_incomplete, nok_strange or nok_color)");
}

std::string SampleRecord::group() const {
  for (std::string_view suffix : {"_r90", "_r180", "_r270"}) {
    if (id.size() > suffix.size() && id.compare(id.size() - suffix.size(), suffix.size(), suffix) == 0)
      return id.substr(0, id.size() - suffix.size());
  }
  return id;
}

// --- preprocessing ------------------------------------------------------------

GrayImage crop_to_bbox(const RgbImage& image, const CropConfig& cfg) {
  if (image.width <= 0 || image.height <= 0) throw InvalidArgument("crop_to_bbox: empty image");
  const GrayImage gray = to_gray(image);

  cv::Mat gray8(image.height, image.width, CV_8UC1);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      gray8.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(std::lround(gray.at(x, y) * 255.0));

  cv::Mat mask;
  cv::threshold(gray8, mask, 0, 255, cv::THRESH_BINARY | cv::THRESH_OTSU);

  std::size_t border = 0;
  std::size_t border_bright = 0;
  for (int y = 0; y < mask.rows; ++y) {
    for (int x = 0; x < mask.cols; ++x) {
      if (y != 0 && y != mask.rows - 1 && x != 0 && x != mask.cols - 1) continue;
      ++border;
      border_bright += mask.at<std::uint8_t>(y, x) != 0;
    }
  }
  if (2 * border_bright > border) cv::bitwise_not(mask, mask);

  cv::Mat labels;
  cv::Mat stats;
  cv::Mat centroids;
  const int count = cv::connectedComponentsWithStats(mask, labels, stats, centroids, 8, CV_32S);
  int best = -1;
  for (int l = 1; l < count; ++l)
    if (best < 0 || stats.at<int>(l, cv::CC_STAT_AREA) > stats.at<int>(best, cv::CC_STAT_AREA)) best = l;
  if (best < 0) throw InvalidArgument("crop_to_bbox: no foreground found");

  const int x0 = std::max(0, stats.at<int>(best, cv::CC_STAT_LEFT) - cfg.padding);
  const int y0 = std::max(0, stats.at<int>(best, cv::CC_STAT_TOP) - cfg.padding);
  const int x1 = std::min(image.width,
                          stats.at<int>(best, cv::CC_STAT_LEFT) + stats.at<int>(best, cv::CC_STAT_WIDTH) + cfg.padding);
  const int y1 = std::min(image.height,
                          stats.at<int>(best, cv::CC_STAT_TOP) + stats.at<int>(best, cv::CC_STAT_HEIGHT) + cfg.padding);

  GrayImage out(x1 - x0, y1 - y0);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) out.at(x - x0, y - y0) = gray.at(x, y);
  return out;
}

GrayImage rotate(const GrayImage& image, int degrees) {
  if (degrees % 90 != 0) throw InvalidArgument("rotation must be a multiple of 90 degrees");
  const int turns = ((degrees / 90) % 4 + 4) % 4;
  GrayImage out = image;
  for (int t = 0; t < turns; ++t) out = rotate90(out);
  return out;
}

std::array<GrayImage, 4> augment_rotations(const GrayImage& image) {
  std::array<GrayImage, 4> out;
  out[0] = image;
  for (int t = 1; t < 4; ++t) out[t] = rotate90(out[t - 1]);
  return out;
}

std::vector<SampleRecord> augment_records(const std::vector<SampleRecord>& originals) {
  std::vector<SampleRecord> out;
  out.reserve(originals.size() * 4);
  for (const auto& rec : originals) {
    out.push_back(rec);
    for (int deg : {90, 180, 270}) {
      SampleRecord r = rec;
      r.rotation = (rec.rotation + deg) % 360;
      r.id = rec.id + "_r" + std::to_string(deg);
      out.push_back(std::move(r));
    }
  }
  return out;
}

// --- ingestion ------------------------------------------------------------------

std::vector<SampleRecord> scan_directory(const fs::path& root_in) {
  const fs::path root = fs::absolute(root_in).lexically_normal();
  if (!fs::is_directory(root)) throw IoError("image root " + root.string() + " is not a directory");
  std::vector<SampleRecord> out;
  for (auto cls : {SampleClass::ok, SampleClass::nok_incomplete, SampleClass::nok_strange, SampleClass::nok_color}) {
    const fs::path dir = root / std::string(to_string(cls));
    if (!fs::is_directory(dir)) continue;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      auto ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (ext != ".png" && ext != ".bmp") continue;
      out.push_back({std::string(to_string(cls)) + "/" + entry.path().stem().string(), entry.path(), cls, 0});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].id == out[i - 1].id) throw InvalidArgument("duplicate sample id " + out[i].id);
  return out;
}

std::vector<SampleRecord> read_records(const fs::path& manifest) {
  const auto table = csv::read(manifest);
  const auto base = manifest.parent_path();
  const auto path_col = table.column("path");
  const auto class_col = table.column("class");
  const bool has_id = std::find(table.header.begin(), table.header.end(), "id") != table.header.end();
  const bool has_rot = std::find(table.header.begin(), table.header.end(), "rotation") != table.header.end();

  std::vector<SampleRecord> out;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    SampleRecord rec;
    rec.path = row[path_col];
    if (rec.path.is_relative()) rec.path = base / rec.path;
    rec.cls = sample_class_from_string(row[class_col]);
    rec.id = has_id ? row[table.column("id")] : std::string(to_string(rec.cls)) + "/" + fs::path(row[path_col]).stem().string();
    rec.rotation = has_rot ? std::stoi(row[table.column("rotation")]) : 0;
    if (!seen.insert(rec.id).second) throw InvalidArgument("duplicate sample id " + rec.id + " in " + manifest.string());
    out.push_back(std::move(rec));
  }
  return out;
}

// --- splits ---------------------------------------------------------------------

void validate(const SplitSpec& spec) {
  double sum = 0.0;
  for (double r : spec.nok_ratio) {
    if (!(r >= 0.0)) throw InvalidArgument("nok_ratio entries must be >= 0");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("nok_ratio must sum to 1");
}

std::array<std::size_t, 3> nok_class_counts(const SplitSpec& spec) {
  validate(spec);
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double exact = spec.nok_ratio[c] * static_cast<double>(spec.test_nok);
    counts[c] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[c] = exact - static_cast<double>(counts[c]);
    assigned += counts[c];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < spec.test_nok; ++k, ++assigned) ++counts[order[k % 3]];
  return counts;
}

namespace {

class Drawer {
public:
  Drawer(const std::vector<SampleRecord>& records, const SplitSpec& spec) : spec_(spec), rng_(spec.seed + Rng::kSplitStream) {
    for (const auto& r : records)
      if (spec.unit == SampleUnit::augmented || r.rotation == 0) pool_.push_back(&r);
    std::sort(pool_.begin(), pool_.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  }

  // Draws `count` available records whose class satisfies `accept`.
  template <class Pred>
  std::vector<SampleRecord> draw(std::size_t count, Pred accept, const std::string& what) {
    std::vector<const SampleRecord*> candidates;
    for (const auto* r : pool_) {
      if (!accept(r->cls) || used_ids_.count(r->id)) continue;
      if (spec_.group_disjoint && blocked_groups_.count(r->group())) continue;
      candidates.push_back(r);
    }
    if (candidates.size() < count)
      throw InvalidArgument("insufficient samples for " + what + ": need " + std::to_string(count) + ", have " +
                            std::to_string(candidates.size()));
    rng_.shuffle(std::span<const SampleRecord*>(candidates));
    std::vector<SampleRecord> out;
    for (std::size_t i = 0; i < count; ++i) {
      used_ids_.insert(candidates[i]->id);
      out.push_back(*candidates[i]);
    }
    return out;
  }

  // Closes the current split: its groups become unavailable to later splits.
  void seal(const std::vector<SampleRecord>& split) {
    for (const auto& r : split) blocked_groups_.insert(r.group());
  }

private:
  const SplitSpec& spec_;
  Rng rng_;
  std::vector<const SampleRecord*> pool_;
  std::set<std::string> used_ids_;
  std::set<std::string> blocked_groups_;
};

void append(std::vector<SampleRecord>& dst, std::vector<SampleRecord> src) {
  dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
}

bool is_nok(SampleClass c) { return c != SampleClass::ok; }
bool is_ok(SampleClass c) { return c == SampleClass::ok; }

}  // namespace

Splits build_splits(const std::vector<SampleRecord>& records, const SplitSpec& spec) {
  validate(spec);
  const auto nok_counts = nok_class_counts(spec);
  Drawer drawer(records, spec);
  Splits out;

  append(out.test, drawer.draw(spec.test_ok, is_ok, "test OK"));
  for (std::size_t c = 0; c < kNokClasses.size(); ++c) {
    const auto cls = kNokClasses[c];
    append(out.test, drawer.draw(nok_counts[c], [cls](SampleClass s) { return s == cls; },
                                 "test " + std::string(to_string(cls))));
  }
  drawer.seal(out.test);

  append(out.validation, drawer.draw(spec.validation_ok, is_ok, "validation OK"));
  append(out.validation, drawer.draw(spec.validation_nok, is_nok, "validation NOK"));
  drawer.seal(out.validation);

  append(out.train, drawer.draw(spec.train_ok, is_ok, "train OK"));
  append(out.train, drawer.draw(spec.train_nok, is_nok, "train NOK"));

  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(out.train.begin(), out.train.end(), by_id);
  std::sort(out.validation.begin(), out.validation.end(), by_id);
  std::sort(out.test.begin(), out.test.end(), by_id);
  return out;
}

std::string splits_to_manifest(const Splits& splits, const SplitSpec& spec) {
  std::ostringstream out;
  out << "# seed=" << spec.seed << '\n';
  out << "# train_ok=" << spec.train_ok << " train_nok=" << spec.train_nok << " validation_ok=" << spec.validation_ok
      << " validation_nok=" << spec.validation_nok << " test_ok=" << spec.test_ok << " test_nok=" << spec.test_nok
      << '\n';
  out << "# nok_ratio=" << csv::format_number(spec.nok_ratio[0]) << ':' << csv::format_number(spec.nok_ratio[1]) << ':'
      << csv::format_number(spec.nok_ratio[2]) << " group_disjoint=" << (spec.group_disjoint ? "true" : "false")
      << " unit=" << (spec.unit == SampleUnit::augmented ? "augmented" : "original") << '\n';
  out << "id,path,class,rotation,split\n";
  auto emit = [&](const std::vector<SampleRecord>& rows, const char* split) {
    for (const auto& r : rows)
      out << r.id << ',' << r.path.generic_string() << ',' << to_string(r.cls) << ',' << r.rotation << ',' << split
          << '\n';
  };
  emit(splits.train, "train");
  emit(splits.validation, "validation");
  emit(splits.test, "test");
  return out.str();
}

std::vector<ManifestRow> read_split_manifest(const fs::path& path) {
  const auto table = csv::read(path);
  const auto id = table.column("id");
  const auto p = table.column("path");
  const auto cls = table.column("class");
  const auto rot = table.column("rotation");
  const auto split = table.column("split");
  std::vector<ManifestRow> out;
  for (const auto& row : table.rows) {
    ManifestRow m;
    m.record.id = row[id];
    m.record.path = row[p];
    if (m.record.path.is_relative()) m.record.path = path.parent_path() / m.record.path;
    m.record.cls = sample_class_from_string(row[cls]);
    m.record.rotation = std::stoi(row[rot]);
    m.split = row[split];
    if (m.split != "train" && m.split != "validation" && m.split != "test")
      throw InvalidArgument("unknown split '" + m.split + "' in " + path.string());
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace kpad
