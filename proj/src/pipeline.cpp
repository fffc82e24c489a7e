#include "kpad/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "kpad/csv.hpp"
#include "kpad/errors.hpp"

namespace kpad {

GrayImage load_sample(const SampleRecord& record, bool crop, const CropConfig& crop_config) {
  const RgbImage rgb = load_rgb(record.path);
  GrayImage gray = crop ? crop_to_bbox(rgb, crop_config) : to_gray(rgb);
  return rotate(gray, record.rotation);
}

ExtractResult extract_features(const std::vector<SampleRecord>& records, const ExtractOptions& options) {
  validate(options.detector_config);
  if (options.k < 1) throw InvalidArgument("k must be at least 1");
  if (options.jobs < 1) throw InvalidArgument("jobs must be at least 1");

  const std::size_t n = records.size();
  std::vector<FeatureVector> vectors(n);
  std::vector<SampleOutcome> outcomes(n);

  auto process = [&](std::size_t i) {
    try {
      const GrayImage image = load_sample(records[i], options.crop, options.crop_config);
      const auto keypoints = detect(options.detector, image, options.detector_config);
      vectors[i] = build_vector(keypoints, options.k);
      outcomes[i].keypoints = keypoints.size();
      if (vectors[i].present < options.k)
        outcomes[i].message = std::to_string(keypoints.size()) + " keypoints, zero-padded to " +
                              std::to_string(options.k);
    } catch (const std::exception& e) {
      outcomes[i].skipped = true;
      outcomes[i].message = e.what();
    }
  };

  const auto workers = static_cast<std::size_t>(std::min<long>(options.jobs, static_cast<long>(std::max<std::size_t>(n, 1))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) process(i);
      });
  }

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (!outcomes[i].skipped) kept.push_back(i);
  if (kept.empty()) throw InvalidArgument("feature extraction produced no rows");

  ExtractResult result;
  result.outcomes = std::move(outcomes);
  auto& ds = result.dataset;
  ds.matrix.resize(static_cast<Eigen::Index>(kept.size()), 2 * options.k);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const auto i = kept[r];
    for (int j = 0; j < 2 * options.k; ++j)
      ds.matrix(static_cast<Eigen::Index>(r), j) = vectors[i].values[static_cast<std::size_t>(j)];
    ds.labels.push_back(label_of(records[i].cls));
    ds.sample_ids.push_back(records[i].id);
  }
  return result;
}

std::string features_to_csv(const LabeledDataset& dataset, DetectorKind detector, int k) {
  return "# detector=" + std::string(to_string(detector)) + " k=" + std::to_string(k) + "\n" +
         dataset_to_csv(dataset);
}

FeatureFile read_features(const std::filesystem::path& path) {
  const std::string text = csv::read_text(path);
  FeatureFile out{dataset_from_csv(text), std::nullopt};
  for (const auto& comment : csv::parse(text).comments) {
    std::istringstream words(comment);
    std::string word;
    while (words >> word)
      if (word.starts_with("detector=")) out.detector = detector_from_string(word.substr(9));
  }
  return out;
}

LabeledDataset select_split(const LabeledDataset& features, const std::vector<ManifestRow>& manifest,
                            std::string_view split) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < features.sample_ids.size(); ++i) index.emplace(features.sample_ids[i], i);
  std::vector<std::size_t> rows;
  for (const auto& row : manifest) {
    if (row.split != split) continue;
    const auto it = index.find(row.record.id);
    if (it == index.end()) throw InvalidArgument("manifest id '" + row.record.id + "' has no feature row");
    if (features.labels[it->second] != label_of(row.record.cls))
      throw InvalidArgument("label mismatch for '" + row.record.id + "'");
    rows.push_back(it->second);
  }
  return features.subset(rows);
}

}  // namespace kpad
