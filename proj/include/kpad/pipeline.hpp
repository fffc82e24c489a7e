#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kpad/dataset.hpp"
#include "kpad/descriptor.hpp"
#include "kpad/detector.hpp"
#include "kpad/evaluation.hpp"

namespace kpad {

struct ExtractOptions {
  DetectorKind detector = DetectorKind::dog;
  DetectorConfig detector_config = DetectorConfig::dog_defaults();
  int k = kDefaultTopK;
  bool crop = false;
  CropConfig crop_config;
  int jobs = 1;
};

struct SampleOutcome {
  std::size_t keypoints = 0;
  bool skipped = false;
  std::string message;  // empty unless skipped or padded
};

struct ExtractResult {
  LabeledDataset dataset;
  std::vector<SampleOutcome> outcomes;  // one per input record
};

/// Loads the record's image, optionally crops it, converts to gray and applies
/// the record's rotation.
GrayImage load_sample(const SampleRecord& record, bool crop, const CropConfig& crop_config = {});

/// One descriptor row per readable record, in input order. Unreadable or
/// degenerate samples are skipped and reported in `outcomes`. Output does not
/// depend on `jobs`. Throws InvalidArgument when no sample survives.
ExtractResult extract_features(const std::vector<SampleRecord>& records, const ExtractOptions& options);

/// Feature CSV with a `# detector=<name> k=<k>` comment line.
std::string features_to_csv(const LabeledDataset& dataset, DetectorKind detector, int k);

struct FeatureFile {
  LabeledDataset dataset;
  std::optional<DetectorKind> detector;
};
FeatureFile read_features(const std::filesystem::path& path);

/// Rows of `features` whose ids the manifest assigns to `split`, in manifest
/// order. Throws InvalidArgument when a manifest id has no feature row.
LabeledDataset select_split(const LabeledDataset& features, const std::vector<ManifestRow>& manifest,
                            std::string_view split);

}  // namespace kpad
