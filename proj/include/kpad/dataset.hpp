#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kpad/descriptor.hpp"
#include "kpad/image.hpp"

namespace kpad {

enum class SampleClass { ok, nok_incomplete, nok_strange, nok_color };

inline constexpr std::array<SampleClass, 3> kNokClasses{SampleClass::nok_incomplete, SampleClass::nok_strange,
                                                         SampleClass::nok_color};

std::string_view to_string(SampleClass cls);
SampleClass sample_class_from_string(std::string_view name);
inline Label label_of(SampleClass cls) { return cls == SampleClass::ok ? Label::ok : Label::nok; }

struct SampleRecord {
  std::string id;  // unique; augmented copies carry _r90/_r180/_r270
  std::filesystem::path path;
  SampleClass cls = SampleClass::ok;
  int rotation = 0;  // degrees, multiple of 90

  /// Id of the original capture this record derives from.
  std::string group() const;
};

// --- preprocessing --------------------------------------------------------------

struct CropConfig {
  int padding = 2;
};

/// Grayscale conversion, Otsu foreground mask, crop to the largest connected
/// foreground component plus padding. The foreground is the mask class that
/// covers less of the image border. Throws InvalidArgument on an empty foreground.
GrayImage crop_to_bbox(const RgbImage& image, const CropConfig& cfg = {});

/// Exact pixel rotation by 0/90/180/270 degrees, same direction as rotate90.
GrayImage rotate(const GrayImage& image, int degrees);

/// Original plus 90, 180 and 270 degree rotations.
std::array<GrayImage, 4> augment_rotations(const GrayImage& image);

/// Each record followed by its three rotated siblings.
std::vector<SampleRecord> augment_records(const std::vector<SampleRecord>& originals);

// --- ingestion --------------------------------------------------------------------

/// `<root>/<class_name>/*.png|*.bmp` with class_name in {ok, nok_incomplete, nok_strange, nok_color}.
/// Sorted by id; ids are `<class_name>/<file stem>`.
std::vector<SampleRecord> scan_directory(const std::filesystem::path& root);

/// Manifest CSV `path,class` (relative paths resolve against the manifest's directory).
/// Split manifests (`id,path,class,rotation,split`) are accepted as well.
std::vector<SampleRecord> read_records(const std::filesystem::path& manifest);

// --- splits -----------------------------------------------------------------------

enum class SampleUnit { augmented, original };

struct SplitSpec {
  std::size_t train_ok = 1000;
  std::size_t train_nok = 50;
  std::size_t test_ok = 200;
  std::size_t test_nok = 200;
  std::size_t validation_ok = 0;
  std::size_t validation_nok = 0;
  std::array<double, 3> nok_ratio{0.4, 0.3, 0.3};  // incomplete : strange : color, test split
  std::uint64_t seed = 42;
  bool group_disjoint = true;
  SampleUnit unit = SampleUnit::augmented;
};

void validate(const SplitSpec& spec);

/// Test NOK count per class (largest-remainder rounding of nok_ratio * test_nok).
std::array<std::size_t, 3> nok_class_counts(const SplitSpec& spec);

struct Splits {
  std::vector<SampleRecord> train;
  std::vector<SampleRecord> validation;
  std::vector<SampleRecord> test;
};

/// Seeded sampling without replacement. Test is drawn first, then validation,
/// then train; with group_disjoint no two splits share a capture group.
/// Throws InvalidArgument when a pool is too small.
Splits build_splits(const std::vector<SampleRecord>& records, const SplitSpec& spec);

/// CSV `id,path,class,rotation,split`, seed and spec echoed as leading `#` lines.
std::string splits_to_manifest(const Splits& splits, const SplitSpec& spec);

struct ManifestRow {
  SampleRecord record;
  std::string split;
};
std::vector<ManifestRow> read_split_manifest(const std::filesystem::path& path);

}  // namespace kpad
