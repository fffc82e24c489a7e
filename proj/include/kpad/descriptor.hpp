#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "kpad/detector.hpp"

namespace kpad {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr int kDefaultTopK = 5;

/// The k strongest keypoints in `stronger` order.
std::vector<Keypoint> top_k(std::span<const Keypoint> keypoints, int k);

/// Fixed-length descriptor [scale_1, response_1, ..., scale_k, response_k] of the
/// k strongest keypoints. Missing keypoints are encoded as trailing (0, 0) pairs.
struct FeatureVector {
  std::vector<double> values;
  int k = kDefaultTopK;
  int present = 0;  // number of real keypoints encoded
};

FeatureVector build_vector(std::span<const Keypoint> keypoints, int k = kDefaultTopK);

/// Column names s1,r1,...,sk,rk.
std::vector<std::string> feature_column_names(int k);

/// Per-dimension z-score parameters (population standard deviation).
struct Normalizer {
  static constexpr double kConstantStd = 1e-12;

  std::vector<double> means;
  std::vector<double> stds;       // constant dimensions hold 1
  std::vector<bool> constant;

  std::size_t dim() const { return means.size(); }
  static Normalizer identity(std::size_t dim);
};

Normalizer fit_normalizer(const Matrix& matrix);
Matrix apply_normalizer(const Normalizer& norm, const Matrix& matrix);
Vector apply_normalizer(const Normalizer& norm, const Vector& row);
Matrix invert_normalizer(const Normalizer& norm, const Matrix& matrix);

enum class NormalizeMode { occ_only, all, none };
std::string_view to_string(NormalizeMode mode);
NormalizeMode normalize_mode_from_string(std::string_view name);

enum class Label { ok = 0, nok = 1 };
std::string_view to_string(Label label);
Label label_from_string(std::string_view name);

struct LabeledDataset {
  Matrix matrix;
  std::vector<Label> labels;
  std::vector<std::string> sample_ids;

  std::size_t size() const { return labels.size(); }
  std::size_t count(Label label) const;
  LabeledDataset subset(std::span<const std::size_t> rows) const;
};

/// Checks row-count agreement and finiteness. Throws InvalidArgument.
void validate(const LabeledDataset& dataset);

/// Feature CSV: header `id,label,s1,r1,...,sk,rk`.
std::string dataset_to_csv(const LabeledDataset& dataset);
LabeledDataset dataset_from_csv(std::string_view text);

}  // namespace kpad
