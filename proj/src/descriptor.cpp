#include "kpad/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kpad/csv.hpp"
#include "kpad/errors.hpp"

namespace kpad {

std::vector<Keypoint> top_k(std::span<const Keypoint> keypoints, int k) {
  if (k < 1) throw InvalidArgument("top_k needs k >= 1");
  std::vector<Keypoint> out(keypoints.begin(), keypoints.end());
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(), stronger);
  out.resize(keep);
  return out;
}

FeatureVector build_vector(std::span<const Keypoint> keypoints, int k) {
  const auto best = top_k(keypoints, k);
  FeatureVector fv;
  fv.k = k;
  fv.present = static_cast<int>(best.size());
  fv.values.assign(2 * static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < best.size(); ++i) {
    fv.values[2 * i] = best[i].scale;
    fv.values[2 * i + 1] = best[i].response;
  }
  return fv;
}

std::vector<std::string> feature_column_names(int k) {
  std::vector<std::string> names;
  for (int i = 1; i <= k; ++i) {
    names.push_back("s" + std::to_string(i));
    names.push_back("r" + std::to_string(i));
  }
  return names;
}

Normalizer Normalizer::identity(std::size_t dim) {
  return Normalizer{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0), std::vector<bool>(dim, false)};
}

Normalizer fit_normalizer(const Matrix& matrix) {
  const auto n = matrix.rows();
  if (n < 2) throw InvalidArgument("fit_normalizer needs at least 2 rows");
  if (!matrix.allFinite()) throw InvalidArgument("fit_normalizer input contains NaN or Inf");

  Normalizer norm;
  const auto d = static_cast<std::size_t>(matrix.cols());
  norm.means.resize(d);
  norm.stds.resize(d);
  norm.constant.resize(d);
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    const double mean = matrix.col(j).mean();
    const double var = (matrix.col(j).array() - mean).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    norm.means[j] = mean;
    norm.constant[j] = sd < Normalizer::kConstantStd;
    norm.stds[j] = norm.constant[j] ? 1.0 : sd;
  }
  return norm;
}

Matrix apply_normalizer(const Normalizer& norm, const Matrix& matrix) {
  if (static_cast<std::size_t>(matrix.cols()) != norm.dim())
    throw InvalidArgument("normalizer dimension " + std::to_string(norm.dim()) + " does not match matrix with " +
                          std::to_string(matrix.cols()) + " columns");
  Matrix out(matrix.rows(), matrix.cols());
  for (Eigen::Index j = 0; j < matrix.cols(); ++j)
    out.col(j) = (matrix.col(j).array() - norm.means[j]) / norm.stds[j];
  return out;
}

Vector apply_normalizer(const Normalizer& norm, const Vector& row) {
  if (static_cast<std::size_t>(row.size()) != norm.dim())
    throw InvalidArgument("normalizer dimension " + std::to_string(norm.dim()) + " does not match vector of length " +
                          std::to_string(row.size()));
  Vector out(row.size());
  for (Eigen::Index j = 0; j < row.size(); ++j) out[j] = (row[j] - norm.means[j]) / norm.stds[j];
  return out;
}

Matrix invert_normalizer(const Normalizer& norm, const Matrix& matrix) {
  if (static_cast<std::size_t>(matrix.cols()) != norm.dim()) throw InvalidArgument("normalizer dimension mismatch");
  Matrix out(matrix.rows(), matrix.cols());
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) out.col(j) = matrix.col(j).array() * norm.stds[j] + norm.means[j];
  return out;
}

std::string_view to_string(NormalizeMode mode) {
  switch (mode) {
    case NormalizeMode::occ_only: return "occ_only";
    case NormalizeMode::all: return "all";
    case NormalizeMode::none: return "none";
  }
  return "all";
}

NormalizeMode normalize_mode_from_string(std::string_view name) {
  if (name == "occ_only") return NormalizeMode::occ_only;
  if (name == "all") return NormalizeMode::all;
  if (name == "none") return NormalizeMode::none;
  throw InvalidArgument("unknown normalize mode '" + std::string(name) + "' (expected occ_only, all or none)");
}

std::string_view to_string(Label label) { return label == Label::ok ? "OK" : "NOK"; }

Label label_from_string(std::string_view name) {
  if (name == "OK" || name == "ok") return Label::ok;
  if (name == "NOK" || name == "nok") return Label::nok;
  throw InvalidArgument("unknown label '" + std::string(name) + "' (expected OK or NOK)");
}

std::size_t LabeledDataset::count(Label label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.matrix.resize(static_cast<Eigen::Index>(rows.size()), matrix.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.matrix.row(static_cast<Eigen::Index>(i)) = matrix.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(labels[rows[i]]);
    out.sample_ids.push_back(sample_ids.empty() ? std::to_string(rows[i]) : sample_ids[rows[i]]);
  }
  return out;
}

void validate(const LabeledDataset& dataset) {
  const auto n = static_cast<std::size_t>(dataset.matrix.rows());
  if (dataset.labels.size() != n || dataset.sample_ids.size() != n)
    throw InvalidArgument("dataset matrix, labels and ids disagree in row count");
  if (!dataset.matrix.allFinite()) throw InvalidArgument("dataset contains NaN or Inf");
}

std::string dataset_to_csv(const LabeledDataset& dataset) {
  validate(dataset);
  const int k = static_cast<int>(dataset.matrix.cols() / 2);
  std::vector<std::string> header{"id", "label"};
  for (auto& name : feature_column_names(k)) header.push_back(name);
  std::ostringstream out;
  out << csv::join(header) << '\n';
  for (Eigen::Index i = 0; i < dataset.matrix.rows(); ++i) {
    out << dataset.sample_ids[i] << ',' << to_string(dataset.labels[i]);
    for (Eigen::Index j = 0; j < dataset.matrix.cols(); ++j) out << ',' << csv::format_number(dataset.matrix(i, j));
    out << '\n';
  }
  return out.str();
}

LabeledDataset dataset_from_csv(std::string_view text) {
  const auto table = csv::parse(text);
  const auto id_col = table.column("id");
  const auto label_col = table.column("label");
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (j != id_col && j != label_col) feature_cols.push_back(j);

  LabeledDataset ds;
  ds.matrix.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(feature_cols.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    ds.sample_ids.push_back(row[id_col]);
    ds.labels.push_back(label_from_string(row[label_col]));
    for (std::size_t j = 0; j < feature_cols.size(); ++j)
      ds.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = csv::parse_number(row[feature_cols[j]]);
  }
  validate(ds);
  return ds;
}

}  // namespace kpad
