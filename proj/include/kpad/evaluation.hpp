#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kpad/classifiers.hpp"

namespace kpad {

/// ROC with NOK as the positive class. Point k corresponds to predicting NOK
/// for every score >= thresholds[k]; the first point (0,0) has threshold +inf.
struct RocCurve {
  std::vector<double> fpr;
  std::vector<double> tpr;
  std::vector<double> thresholds;
};

struct RocResult {
  RocCurve curve;
  double auc = 0.0;
};

/// Sweeps distinct scores in descending order; ties move FP and TP together.
/// AUC by trapezoidal integration. Throws InvalidArgument unless both classes occur.
RocResult roc_and_auc(std::span<const double> scores, std::span<const Label> labels);

enum class ThresholdObjective { max_accuracy, youden };
ThresholdObjective threshold_objective_from_string(std::string_view name);

enum class ThresholdSource { test, validation, fixed };
std::string_view to_string(ThresholdSource source);
ThresholdSource threshold_source_from_string(std::string_view name);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  double accuracy() const { return total() ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0; }
  double fpr() const { return fp + tn ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0; }
  double tpr() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }
};

/// A sample is called NOK when its score is strictly above the threshold.
Confusion confusion_at(std::span<const double> scores, std::span<const Label> labels, double threshold);

/// Candidate thresholds: one below the smallest score, midpoints between
/// consecutive distinct scores, one above the largest. Ties on the objective
/// go to the lower false-positive rate, then the smaller threshold.
double select_threshold(std::span<const double> scores, std::span<const Label> labels,
                        ThresholdObjective objective = ThresholdObjective::max_accuracy);

/// Every candidate threshold in ascending order (exposed for exhaustive checks).
std::vector<double> candidate_thresholds(std::span<const double> scores);

struct EvalReport {
  Confusion confusion;
  double accuracy = 0.0;
  double auc = 0.0;
  double threshold = 0.0;
  ThresholdSource threshold_source = ThresholdSource::test;
  RocCurve roc;
  std::string model;     // table label, e.g. "One-class SVM"
  std::string detector;  // table label, e.g. "SURF (fast-Hessian)"
};

/// Scores every row. Without a threshold one is selected on `dataset` itself
/// and the report is flagged as test-derived.
EvalReport evaluate(const TrainedModel& model, const LabeledDataset& dataset, std::optional<double> threshold = {},
                    ThresholdObjective objective = ThresholdObjective::max_accuracy);

/// Builds the report from precomputed scores.
EvalReport evaluate_scores(std::span<const double> scores, std::span<const Label> labels,
                           std::optional<double> threshold, ThresholdObjective objective);

/// Stratified fold index per row: each class is shuffled with the seed and dealt
/// round-robin. Throws InvalidArgument if a class has fewer rows than folds.
std::vector<int> stratified_folds(std::span<const Label> labels, int folds, std::uint64_t seed);

struct CrossValidation {
  std::vector<EvalReport> folds;
  std::vector<int> assignment;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population
  double mean_auc = 0.0;
  double std_auc = 0.0;
};

/// Per fold: trains on the other folds (normalizer refit there), then evaluates
/// the held-out fold. `source` picks where the threshold comes from: the
/// held-out fold itself (test) or the fold's training rows (validation).
CrossValidation cross_validate(const ModelConfig& config, const LabeledDataset& dataset, int folds, std::uint64_t seed,
                               ThresholdSource source = ThresholdSource::test);

struct GridPoint {
  double gamma = 0.0;
  double nu = 0.0;  // OC-SVM nu; SVDD uses C_pos = 1/(nu n_ok); unused by the two-class SVM
  double auc = 0.0;
};

struct GridSearchResult {
  ModelConfig best;
  std::vector<GridPoint> points;  // in sweep order
};

inline constexpr std::array<double, 4> kGammaGrid{0.01, 0.1, 1.0, 10.0};  // divided by the feature dimension
inline constexpr std::array<double, 3> kNuGrid{0.01, 0.05, 0.1};

/// Sweeps gamma and nu for the kernel families and keeps the configuration with
/// the highest validation AUC (first one in sweep order on ties).
GridSearchResult grid_search(const ModelConfig& base, const LabeledDataset& train, const LabeledDataset& validation);

// --- report artifacts ---------------------------------------------------------

std::string model_display_name(const ModelConfig& config);
std::string detector_display_name(std::string_view detector);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// `threshold,fpr,tpr` rows; the leading +inf threshold is written as `inf`.
std::string roc_to_csv(const RocCurve& roc);

/// Aligned plain-text table: Feature extractor | Model | Test accuracy [%] | AUC - Test.
std::string format_table(std::span<const EvalReport> reports);

}  // namespace kpad
