#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kpad/descriptor.hpp"
#include "kpad/smo.hpp"

namespace kpad {

// --- Kernel --------------------------------------------------------------

struct KernelSpec {
  double gamma = 1.0;  // RBF: exp(-gamma * |x - y|^2)

  double operator()(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) const {
    return std::exp(-gamma * (a - b).squaredNorm());
  }
};

Matrix kernel_matrix(const KernelSpec& kernel, const Matrix& x);

/// 1 / (d * var(X)) with the variance taken over all entries; 1/d for constant data.
double default_gamma(const Matrix& x);

// --- Models ----------------------------------------------------------------

enum class ModelKind { ocsvm, svdd, svm, gnb, logreg, tree };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

/// Kernel families from the one-class experiments (OC-SVM, SVDD, two-class SVM);
/// the ones `NormalizeMode::occ_only` normalizes.
bool is_occ_family(ModelKind kind);

struct OcSvmModel {
  Matrix support_vectors;
  Vector alphas;
  double rho = 0.0;
  KernelSpec kernel;
  double nu = 0.05;
};

struct SvddModel {
  Matrix support_vectors;
  Vector alphas;
  std::vector<int> signs;  // +1 OK, -1 NOK
  double radius_sq = 0.0;
  double center_norm_sq = 0.0;
  KernelSpec kernel;
};

/// Soft-margin two-class SVM, NOK as the positive class.
struct BinarySvmModel {
  Matrix support_vectors;
  Vector coefs;  // y_i * alpha_i
  double bias = 0.0;
  double weight_norm = 1.0;
  KernelSpec kernel;
};

struct GnbModel {
  std::vector<double> priors;              // indexed by Label
  std::vector<std::vector<double>> means;  // [label][dim]
  std::vector<std::vector<double>> variances;

  static constexpr double kVarianceFloor = 1e-9;
};

struct LogRegModel {
  Vector weights;
  double bias = 0.0;
  double l2_lambda = 0.0;
};

struct TreeNode {
  int split_dim = -1;  // -1 for leaves
  double split_value = 0.0;
  int left = -1;   // x[split_dim] <= split_value
  int right = -1;
  Label leaf_class = Label::ok;
  double leaf_score = 0.0;  // NOK fraction of training rows reaching the node
  int n_ok = 0;
  int n_nok = 0;

  bool is_leaf() const { return split_dim < 0; }
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

using ModelParameters = std::variant<OcSvmModel, SvddModel, BinarySvmModel, GnbModel, LogRegModel, TreeModel>;

struct LogRegOptions {
  double tolerance = 1e-6;  // gradient norm
  long max_iter = 20000;
};

/// Everything needed to train one model from a feature matrix.
struct ModelConfig {
  ModelKind kind = ModelKind::ocsvm;
  NormalizeMode normalize = NormalizeMode::all;
  double nu = 0.05;
  std::optional<double> gamma;   // default_gamma() when unset
  std::optional<double> c_pos;   // SVDD OK penalty, 1/(0.05 n) when unset
  double c_neg = 1.0;            // SVDD NOK penalty
  bool svdd_negatives = false;   // semi-supervised SVDD
  double svm_c = 1.0;
  double l2_lambda = 1e-3;
  int max_splits = 4;
  SmoOptions smo;
  LogRegOptions logreg;
};

/// OC-SVM always, SVDD unless run with negatives.
bool trains_on_ok_only(const ModelConfig& config);
bool uses_normalizer(const ModelConfig& config);

struct TrainedModel {
  ModelKind kind = ModelKind::ocsvm;
  ModelParameters parameters;
  std::optional<Normalizer> normalizer;
  std::size_t feature_dim = 0;
  ModelConfig config;
  std::string config_hash;

  // Diagnostics from the solver, not persisted.
  long iterations = 0;
  double final_residual = 0.0;
};

// --- Training --------------------------------------------------------------

OcSvmModel train_ocsvm(const Matrix& x, double nu, const KernelSpec& kernel, const SmoOptions& options = {},
                       SmoResult* diagnostics = nullptr);

/// Without labels every row is treated as OK. c_pos defaults to 1/(0.05 n).
SvddModel train_svdd(const Matrix& x, std::span<const Label> labels, std::optional<double> c_pos, double c_neg,
                     const KernelSpec& kernel, const SmoOptions& options = {}, SmoResult* diagnostics = nullptr);

BinarySvmModel train_binary_svm(const Matrix& x, std::span<const Label> labels, double c, const KernelSpec& kernel,
                                const SmoOptions& options = {}, SmoResult* diagnostics = nullptr);

/// The QPs solved by the trainers above, exposed for oracle checks.
QpProblem ocsvm_problem(const Matrix& x, double nu, const KernelSpec& kernel);
QpProblem svdd_problem(const Matrix& x, std::span<const Label> labels, double c_pos, double c_neg,
                       const KernelSpec& kernel);

GnbModel train_gnb(const Matrix& x, std::span<const Label> labels);

struct GnbPrediction {
  Label label = Label::ok;
  double posterior_nok = 0.0;
  std::vector<double> log_joint;  // log p(x, class), indexed by Label
};
GnbPrediction predict_gnb(const GnbModel& model, const Eigen::Ref<const Vector>& x);

LogRegModel train_logreg(const Matrix& x, std::span<const Label> labels, double l2_lambda,
                         const LogRegOptions& options = {}, long* iterations = nullptr);

/// Mean negative log-likelihood plus (lambda/2)|w|^2; NOK is the positive class.
/// `params` is [w_1..w_d, b].
double logreg_objective(const Vector& params, const Matrix& x, std::span<const Label> labels, double l2_lambda);
Vector logreg_gradient(const Vector& params, const Matrix& x, std::span<const Label> labels, double l2_lambda);

TreeModel train_tree(const Matrix& x, std::span<const Label> labels, int max_splits);

/// Weighted Gini decrease n*G(parent) - n_l*G(left) - n_r*G(right) of the best
/// single-dimension split over `rows`; empty when no split separates values.
struct SplitCandidate {
  int dim = -1;
  double threshold = 0.0;
  double gain = 0.0;
};
std::optional<SplitCandidate> best_split(const Matrix& x, std::span<const Label> labels,
                                         std::span<const std::size_t> rows);

// --- Unified interface ---------------------------------------------------------

/// Fits the normalizer per `config.normalize`, drops NOK rows for one-class
/// families and trains the configured model.
TrainedModel train_model(const ModelConfig& config, const LabeledDataset& train);

/// Anomaly score, higher = more anomalous. Applies the embedded normalizer first.
double score(const TrainedModel& model, const Eigen::Ref<const Vector>& x);
std::vector<double> score_all(const TrainedModel& model, const Matrix& x);

/// Score on an already-normalized row.
double raw_score(const ModelParameters& parameters, const Eigen::Ref<const Vector>& x);

}  // namespace kpad
