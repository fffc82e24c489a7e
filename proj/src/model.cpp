#include <algorithm>

#include "kpad/classifiers.hpp"
#include "kpad/errors.hpp"
#include "kpad/model_io.hpp"

namespace kpad {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double kernel_sum(const KernelSpec& kernel, const Matrix& sv, const Vector& coefs, const Eigen::Ref<const Vector>& x) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < sv.rows(); ++i) sum += coefs[i] * std::exp(-kernel.gamma * (sv.row(i).transpose() - x).squaredNorm());
  return sum;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::ocsvm: return "ocsvm";
    case ModelKind::svdd: return "svdd";
    case ModelKind::svm: return "svm";
    case ModelKind::gnb: return "gnb";
    case ModelKind::logreg: return "logreg";
    case ModelKind::tree: return "tree";
  }
  return "ocsvm";
}

ModelKind model_kind_from_string(std::string_view name) {
  for (auto kind : {ModelKind::ocsvm, ModelKind::svdd, ModelKind::svm, ModelKind::gnb, ModelKind::logreg, ModelKind::tree})
    if (name == to_string(kind)) return kind;
  throw InvalidArgument("unknown model '" + std::string(name) + "' (expected ocsvm, svdd, svm, gnb, logreg or tree)");
}

bool is_occ_family(ModelKind kind) {
  return kind == ModelKind::ocsvm || kind == ModelKind::svdd || kind == ModelKind::svm;
}

bool trains_on_ok_only(const ModelConfig& config) {
  return config.kind == ModelKind::ocsvm || (config.kind == ModelKind::svdd && !config.svdd_negatives);
}

bool uses_normalizer(const ModelConfig& config) {
  switch (config.normalize) {
    case NormalizeMode::all: return true;
    case NormalizeMode::none: return false;
    case NormalizeMode::occ_only: return is_occ_family(config.kind);
  }
  return true;
}

TrainedModel train_model(const ModelConfig& config, const LabeledDataset& train) {
  validate(train);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (!trains_on_ok_only(config) || train.labels[i] == Label::ok) rows.push_back(i);
  if (rows.size() < 2) throw InvalidArgument("training set has fewer than 2 usable rows");
  const LabeledDataset data = rows.size() == train.size() ? train : train.subset(rows);

  TrainedModel model;
  model.kind = config.kind;
  model.config = config;
  model.feature_dim = static_cast<std::size_t>(data.matrix.cols());
  Matrix x = data.matrix;
  if (uses_normalizer(config)) {
    model.normalizer = fit_normalizer(x);
    x = apply_normalizer(*model.normalizer, x);
  }
  const KernelSpec kernel{config.gamma.value_or(default_gamma(x))};
  model.config.gamma = kernel.gamma;

  SmoResult diag;
  switch (config.kind) {
    case ModelKind::ocsvm:
      model.parameters = train_ocsvm(x, config.nu, kernel, config.smo, &diag);
      break;
    case ModelKind::svdd: {
      std::span<const Label> labels;
      if (config.svdd_negatives) labels = data.labels;
      model.parameters = train_svdd(x, labels, config.c_pos, config.c_neg, kernel, config.smo, &diag);
      break;
    }
    case ModelKind::svm:
      model.parameters = train_binary_svm(x, data.labels, config.svm_c, kernel, config.smo, &diag);
      break;
    case ModelKind::gnb:
      model.parameters = train_gnb(x, data.labels);
      break;
    case ModelKind::logreg: {
      long iters = 0;
      const auto fitted = train_logreg(x, data.labels, config.l2_lambda, config.logreg, &iters);
      Vector params(fitted.weights.size() + 1);
      params << fitted.weights, fitted.bias;
      model.parameters = fitted;
      diag.iterations = iters;
      diag.kkt_violation = logreg_gradient(params, x, data.labels, config.l2_lambda).norm();
      break;
    }
    case ModelKind::tree:
      model.parameters = train_tree(x, data.labels, config.max_splits);
      break;
  }
  model.iterations = diag.iterations;
  model.final_residual = diag.kkt_violation;
  model.config_hash = config_hash(config);
  return model;
}

double raw_score(const ModelParameters& parameters, const Eigen::Ref<const Vector>& x) {
  return std::visit(
      overloaded{
          [&](const OcSvmModel& m) { return m.rho - kernel_sum(m.kernel, m.support_vectors, m.alphas, x); },
          [&](const SvddModel& m) {
            Vector signed_alpha(m.alphas.size());
            for (Eigen::Index i = 0; i < m.alphas.size(); ++i) signed_alpha[i] = m.signs[static_cast<std::size_t>(i)] * m.alphas[i];
            const double cross = kernel_sum(m.kernel, m.support_vectors, signed_alpha, x);
            return 1.0 - 2.0 * cross + m.center_norm_sq - m.radius_sq;
          },
          [&](const BinarySvmModel& m) {
            return (kernel_sum(m.kernel, m.support_vectors, m.coefs, x) + m.bias) / m.weight_norm;
          },
          [&](const GnbModel& m) { return predict_gnb(m, x).posterior_nok; },
          [&](const LogRegModel& m) {
            const double z = m.weights.dot(x) + m.bias;
            return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
          },
          [&](const TreeModel& m) {
            int node = 0;
            while (!m.nodes[static_cast<std::size_t>(node)].is_leaf()) {
              const auto& n = m.nodes[static_cast<std::size_t>(node)];
              node = x[n.split_dim] <= n.split_value ? n.left : n.right;
            }
            return m.nodes[static_cast<std::size_t>(node)].leaf_score;
          },
      },
      parameters);
}

double score(const TrainedModel& model, const Eigen::Ref<const Vector>& x) {
  if (static_cast<std::size_t>(x.size()) != model.feature_dim)
    throw InvalidArgument("score: feature vector has length " + std::to_string(x.size()) + ", model expects " +
                          std::to_string(model.feature_dim));
  if (model.normalizer) return raw_score(model.parameters, apply_normalizer(*model.normalizer, Vector(x)));
  return raw_score(model.parameters, x);
}

std::vector<double> score_all(const TrainedModel& model, const Matrix& x) {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = score(model, x.row(i).transpose());
  return out;
}

}  // namespace kpad
