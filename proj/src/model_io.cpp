#include "kpad/model_io.hpp"

#include <cstdint>
#include <cstdio>

#include "kpad/csv.hpp"
#include "kpad/errors.hpp"

namespace kpad {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Vector r = m.row(i).transpose();
    rows.push_back(vector_json(r));
  }
  return rows;
}

Matrix matrix_from(const json& j, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto row = j[i].get<std::vector<double>>();
    if (row.size() != cols) throw InvalidArgument("model file: support vector has wrong dimension");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

json parameters_json(const ModelParameters& params) {
  return std::visit(
      overloaded{
          [](const OcSvmModel& m) {
            return json{{"support_vectors", matrix_json(m.support_vectors)}, {"alphas", vector_json(m.alphas)},
                        {"rho", m.rho}, {"gamma", m.kernel.gamma}, {"nu", m.nu}};
          },
          [](const SvddModel& m) {
            return json{{"support_vectors", matrix_json(m.support_vectors)}, {"alphas", vector_json(m.alphas)},
                        {"signs", m.signs}, {"radius_sq", m.radius_sq}, {"center_norm_sq", m.center_norm_sq},
                        {"gamma", m.kernel.gamma}};
          },
          [](const BinarySvmModel& m) {
            return json{{"support_vectors", matrix_json(m.support_vectors)}, {"coefs", vector_json(m.coefs)},
                        {"bias", m.bias}, {"weight_norm", m.weight_norm}, {"gamma", m.kernel.gamma}};
          },
          [](const GnbModel& m) { return json{{"priors", m.priors}, {"means", m.means}, {"variances", m.variances}}; },
          [](const LogRegModel& m) {
            return json{{"weights", vector_json(m.weights)}, {"bias", m.bias}, {"l2_lambda", m.l2_lambda}};
          },
          [](const TreeModel& m) {
            json nodes = json::array();
            for (const auto& n : m.nodes) {
              nodes.push_back({{"split_dim", n.split_dim}, {"split_value", n.split_value}, {"left", n.left},
                               {"right", n.right}, {"leaf_class", to_string(n.leaf_class)},
                               {"leaf_score", n.leaf_score}, {"n_ok", n.n_ok}, {"n_nok", n.n_nok}});
            }
            return json{{"nodes", nodes}};
          },
      },
      params);
}

ModelParameters parameters_from(ModelKind kind, const json& j, std::size_t dim) {
  switch (kind) {
    case ModelKind::ocsvm: {
      OcSvmModel m;
      m.support_vectors = matrix_from(j.at("support_vectors"), dim);
      m.alphas = vector_from(j.at("alphas"));
      m.rho = j.at("rho").get<double>();
      m.kernel.gamma = j.at("gamma").get<double>();
      m.nu = j.at("nu").get<double>();
      return m;
    }
    case ModelKind::svdd: {
      SvddModel m;
      m.support_vectors = matrix_from(j.at("support_vectors"), dim);
      m.alphas = vector_from(j.at("alphas"));
      m.signs = j.at("signs").get<std::vector<int>>();
      m.radius_sq = j.at("radius_sq").get<double>();
      m.center_norm_sq = j.at("center_norm_sq").get<double>();
      m.kernel.gamma = j.at("gamma").get<double>();
      return m;
    }
    case ModelKind::svm: {
      BinarySvmModel m;
      m.support_vectors = matrix_from(j.at("support_vectors"), dim);
      m.coefs = vector_from(j.at("coefs"));
      m.bias = j.at("bias").get<double>();
      m.weight_norm = j.at("weight_norm").get<double>();
      m.kernel.gamma = j.at("gamma").get<double>();
      return m;
    }
    case ModelKind::gnb: {
      GnbModel m;
      m.priors = j.at("priors").get<std::vector<double>>();
      m.means = j.at("means").get<std::vector<std::vector<double>>>();
      m.variances = j.at("variances").get<std::vector<std::vector<double>>>();
      return m;
    }
    case ModelKind::logreg: {
      LogRegModel m;
      m.weights = vector_from(j.at("weights"));
      m.bias = j.at("bias").get<double>();
      m.l2_lambda = j.at("l2_lambda").get<double>();
      return m;
    }
    case ModelKind::tree: {
      TreeModel m;
      for (const auto& n : j.at("nodes")) {
        TreeNode node;
        node.split_dim = n.at("split_dim").get<int>();
        node.split_value = n.at("split_value").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.leaf_class = label_from_string(n.at("leaf_class").get<std::string>());
        node.leaf_score = n.at("leaf_score").get<double>();
        node.n_ok = n.at("n_ok").get<int>();
        node.n_nok = n.at("n_nok").get<int>();
        m.nodes.push_back(node);
      }
      return m;
    }
  }
  throw InvalidArgument("unknown model kind");
}

}  // namespace

json normalizer_to_json(const Normalizer& norm) {
  return json{{"means", norm.means}, {"stds", norm.stds}, {"constant", norm.constant}};
}

Normalizer normalizer_from_json(const json& j) {
  Normalizer norm;
  norm.means = j.at("means").get<std::vector<double>>();
  norm.stds = j.at("stds").get<std::vector<double>>();
  norm.constant = j.at("constant").get<std::vector<bool>>();
  if (norm.stds.size() != norm.means.size() || norm.constant.size() != norm.means.size())
    throw InvalidArgument("normalizer arrays disagree in length");
  return norm;
}

json config_to_json(const ModelConfig& c) {
  json j{{"normalize", to_string(c.normalize)},
         {"nu", c.nu},
         {"gamma", c.gamma ? json(*c.gamma) : json(nullptr)},
         {"c_pos", c.c_pos ? json(*c.c_pos) : json(nullptr)},
         {"c_neg", c.c_neg},
         {"svdd_negatives", c.svdd_negatives},
         {"svm_c", c.svm_c},
         {"l2_lambda", c.l2_lambda},
         {"max_splits", c.max_splits},
         {"smo_tolerance", c.smo.tolerance},
         {"smo_max_iter", c.smo.max_iter},
         {"logreg_tolerance", c.logreg.tolerance},
         {"logreg_max_iter", c.logreg.max_iter}};
  return j;
}

ModelConfig config_from_json(const json& j, ModelKind kind) {
  ModelConfig c;
  c.kind = kind;
  c.normalize = normalize_mode_from_string(j.at("normalize").get<std::string>());
  c.nu = j.at("nu").get<double>();
  if (!j.at("gamma").is_null()) c.gamma = j.at("gamma").get<double>();
  if (!j.at("c_pos").is_null()) c.c_pos = j.at("c_pos").get<double>();
  c.c_neg = j.at("c_neg").get<double>();
  c.svdd_negatives = j.at("svdd_negatives").get<bool>();
  c.svm_c = j.at("svm_c").get<double>();
  c.l2_lambda = j.at("l2_lambda").get<double>();
  c.max_splits = j.at("max_splits").get<int>();
  c.smo.tolerance = j.at("smo_tolerance").get<double>();
  c.smo.max_iter = j.at("smo_max_iter").get<long>();
  c.logreg.tolerance = j.at("logreg_tolerance").get<double>();
  c.logreg.max_iter = j.at("logreg_max_iter").get<long>();
  return c;
}

std::string config_hash(const ModelConfig& config) {
  json canonical = config_to_json(config);
  canonical["model_kind"] = to_string(config.kind);
  const std::string text = canonical.dump();  // object keys are sorted
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json model_to_json(const TrainedModel& model) {
  return json{{"model_kind", to_string(model.kind)},
              {"hyperparameters", config_to_json(model.config)},
              {"parameters", parameters_json(model.parameters)},
              {"normalizer", model.normalizer ? normalizer_to_json(*model.normalizer) : json(nullptr)},
              {"feature_dim", model.feature_dim},
              {"created_with_config_hash", model.config_hash}};
}

TrainedModel model_from_json(const json& j) {
  try {
    TrainedModel model;
    model.kind = model_kind_from_string(j.at("model_kind").get<std::string>());
    model.config = config_from_json(j.at("hyperparameters"), model.kind);
    model.feature_dim = j.at("feature_dim").get<std::size_t>();
    model.parameters = parameters_from(model.kind, j.at("parameters"), model.feature_dim);
    if (!j.at("normalizer").is_null()) model.normalizer = normalizer_from_json(j.at("normalizer"));
    model.config_hash = j.at("created_with_config_hash").get<std::string>();
    return model;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  csv::write_text(path, model_to_json(model).dump(2) + "\n");
}

TrainedModel load_model(const std::filesystem::path& path) {
  const auto text = csv::read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace kpad
