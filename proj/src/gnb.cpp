#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "kpad/classifiers.hpp"
#include "kpad/errors.hpp"

namespace kpad {

GnbModel train_gnb(const Matrix& x, std::span<const Label> labels) {
  if (labels.size() != static_cast<std::size_t>(x.rows())) throw InvalidArgument("train_gnb: label count mismatch");
  if (!x.allFinite()) throw InvalidArgument("train_gnb input contains NaN or Inf");
  const auto d = static_cast<std::size_t>(x.cols());

  GnbModel model;
  model.priors.assign(2, 0.0);
  model.means.assign(2, std::vector<double>(d, 0.0));
  model.variances.assign(2, std::vector<double>(d, 0.0));

  std::array<std::size_t, 2> counts{};
  for (auto l : labels) ++counts[static_cast<int>(l)];
  if (counts[0] < 2 || counts[1] < 2) throw InvalidArgument("train_gnb needs at least 2 rows of each class");

  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = static_cast<int>(labels[i]);
    for (std::size_t j = 0; j < d; ++j) model.means[c][j] += x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  for (int c = 0; c < 2; ++c)
    for (auto& m : model.means[c]) m /= static_cast<double>(counts[c]);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = static_cast<int>(labels[i]);
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - model.means[c][j];
      model.variances[c][j] += diff * diff;
    }
  }
  const double total = static_cast<double>(labels.size());
  for (int c = 0; c < 2; ++c) {
    for (auto& v : model.variances[c]) v = std::max(v / static_cast<double>(counts[c]), GnbModel::kVarianceFloor);
    model.priors[c] = static_cast<double>(counts[c]) / total;
  }
  return model;
}

GnbPrediction predict_gnb(const GnbModel& model, const Eigen::Ref<const Vector>& x) {
  if (static_cast<std::size_t>(x.size()) != model.means[0].size())
    throw InvalidArgument("predict_gnb: feature dimension mismatch");
  GnbPrediction out;
  out.log_joint.assign(2, 0.0);
  for (int c = 0; c < 2; ++c) {
    double lj = std::log(model.priors[c]);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double var = model.variances[c][j];
      const double diff = x[j] - model.means[c][j];
      lj += -0.5 * std::log(2.0 * std::numbers::pi * var) - diff * diff / (2.0 * var);
    }
    out.log_joint[c] = lj;
  }
  const double hi = std::max(out.log_joint[0], out.log_joint[1]);
  const double lse = hi + std::log(std::exp(out.log_joint[0] - hi) + std::exp(out.log_joint[1] - hi));
  out.posterior_nok = std::exp(out.log_joint[1] - lse);
  out.label = out.log_joint[1] > out.log_joint[0] ? Label::nok : Label::ok;
  return out;
}

}  // namespace kpad
