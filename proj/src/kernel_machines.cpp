#include <algorithm>
#include <cmath>

#include "kpad/classifiers.hpp"
#include "kpad/errors.hpp"

namespace kpad {

namespace {

void check_training_matrix(const Matrix& x, const char* who) {
  if (x.rows() < 2) throw InvalidArgument(std::string(who) + " needs at least 2 rows");
  if (!x.allFinite()) throw InvalidArgument(std::string(who) + " input contains NaN or Inf");
}

void check_kernel(const KernelSpec& kernel) {
  if (!(kernel.gamma > 0.0) || !std::isfinite(kernel.gamma)) throw InvalidArgument("RBF gamma must be > 0");
}

Matrix gather_rows(const Matrix& x, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

}  // namespace

Matrix kernel_matrix(const KernelSpec& kernel, const Matrix& x) {
  const auto n = x.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-kernel.gamma * (x.row(i) - x.row(j)).squaredNorm());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

double default_gamma(const Matrix& x) {
  const double d = static_cast<double>(std::max<Eigen::Index>(x.cols(), 1));
  if (x.size() == 0) return 1.0 / d;
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  return var > 1e-12 ? 1.0 / (d * var) : 1.0 / d;
}

// --- one-class SVM ------------------------------------------------------------

QpProblem ocsvm_problem(const Matrix& x, double nu, const KernelSpec& kernel) {
  check_training_matrix(x, "train_ocsvm");
  check_kernel(kernel);
  if (!(nu > 0.0 && nu <= 1.0)) throw InvalidArgument("OC-SVM nu must be in (0, 1]");
  const auto n = static_cast<std::size_t>(x.rows());
  QpProblem pr;
  pr.q = kernel_matrix(kernel, x);
  pr.p = Vector::Zero(x.rows());
  pr.y.assign(n, 1);
  pr.upper.assign(n, 1.0 / (nu * static_cast<double>(n)));
  pr.rhs = 1.0;
  return pr;
}

OcSvmModel train_ocsvm(const Matrix& x, double nu, const KernelSpec& kernel, const SmoOptions& options,
                       SmoResult* diagnostics) {
  const auto pr = ocsvm_problem(x, nu, kernel);
  auto res = solve_smo(pr, uniform_start(pr), options);

  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < res.alpha.size(); ++i)
    if (res.alpha[i] > 0.0) sv.push_back(i);

  OcSvmModel model;
  model.support_vectors = gather_rows(x, sv);
  model.alphas.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t i = 0; i < sv.size(); ++i) model.alphas[static_cast<Eigen::Index>(i)] = res.alpha[sv[i]];
  model.rho = res.rho;
  model.kernel = kernel;
  model.nu = nu;
  if (diagnostics) *diagnostics = std::move(res);
  return model;
}

// --- SVDD -------------------------------------------------------------------

QpProblem svdd_problem(const Matrix& x, std::span<const Label> labels, double c_pos, double c_neg,
                       const KernelSpec& kernel) {
  check_training_matrix(x, "train_svdd");
  check_kernel(kernel);
  const auto n = static_cast<std::size_t>(x.rows());
  if (!labels.empty() && labels.size() != n) throw InvalidArgument("train_svdd: label count does not match rows");
  if (!(c_pos > 0.0) || !(c_neg > 0.0)) throw InvalidArgument("SVDD penalties must be > 0");

  QpProblem pr;
  pr.y.resize(n);
  pr.upper.resize(n);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool ok = labels.empty() || labels[i] == Label::ok;
    pr.y[i] = ok ? 1 : -1;
    pr.upper[i] = ok ? c_pos : c_neg;
    positives += ok;
  }
  if (positives == 0) throw InvalidArgument("train_svdd needs at least one OK row");
  if (c_pos * static_cast<double>(positives) < 1.0)
    throw InvalidArgument("SVDD infeasible: c_pos * (number of OK rows) must be >= 1");

  const Matrix k = kernel_matrix(kernel, x);
  pr.q.resize(k.rows(), k.cols());
  pr.p.resize(k.rows());
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) pr.q(i, j) = 2.0 * pr.y[i] * pr.y[j] * k(i, j);
    pr.p[i] = -pr.y[i] * k(i, i);
  }
  pr.rhs = 1.0;
  return pr;
}

SvddModel train_svdd(const Matrix& x, std::span<const Label> labels, std::optional<double> c_pos, double c_neg,
                     const KernelSpec& kernel, const SmoOptions& options, SmoResult* diagnostics) {
  const double cp = c_pos.value_or(1.0 / (static_cast<double>(x.rows()) * 0.05));
  const auto pr = svdd_problem(x, labels, cp, c_neg, kernel);
  auto res = solve_smo(pr, uniform_start(pr), options);

  const auto n = x.rows();
  Vector signed_alpha(n);
  for (Eigen::Index i = 0; i < n; ++i) signed_alpha[i] = pr.y[i] * res.alpha[i];
  const Matrix k = kernel_matrix(kernel, x);
  const Vector k_alpha = k * signed_alpha;
  const double center_norm_sq = signed_alpha.dot(k_alpha);

  // Radius from the unbounded OK support vectors, which lie on the sphere.
  double sum = 0.0;
  int free_pos = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (pr.y[i] > 0 && res.alpha[i] > 0.0 && res.alpha[i] < pr.upper[i]) {
      sum += k(i, i) - 2.0 * k_alpha[i] + center_norm_sq;
      ++free_pos;
    }
  }
  const double radius_sq = free_pos > 0 ? sum / free_pos : center_norm_sq - res.rho;

  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < n; ++i)
    if (res.alpha[i] > 0.0) sv.push_back(i);

  SvddModel model;
  model.support_vectors = gather_rows(x, sv);
  model.alphas.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t i = 0; i < sv.size(); ++i) {
    model.alphas[static_cast<Eigen::Index>(i)] = res.alpha[sv[i]];
    model.signs.push_back(pr.y[sv[i]]);
  }
  model.radius_sq = std::max(0.0, radius_sq);
  model.center_norm_sq = center_norm_sq;
  model.kernel = kernel;
  if (diagnostics) *diagnostics = std::move(res);
  return model;
}

// --- two-class SVM -------------------------------------------------------------

BinarySvmModel train_binary_svm(const Matrix& x, std::span<const Label> labels, double c, const KernelSpec& kernel,
                                const SmoOptions& options, SmoResult* diagnostics) {
  check_training_matrix(x, "train_binary_svm");
  check_kernel(kernel);
  const auto n = static_cast<std::size_t>(x.rows());
  if (labels.size() != n) throw InvalidArgument("train_binary_svm: label count does not match rows");
  if (!(c > 0.0)) throw InvalidArgument("SVM C must be > 0");
  const auto nok = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::nok));
  if (nok == 0 || nok == n) throw InvalidArgument("train_binary_svm needs both OK and NOK rows");

  const Matrix k = kernel_matrix(kernel, x);
  QpProblem pr;
  pr.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) pr.y[i] = labels[i] == Label::nok ? 1 : -1;
  pr.q.resize(k.rows(), k.cols());
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j) pr.q(i, j) = pr.y[i] * pr.y[j] * k(i, j);
  pr.p = Vector::Constant(k.rows(), -1.0);
  pr.upper.assign(n, c);
  pr.rhs = 0.0;

  auto res = solve_smo(pr, uniform_start(pr), options);

  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < res.alpha.size(); ++i)
    if (res.alpha[i] > 0.0) sv.push_back(i);

  BinarySvmModel model;
  model.support_vectors = gather_rows(x, sv);
  model.coefs.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t i = 0; i < sv.size(); ++i)
    model.coefs[static_cast<Eigen::Index>(i)] = pr.y[sv[i]] * res.alpha[sv[i]];
  model.bias = -res.rho;
  model.kernel = kernel;
  const Matrix k_sv = kernel_matrix(kernel, model.support_vectors);
  const double w2 = model.coefs.dot(k_sv * model.coefs);
  model.weight_norm = w2 > 0.0 ? std::sqrt(w2) : 1.0;
  if (diagnostics) *diagnostics = std::move(res);
  return model;
}

}  // namespace kpad
