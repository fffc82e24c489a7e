#include <algorithm>
#include <cmath>
#include <sstream>

#include "kpad/classifiers.hpp"
#include "kpad/errors.hpp"

namespace kpad {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_inputs(const Vector& params, const Matrix& x, std::span<const Label> labels) {
  if (labels.size() != static_cast<std::size_t>(x.rows())) throw InvalidArgument("logistic regression: label count mismatch");
  if (params.size() != x.cols() + 1) throw InvalidArgument("logistic regression: parameter length must be d + 1");
}

}  // namespace

double logreg_objective(const Vector& params, const Matrix& x, std::span<const Label> labels, double l2_lambda) {
  check_inputs(params, x, labels);
  const auto d = x.cols();
  const Vector z = (x * params.head(d)).array() + params[d];
  double nll = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    nll += softplus(z[i]) - (labels[static_cast<std::size_t>(i)] == Label::nok ? z[i] : 0.0);
  return nll / static_cast<double>(x.rows()) + 0.5 * l2_lambda * params.head(d).squaredNorm();
}

Vector logreg_gradient(const Vector& params, const Matrix& x, std::span<const Label> labels, double l2_lambda) {
  check_inputs(params, x, labels);
  const auto d = x.cols();
  const Vector z = (x * params.head(d)).array() + params[d];
  Vector residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    residual[i] = sigmoid(z[i]) - (labels[static_cast<std::size_t>(i)] == Label::nok ? 1.0 : 0.0);
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  Vector grad(d + 1);
  grad.head(d) = x.transpose() * residual * inv_n + l2_lambda * params.head(d);
  grad[d] = residual.sum() * inv_n;
  return grad;
}

LogRegModel train_logreg(const Matrix& x, std::span<const Label> labels, double l2_lambda,
                         const LogRegOptions& options, long* iterations) {
  if (labels.size() != static_cast<std::size_t>(x.rows())) throw InvalidArgument("train_logreg: label count mismatch");
  if (!x.allFinite()) throw InvalidArgument("train_logreg input contains NaN or Inf");
  if (!(l2_lambda >= 0.0)) throw InvalidArgument("train_logreg: l2_lambda must be >= 0");
  const auto nok = std::count(labels.begin(), labels.end(), Label::nok);
  if (nok == 0 || nok == static_cast<std::ptrdiff_t>(labels.size()))
    throw InvalidArgument("train_logreg needs both OK and NOK rows");

  // Full-batch gradient descent. The trial step is the Barzilai-Borwein length,
  // shrunk by backtracking until the Armijo condition holds.
  constexpr double kArmijo = 1e-4;
  Vector w = Vector::Zero(x.cols() + 1);
  double f = logreg_objective(w, x, labels, l2_lambda);
  Vector g = logreg_gradient(w, x, labels, l2_lambda);
  double step = 1.0;
  long iter = 0;
  while (g.norm() > options.tolerance) {
    if (iter >= options.max_iter) {
      std::ostringstream msg;
      msg << "logistic regression did not converge after " << iter << " iterations; gradient norm " << g.norm();
      throw ConvergenceError(msg.str(), g.norm());
    }
    ++iter;
    double t = step;
    Vector w_next;
    double f_next = 0.0;
    const double g2 = g.squaredNorm();
    for (int backtrack = 0;; ++backtrack) {
      w_next = w - t * g;
      f_next = logreg_objective(w_next, x, labels, l2_lambda);
      if (f_next <= f - kArmijo * t * g2) break;
      t *= 0.5;
      if (backtrack > 60) break;  // step underflow; accept and let the gradient test decide
    }
    Vector g_next = logreg_gradient(w_next, x, labels, l2_lambda);
    const Vector s = w_next - w;
    const Vector dg = g_next - g;
    const double sy = s.dot(dg);
    step = sy > 0.0 ? s.squaredNorm() / sy : std::min(2.0 * t, 1e6);
    w = std::move(w_next);
    f = f_next;
    g = std::move(g_next);
  }

  LogRegModel model;
  model.weights = w.head(x.cols());
  model.bias = w[x.cols()];
  model.l2_lambda = l2_lambda;
  if (iterations) *iterations = iter;
  return model;
}

}  // namespace kpad
