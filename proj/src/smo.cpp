#include "kpad/smo.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "kpad/errors.hpp"

namespace kpad {

namespace {

constexpr double kTau = 1e-12;

bool in_up(const QpProblem& pr, const Vector& a, std::size_t t) {
  return pr.y[t] > 0 ? a[t] < pr.upper[t] : a[t] > 0.0;
}

bool in_low(const QpProblem& pr, const Vector& a, std::size_t t) {
  return pr.y[t] > 0 ? a[t] > 0.0 : a[t] < pr.upper[t];
}

struct Pair {
  std::ptrdiff_t i = -1;
  std::ptrdiff_t j = -1;
  double violation = 0.0;
};

Pair select_pair(const QpProblem& pr, const Vector& a, const Vector& g) {
  double up = -std::numeric_limits<double>::infinity();
  double low = std::numeric_limits<double>::infinity();
  Pair pair;
  for (std::size_t t = 0; t < pr.size(); ++t) {
    const double v = -pr.y[t] * g[t];
    if (in_up(pr, a, t) && v > up) {
      up = v;
      pair.i = static_cast<std::ptrdiff_t>(t);
    }
    if (in_low(pr, a, t) && v < low) {
      low = v;
      pair.j = static_cast<std::ptrdiff_t>(t);
    }
  }
  pair.violation = (pair.i < 0 || pair.j < 0) ? 0.0 : up - low;
  return pair;
}

double compute_rho(const QpProblem& pr, const Vector& a, const Vector& g) {
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int free_count = 0;
  for (std::size_t t = 0; t < pr.size(); ++t) {
    const double yg = pr.y[t] * g[t];
    if (a[t] >= pr.upper[t]) {
      if (pr.y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (a[t] <= 0.0) {
      if (pr.y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      sum_free += yg;
    }
  }
  if (free_count > 0) return sum_free / free_count;
  if (std::isinf(ub)) return lb;
  if (std::isinf(lb)) return ub;
  return 0.5 * (ub + lb);
}

}  // namespace

double kkt_violation(const QpProblem& problem, const Vector& alpha, const Vector& gradient) {
  return std::max(0.0, select_pair(problem, alpha, gradient).violation);
}

Vector uniform_start(const QpProblem& problem) {
  Vector a = Vector::Zero(static_cast<Eigen::Index>(problem.size()));
  if (problem.rhs == 0.0) return a;
  std::size_t positives = 0;
  for (int yi : problem.y) positives += yi > 0;
  if (positives == 0) throw InvalidArgument("QP start needs at least one positive-label entry");
  const double share = problem.rhs / static_cast<double>(positives);
  for (std::size_t t = 0; t < problem.size(); ++t) {
    if (problem.y[t] <= 0) continue;
    if (share > problem.upper[t] * (1.0 + 1e-12))
      throw InvalidArgument("QP infeasible: box bounds too small to satisfy the equality constraint");
    a[static_cast<Eigen::Index>(t)] = std::min(share, problem.upper[t]);
  }
  return a;
}

SmoResult solve_smo(const QpProblem& pr, const Vector& start, const SmoOptions& options) {
  const auto n = static_cast<Eigen::Index>(pr.size());
  if (pr.q.rows() != n || pr.q.cols() != n || pr.p.size() != n || static_cast<Eigen::Index>(pr.upper.size()) != n)
    throw InvalidArgument("QP problem has inconsistent dimensions");

  Vector a = start;
  Vector g = pr.q * a + pr.p;

  SmoResult result;
  long iter = 0;
  Pair pair = select_pair(pr, a, g);
  while (pair.violation > options.tolerance) {
    if (iter >= options.max_iter) {
      std::ostringstream msg;
      msg << "SMO did not converge after " << iter << " updates; KKT violation " << pair.violation;
      throw ConvergenceError(msg.str(), pair.violation);
    }
    ++iter;
    const auto i = pair.i;
    const auto j = pair.j;
    const double ci = pr.upper[i];
    const double cj = pr.upper[j];
    const double old_ai = a[i];
    const double old_aj = a[j];

    if (pr.y[i] != pr.y[j]) {
      double quad = pr.q(i, i) + pr.q(j, j) + 2.0 * pr.q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) {
          a[j] = 0.0;
          a[i] = diff;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = -diff;
      }
      if (diff > ci - cj) {
        if (a[i] > ci) {
          a[i] = ci;
          a[j] = ci - diff;
        }
      } else if (a[j] > cj) {
        a[j] = cj;
        a[i] = cj + diff;
      }
    } else {
      double quad = pr.q(i, i) + pr.q(j, j) - 2.0 * pr.q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > ci) {
        if (a[i] > ci) {
          a[i] = ci;
          a[j] = sum - ci;
        }
      } else if (a[j] < 0.0) {
        a[j] = 0.0;
        a[i] = sum;
      }
      if (sum > cj) {
        if (a[j] > cj) {
          a[j] = cj;
          a[i] = sum - cj;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = sum;
      }
    }

    const double dai = a[i] - old_ai;
    const double daj = a[j] - old_aj;
    // Q is symmetric; rows are contiguous in the row-major layout.
    g.noalias() += pr.q.row(i).transpose() * dai + pr.q.row(j).transpose() * daj;
    pair = select_pair(pr, a, g);
  }

  result.alpha = std::move(a);
  result.gradient = std::move(g);
  result.rho = compute_rho(pr, result.alpha, result.gradient);
  result.objective = pr.objective(result.alpha);
  result.kkt_violation = std::max(0.0, pair.violation);
  result.iterations = iter;
  return result;
}

}  // namespace kpad
