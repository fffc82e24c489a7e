#pragma once

#include <vector>

#include "kpad/descriptor.hpp"

namespace kpad {

/// Box- and equality-constrained convex QP shared by every kernel machine here:
///
///   minimize    1/2 a'Qa + p'a
///   subject to  y'a = rhs,  0 <= a_i <= upper_i,  y_i in {-1, +1}
///
/// Q carries the label products (Q_ij = y_i y_j K~_ij), as in libsvm.
struct QpProblem {
  Matrix q;
  Vector p;
  std::vector<int> y;
  std::vector<double> upper;
  double rhs = 0.0;

  std::size_t size() const { return y.size(); }
  double objective(const Vector& alpha) const { return 0.5 * alpha.dot(q * alpha) + p.dot(alpha); }
};

struct SmoOptions {
  double tolerance = 1e-6;  // maximal KKT violation at exit
  long max_iter = 100000;   // pair updates
};

struct SmoResult {
  Vector alpha;
  Vector gradient;  // Q alpha + p
  double rho = 0.0;  // multiplier of the equality constraint, libsvm sign convention
  double objective = 0.0;
  double kkt_violation = 0.0;
  long iterations = 0;
};

/// Largest m(a) - M(a) over the up/low index sets for a given gradient; zero at a KKT point.
double kkt_violation(const QpProblem& problem, const Vector& alpha, const Vector& gradient);

/// Feasible start: positive-label entries share rhs uniformly, all others zero.
/// Throws InvalidArgument if that exceeds a box bound.
Vector uniform_start(const QpProblem& problem);

/// Sequential minimal optimization with maximal-violating-pair selection
/// (lowest index wins ties). Deterministic. Throws ConvergenceError when
/// `max_iter` updates do not reach the tolerance.
SmoResult solve_smo(const QpProblem& problem, const Vector& start, const SmoOptions& options = {});

}  // namespace kpad
