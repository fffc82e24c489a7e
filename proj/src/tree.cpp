#include <algorithm>
#include <numeric>

#include "kpad/classifiers.hpp"
#include "kpad/errors.hpp"

namespace kpad {

namespace {

constexpr double kMinGain = 1e-12;

// n * Gini = n * (1 - p_ok^2 - p_nok^2) = 2 * n_ok * n_nok / n
double weighted_gini(double n_ok, double n_nok) {
  const double n = n_ok + n_nok;
  return n > 0.0 ? 2.0 * n_ok * n_nok / n : 0.0;
}

struct Leaf {
  int node = 0;
  std::vector<std::size_t> rows;
  std::optional<SplitCandidate> split;
};

void fill_leaf_stats(TreeNode& node, std::span<const Label> labels, std::span<const std::size_t> rows) {
  node.n_ok = 0;
  node.n_nok = 0;
  for (auto r : rows) (labels[r] == Label::nok ? node.n_nok : node.n_ok)++;
  const int n = node.n_ok + node.n_nok;
  node.leaf_score = n > 0 ? static_cast<double>(node.n_nok) / n : 0.0;
  node.leaf_class = node.n_nok > node.n_ok ? Label::nok : Label::ok;
}

}  // namespace

std::optional<SplitCandidate> best_split(const Matrix& x, std::span<const Label> labels,
                                         std::span<const std::size_t> rows) {
  double total_ok = 0.0;
  double total_nok = 0.0;
  for (auto r : rows) (labels[r] == Label::nok ? total_nok : total_ok) += 1.0;
  const double parent = weighted_gini(total_ok, total_nok);

  std::optional<SplitCandidate> best;
  std::vector<std::size_t> order(rows.begin(), rows.end());
  for (Eigen::Index dim = 0; dim < x.cols(); ++dim) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = x(static_cast<Eigen::Index>(a), dim);
      const double vb = x(static_cast<Eigen::Index>(b), dim);
      return va < vb || (va == vb && a < b);
    });
    double left_ok = 0.0;
    double left_nok = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      (labels[order[k]] == Label::nok ? left_nok : left_ok) += 1.0;
      const double lo = x(static_cast<Eigen::Index>(order[k]), dim);
      const double hi = x(static_cast<Eigen::Index>(order[k + 1]), dim);
      if (!(lo < hi)) continue;
      const double gain =
          parent - weighted_gini(left_ok, left_nok) - weighted_gini(total_ok - left_ok, total_nok - left_nok);
      if (!best || gain > best->gain) best = SplitCandidate{static_cast<int>(dim), 0.5 * (lo + hi), gain};
    }
  }
  return best;
}

TreeModel train_tree(const Matrix& x, std::span<const Label> labels, int max_splits) {
  if (labels.size() != static_cast<std::size_t>(x.rows())) throw InvalidArgument("train_tree: label count mismatch");
  if (max_splits < 1) throw InvalidArgument("train_tree: max_splits must be >= 1");
  if (!x.allFinite()) throw InvalidArgument("train_tree input contains NaN or Inf");
  const auto nok = std::count(labels.begin(), labels.end(), Label::nok);
  if (nok == 0 || nok == static_cast<std::ptrdiff_t>(labels.size()))
    throw InvalidArgument("train_tree needs both OK and NOK rows");

  TreeModel tree;
  std::vector<Leaf> open;
  {
    Leaf root{0, std::vector<std::size_t>(labels.size()), std::nullopt};
    std::iota(root.rows.begin(), root.rows.end(), 0);
    tree.nodes.emplace_back();
    fill_leaf_stats(tree.nodes[0], labels, root.rows);
    root.split = best_split(x, labels, root.rows);
    open.push_back(std::move(root));
  }

  // Best-first: always split the open leaf with the largest Gini decrease;
  // the earliest-created leaf wins ties.
  for (int splits = 0; splits < max_splits; ++splits) {
    std::ptrdiff_t pick = -1;
    for (std::size_t i = 0; i < open.size(); ++i) {
      const auto& s = open[i].split;
      if (!s || s->gain <= kMinGain) continue;
      if (pick < 0 || s->gain > open[static_cast<std::size_t>(pick)].split->gain) pick = static_cast<std::ptrdiff_t>(i);
    }
    if (pick < 0) break;

    Leaf leaf = std::move(open[static_cast<std::size_t>(pick)]);
    open.erase(open.begin() + pick);
    const auto split = *leaf.split;

    Leaf left{static_cast<int>(tree.nodes.size()), {}, std::nullopt};
    Leaf right{static_cast<int>(tree.nodes.size() + 1), {}, std::nullopt};
    for (auto r : leaf.rows)
      (x(static_cast<Eigen::Index>(r), split.dim) <= split.threshold ? left.rows : right.rows).push_back(r);

    auto& parent = tree.nodes[static_cast<std::size_t>(leaf.node)];
    parent.split_dim = split.dim;
    parent.split_value = split.threshold;
    parent.left = left.node;
    parent.right = right.node;

    for (Leaf* child : {&left, &right}) {
      tree.nodes.emplace_back();
      fill_leaf_stats(tree.nodes.back(), labels, child->rows);
      child->split = best_split(x, labels, child->rows);
      open.push_back(std::move(*child));
    }
  }
  return tree;
}

}  // namespace kpad
