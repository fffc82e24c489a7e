#include "kpad/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "kpad/csv.hpp"
#include "kpad/errors.hpp"
#include "kpad/random.hpp"

namespace kpad {

using nlohmann::json;

namespace {

void check_scores(std::span<const double> scores, std::span<const Label> labels, const char* who) {
  if (scores.size() != labels.size()) throw InvalidArgument(std::string(who) + ": score and label counts differ");
  const auto nok = std::count(labels.begin(), labels.end(), Label::nok);
  if (nok == 0 || nok == static_cast<std::ptrdiff_t>(labels.size()))
    throw InvalidArgument(std::string(who) + " needs both OK and NOK samples");
  for (double s : scores)
    if (!std::isfinite(s)) throw InvalidArgument(std::string(who) + ": scores must be finite");
}

}  // namespace

RocResult roc_and_auc(std::span<const double> scores, std::span<const Label> labels) {
  check_scores(scores, labels, "roc_and_auc");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::nok));
  const auto neg = labels.size() - pos;

  RocResult out;
  out.curve.fpr.push_back(0.0);
  out.curve.tpr.push_back(0.0);
  out.curve.thresholds.push_back(std::numeric_limits<double>::infinity());

  // Twice the area in units of (1/neg) x (1/pos), accumulated exactly in integers.
  std::uint64_t area2 = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    const std::size_t tp_prev = tp;
    const std::size_t fp_prev = fp;
    for (; k < order.size() && scores[order[k]] == s; ++k) (labels[order[k]] == Label::nok ? tp : fp)++;
    area2 += static_cast<std::uint64_t>(fp - fp_prev) * (tp + tp_prev);
    out.curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
    out.curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
    out.curve.thresholds.push_back(s);
  }
  out.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return out;
}

ThresholdObjective threshold_objective_from_string(std::string_view name) {
  if (name == "max_accuracy" || name == "accuracy") return ThresholdObjective::max_accuracy;
  if (name == "youden") return ThresholdObjective::youden;
  throw InvalidArgument("unknown threshold objective '" + std::string(name) + "' (expected max_accuracy or youden)");
}

std::string_view to_string(ThresholdSource source) {
  switch (source) {
    case ThresholdSource::test: return "test";
    case ThresholdSource::validation: return "validation";
    case ThresholdSource::fixed: return "fixed";
  }
  return "test";
}

ThresholdSource threshold_source_from_string(std::string_view name) {
  if (name == "test") return ThresholdSource::test;
  if (name == "validation") return ThresholdSource::validation;
  if (name == "fixed") return ThresholdSource::fixed;
  throw InvalidArgument("unknown threshold source '" + std::string(name) + "' (expected test or validation)");
}

Confusion confusion_at(std::span<const double> scores, std::span<const Label> labels, double threshold) {
  if (scores.size() != labels.size()) throw InvalidArgument("confusion_at: score and label counts differ");
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool flagged = scores[i] > threshold;
    if (labels[i] == Label::nok) (flagged ? c.tp : c.fn)++;
    else (flagged ? c.fp : c.tn)++;
  }
  return c;
}

std::vector<double> candidate_thresholds(std::span<const double> scores) {
  std::vector<double> u(scores.begin(), scores.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  std::vector<double> out;
  if (u.empty()) return out;
  out.push_back(u.front() - 1.0);
  for (std::size_t k = 0; k + 1 < u.size(); ++k) {
    double mid = 0.5 * (u[k] + u[k + 1]);
    // Adjacent doubles: the midpoint can round onto the upper score.
    if (!(mid < u[k + 1])) mid = u[k];
    out.push_back(mid);
  }
  out.push_back(u.back() + 1.0);
  return out;
}

double select_threshold(std::span<const double> scores, std::span<const Label> labels, ThresholdObjective objective) {
  check_scores(scores, labels, "select_threshold");
  const auto candidates = candidate_thresholds(scores);

  // Sweep candidates in ascending order; samples cross from flagged to unflagged.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  Confusion c = confusion_at(scores, labels, candidates.front());
  const std::size_t pos = c.tp + c.fn;
  const std::size_t neg = c.fp + c.tn;
  std::size_t next = 0;
  double best_threshold = candidates.front();
  double best_value = -std::numeric_limits<double>::infinity();
  std::size_t best_fp = 0;
  for (double t : candidates) {
    for (; next < order.size() && !(scores[order[next]] > t); ++next) {
      if (labels[order[next]] == Label::nok) {
        --c.tp;
        ++c.fn;
      } else {
        --c.fp;
        ++c.tn;
      }
    }
    // Youden's J scaled by pos*neg stays an exact integer, so ties compare exactly.
    const double value = objective == ThresholdObjective::max_accuracy
                             ? static_cast<double>(c.tp + c.tn)
                             : static_cast<double>(c.tp) * static_cast<double>(neg) -
                                   static_cast<double>(c.fp) * static_cast<double>(pos);
    if (value > best_value || (value == best_value && c.fp < best_fp)) {
      best_value = value;
      best_fp = c.fp;
      best_threshold = t;
    }
  }
  return best_threshold;
}

EvalReport evaluate_scores(std::span<const double> scores, std::span<const Label> labels,
                           std::optional<double> threshold, ThresholdObjective objective) {
  check_scores(scores, labels, "evaluate");
  EvalReport report;
  const auto roc = roc_and_auc(scores, labels);
  report.roc = roc.curve;
  report.auc = roc.auc;
  if (threshold) {
    report.threshold = *threshold;
    report.threshold_source = ThresholdSource::fixed;
  } else {
    report.threshold = select_threshold(scores, labels, objective);
    report.threshold_source = ThresholdSource::test;
  }
  report.confusion = confusion_at(scores, labels, report.threshold);
  report.accuracy = report.confusion.accuracy();
  return report;
}

EvalReport evaluate(const TrainedModel& model, const LabeledDataset& dataset, std::optional<double> threshold,
                    ThresholdObjective objective) {
  validate(dataset);
  if (dataset.size() == 0) throw InvalidArgument("evaluate: empty dataset");
  const auto scores = score_all(model, dataset.matrix);
  auto report = evaluate_scores(scores, dataset.labels, threshold, objective);
  report.model = model_display_name(model.config);
  return report;
}

std::vector<int> stratified_folds(std::span<const Label> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
  std::vector<int> assignment(labels.size(), -1);
  Rng rng(seed + Rng::kFoldStream);
  std::size_t dealt = 0;
  for (Label cls : {Label::ok, Label::nok}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) rows.push_back(i);
    if (rows.size() < static_cast<std::size_t>(folds))
      throw InvalidArgument("stratification failure: class " + std::string(to_string(cls)) + " has " +
                            std::to_string(rows.size()) + " rows for " + std::to_string(folds) + " folds");
    rng.shuffle(std::span<std::size_t>(rows));
    for (std::size_t k = 0; k < rows.size(); ++k)
      assignment[rows[k]] = static_cast<int>((dealt + k) % static_cast<std::size_t>(folds));
    dealt += rows.size();
  }
  return assignment;
}

CrossValidation cross_validate(const ModelConfig& config, const LabeledDataset& dataset, int folds, std::uint64_t seed,
                               ThresholdSource source) {
  validate(dataset);
  CrossValidation cv;
  cv.assignment = stratified_folds(dataset.labels, folds, seed);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < dataset.size(); ++i) (cv.assignment[i] == f ? test_rows : train_rows).push_back(i);
    const auto train = dataset.subset(train_rows);
    const auto test = dataset.subset(test_rows);
    const auto model = train_model(config, train);

    std::optional<double> threshold;
    if (source == ThresholdSource::validation) {
      const auto train_scores = score_all(model, train.matrix);
      threshold = select_threshold(train_scores, train.labels);
    }
    auto report = evaluate(model, test, threshold);
    if (source == ThresholdSource::validation) report.threshold_source = ThresholdSource::validation;
    cv.folds.push_back(std::move(report));
  }
  const double k = static_cast<double>(folds);
  for (const auto& r : cv.folds) {
    cv.mean_accuracy += r.accuracy / k;
    cv.mean_auc += r.auc / k;
  }
  for (const auto& r : cv.folds) {
    cv.std_accuracy += (r.accuracy - cv.mean_accuracy) * (r.accuracy - cv.mean_accuracy) / k;
    cv.std_auc += (r.auc - cv.mean_auc) * (r.auc - cv.mean_auc) / k;
  }
  cv.std_accuracy = std::sqrt(cv.std_accuracy);
  cv.std_auc = std::sqrt(cv.std_auc);
  return cv;
}

GridSearchResult grid_search(const ModelConfig& base, const LabeledDataset& train, const LabeledDataset& validation) {
  if (!is_occ_family(base.kind)) throw InvalidArgument("grid search covers ocsvm, svdd and svm only");
  validate(train);
  const double d = static_cast<double>(train.matrix.cols());
  const double n_ok = static_cast<double>(train.count(Label::ok));
  const std::vector<double> nus =
      base.kind == ModelKind::svm ? std::vector<double>{base.nu} : std::vector<double>(kNuGrid.begin(), kNuGrid.end());

  GridSearchResult result;
  double best_auc = -1.0;
  for (double g : kGammaGrid) {
    for (double nu : nus) {
      ModelConfig config = base;
      config.gamma = g / d;
      if (base.kind == ModelKind::ocsvm) config.nu = nu;
      if (base.kind == ModelKind::svdd) config.c_pos = 1.0 / (nu * n_ok);
      const auto model = train_model(config, train);
      const auto scores = score_all(model, validation.matrix);
      const double auc = roc_and_auc(scores, validation.labels).auc;
      result.points.push_back({*config.gamma, nu, auc});
      if (auc > best_auc) {
        best_auc = auc;
        result.best = config;
      }
    }
  }
  return result;
}

std::string model_display_name(const ModelConfig& config) {
  switch (config.kind) {
    case ModelKind::ocsvm: return "One-class SVM";
    case ModelKind::svdd: return config.svdd_negatives ? "Semi-supervised SVDD" : "One-class SVDD";
    case ModelKind::svm: return "Semi-supervised SVM";
    case ModelKind::gnb: return "Naive Bayes (Gaussian)";
    case ModelKind::logreg: return "Logistic Regression";
    case ModelKind::tree: return "Coarse Tree";
  }
  return "?";
}

std::string detector_display_name(std::string_view detector) {
  if (detector == "dog") return "SIFT (DoG)";
  if (detector == "fast_hessian") return "SURF (fast-Hessian)";
  return std::string(detector);
}

json report_to_json(const EvalReport& r) {
  json thresholds = json::array();
  for (double t : r.roc.thresholds) thresholds.push_back(std::isfinite(t) ? json(t) : json(nullptr));
  return json{{"model", r.model},
              {"detector", r.detector},
              {"tp", r.confusion.tp},
              {"fp", r.confusion.fp},
              {"tn", r.confusion.tn},
              {"fn", r.confusion.fn},
              {"n", r.confusion.total()},
              {"accuracy", r.accuracy},
              {"auc", r.auc},
              {"threshold", r.threshold},
              {"threshold_source", to_string(r.threshold_source)},
              {"roc", {{"fpr", r.roc.fpr}, {"tpr", r.roc.tpr}, {"thresholds", thresholds}}}};
}

EvalReport report_from_json(const json& j) {
  try {
    EvalReport r;
    r.model = j.at("model").get<std::string>();
    r.detector = j.at("detector").get<std::string>();
    r.confusion.tp = j.at("tp").get<std::size_t>();
    r.confusion.fp = j.at("fp").get<std::size_t>();
    r.confusion.tn = j.at("tn").get<std::size_t>();
    r.confusion.fn = j.at("fn").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.auc = j.at("auc").get<double>();
    r.threshold = j.at("threshold").get<double>();
    r.threshold_source = threshold_source_from_string(j.at("threshold_source").get<std::string>());
    const auto& roc = j.at("roc");
    r.roc.fpr = roc.at("fpr").get<std::vector<double>>();
    r.roc.tpr = roc.at("tpr").get<std::vector<double>>();
    for (const auto& t : roc.at("thresholds"))
      r.roc.thresholds.push_back(t.is_null() ? std::numeric_limits<double>::infinity() : t.get<double>());
    return r;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed report: ") + e.what());
  }
}

std::string roc_to_csv(const RocCurve& roc) {
  std::ostringstream out;
  out << "threshold,fpr,tpr\n";
  for (std::size_t k = 0; k < roc.fpr.size(); ++k) {
    out << (std::isfinite(roc.thresholds[k]) ? csv::format_number(roc.thresholds[k]) : std::string("inf")) << ','
        << csv::format_number(roc.fpr[k]) << ',' << csv::format_number(roc.tpr[k]) << '\n';
  }
  return out.str();
}

std::string format_table(std::span<const EvalReport> reports) {
  const std::vector<std::string> head{"Feature extractor", "Model", "Test accuracy [%]", "AUC - Test"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    std::ostringstream acc;
    acc << std::fixed << std::setprecision(1) << 100.0 * r.accuracy;
    std::ostringstream auc;
    auc << std::fixed << std::setprecision(2) << r.auc;
    rows.push_back({r.detector, r.model, acc.str(), auc.str()});
  }
  std::vector<std::size_t> width(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    width[c] = head[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << "  ";
      const bool numeric = c >= 2;
      out << (numeric ? std::right : std::left) << std::setw(static_cast<int>(width[c])) << row[c];
    }
    out << '\n';
  };
  emit(head);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& row : rows) emit(row);
  return out.str();
}

}  // namespace kpad
