#include "kpad/cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <nlohmann/json.hpp>

#include "kpad/csv.hpp"
#include "kpad/errors.hpp"
#include "kpad/model_io.hpp"
#include "kpad/pipeline.hpp"

namespace kpad {

namespace {

namespace fs = std::filesystem;

std::shared_ptr<spdlog::logger> make_logger() {
  auto logger = spdlog::get("kpad");
  if (!logger) logger = spdlog::stderr_color_st("kpad");
  logger->set_pattern("[%l] %v");
  logger->set_level(spdlog::level::warn);
  if (const char* env = std::getenv("KEYPOINT_AD_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level != spdlog::level::off || std::string_view(env) == "off") logger->set_level(level);
  }
  return logger;
}

struct DetectorArgs {
  std::string detector = "dog";
  int k = kDefaultTopK;
  std::optional<int> octaves;
  std::optional<int> scales;
  std::optional<double> sigma;
  std::optional<double> contrast_threshold;
  std::optional<double> edge_ratio;
  std::optional<int> border;

  ExtractOptions options() const {
    ExtractOptions out;
    out.detector = detector_from_string(detector);
    out.detector_config = DetectorConfig::defaults_for(out.detector);
    auto& cfg = out.detector_config;
    if (octaves) cfg.octaves = *octaves;
    if (scales) cfg.scales_per_octave = *scales;
    if (sigma) cfg.base_sigma = *sigma;
    if (contrast_threshold) cfg.contrast_threshold = *contrast_threshold;
    if (edge_ratio) cfg.edge_ratio_threshold = *edge_ratio;
    if (border) cfg.border_margin = *border;
    out.k = k;
    return out;
  }
};

struct ExtractArgs {
  DetectorArgs detector;
  std::string images;
  std::string manifest;
  bool augment = false;
  bool crop = false;
  int padding = 2;
  std::string out;
};

struct SplitArgs {
  std::string images;
  std::string records;
  SplitSpec spec;
  std::string nok_ratio = "0.4:0.3:0.3";
  std::string unit = "augmented";
  bool no_group_disjoint = false;
  std::string out;
};

struct ModelArgs {
  std::string model = "ocsvm";
  std::string normalize = "all";
  double nu = 0.05;
  std::optional<double> gamma;
  std::optional<double> c_pos;
  double c_neg = 1.0;
  bool svdd_negatives = false;
  double svm_c = 1.0;
  double l2 = 1e-3;
  int max_splits = 4;
  double tolerance = 1e-6;
  long max_iter = 100000;

  ModelConfig config() const {
    ModelConfig c;
    c.kind = model_kind_from_string(model);
    c.normalize = normalize_mode_from_string(normalize);
    c.nu = nu;
    c.gamma = gamma;
    c.c_pos = c_pos;
    c.c_neg = c_neg;
    c.svdd_negatives = svdd_negatives;
    c.svm_c = svm_c;
    c.l2_lambda = l2;
    c.max_splits = max_splits;
    c.smo.tolerance = tolerance;
    c.smo.max_iter = max_iter;
    c.logreg.tolerance = tolerance;
    return c;
  }
};

struct TrainArgs {
  ModelArgs model;
  std::string features;
  std::string manifest;
  std::string split = "train";
  bool grid_search = false;
  std::string out;
};

struct EvalArgs {
  std::string model;
  std::string features;
  std::string manifest;
  std::string split = "test";
  std::string threshold_source = "test";
  std::optional<double> threshold;
  std::string objective = "max_accuracy";
  std::optional<std::string> detector;
  int cv_folds = 0;
  std::uint64_t seed = 42;
  std::string out;
};

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

struct GlobalArgs {
  std::uint64_t seed = 42;
  int jobs = 1;
};

std::array<double, 3> parse_ratio(const std::string& text) {
  std::array<double, 3> out{};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const auto end = text.find(':', pos);
    if ((i < 2) == (end == std::string::npos)) throw InvalidArgument("nok ratio must look like a:b:c");
    out[static_cast<std::size_t>(i)] = csv::parse_number(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

std::vector<SampleRecord> input_records(const std::string& images, const std::string& manifest) {
  if (images.empty() == manifest.empty()) throw InvalidArgument("give exactly one of --images or --manifest");
  return images.empty() ? read_records(manifest) : scan_directory(images);
}

int cmd_extract(const ExtractArgs& a, const GlobalArgs& g, spdlog::logger& log) {
  auto records = input_records(a.images, a.manifest);
  if (a.augment) records = augment_records(records);
  auto options = a.detector.options();
  options.crop = a.crop;
  options.crop_config.padding = a.padding;
  options.jobs = g.jobs;

  const auto result = extract_features(records, options);
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& o = result.outcomes[i];
    if (o.skipped) {
      ++skipped;
      log.warn("{}: skipped: {}", records[i].id, o.message);
      continue;
    }
    log.debug("{}: {} keypoints", records[i].id, o.keypoints);
    if (!o.message.empty()) log.warn("{}: {}", records[i].id, o.message);
  }
  csv::write_text(a.out, features_to_csv(result.dataset, options.detector, options.k));
  log.info("wrote {} rows to {} ({} skipped)", result.dataset.size(), a.out, skipped);
  return 0;
}

int cmd_split(SplitArgs a, const GlobalArgs& g, spdlog::logger& log) {
  auto records = input_records(a.images, a.records);
  const bool originals = std::all_of(records.begin(), records.end(), [](const auto& r) { return r.rotation == 0; });
  if (originals) records = augment_records(records);
  a.spec.seed = g.seed;
  a.spec.nok_ratio = parse_ratio(a.nok_ratio);
  if (a.unit == "augmented")
    a.spec.unit = SampleUnit::augmented;
  else if (a.unit == "original")
    a.spec.unit = SampleUnit::original;
  else
    throw InvalidArgument("unit must be augmented or original");
  a.spec.group_disjoint = !a.no_group_disjoint;

  const auto splits = build_splits(records, a.spec);
  csv::write_text(a.out, splits_to_manifest(splits, a.spec));
  log.info("split {} records: train {}, validation {}, test {}", records.size(), splits.train.size(),
           splits.validation.size(), splits.test.size());
  return 0;
}

LabeledDataset load_split(const std::string& features, const std::string& manifest, const std::string& split,
                          std::optional<DetectorKind>* detector = nullptr) {
  auto file = read_features(features);
  if (detector) *detector = file.detector;
  if (manifest.empty()) return std::move(file.dataset);
  return select_split(file.dataset, read_split_manifest(manifest), split);
}

int cmd_train(const TrainArgs& a, spdlog::logger& log) {
  ModelConfig config = a.model.config();
  const LabeledDataset train = load_split(a.features, a.manifest, a.split);
  if (train.size() == 0) throw InvalidArgument("split '" + a.split + "' is empty");
  if (trains_on_ok_only(config) && train.count(Label::nok) > 0)
    log.warn("{} is trained on OK samples only; excluding {} NOK rows", to_string(config.kind),
             train.count(Label::nok));

  if (a.grid_search) {
    if (a.manifest.empty()) throw InvalidArgument("--grid-search needs --manifest with a validation split");
    const LabeledDataset val = load_split(a.features, a.manifest, "validation");
    if (val.count(Label::ok) == 0 || val.count(Label::nok) == 0)
      throw InvalidArgument("validation split must contain both OK and NOK samples");
    const auto grid = grid_search(config, train, val);
    for (const auto& p : grid.points)
      std::cout << "grid gamma=" << csv::format_number(p.gamma) << " nu=" << csv::format_number(p.nu)
                << " validation_auc=" << csv::format_number(p.auc) << '\n';
    config = grid.best;
  }

  const TrainedModel model = train_model(config, train);
  save_model(model, a.out);
  std::cout << "model=" << to_string(model.kind) << " rows=" << (trains_on_ok_only(config) ? train.count(Label::ok) : train.size()) << " iterations=" << model.iterations
            << " residual=" << csv::format_number(model.final_residual) << " hash=" << model.config_hash << '\n';
  return 0;
}

int cmd_eval(const EvalArgs& a, spdlog::logger& log) {
  const TrainedModel model = load_model(a.model);
  std::optional<DetectorKind> detector;
  const LabeledDataset test = load_split(a.features, a.manifest, a.split, &detector);
  if (test.count(Label::ok) == 0 || test.count(Label::nok) == 0)
    throw InvalidArgument("split '" + a.split + "' must contain both OK and NOK samples");
  if (a.detector) detector = detector_from_string(*a.detector);

  const auto objective = threshold_objective_from_string(a.objective);
  const auto source = threshold_source_from_string(a.threshold_source);
  std::optional<double> threshold;
  if (source == ThresholdSource::fixed) {
    if (!a.threshold) throw InvalidArgument("--threshold-source fixed needs --threshold");
    threshold = a.threshold;
  } else if (source == ThresholdSource::validation) {
    if (a.manifest.empty()) throw InvalidArgument("--threshold-source validation needs --manifest");
    const LabeledDataset val = load_split(a.features, a.manifest, "validation");
    if (val.count(Label::ok) == 0 || val.count(Label::nok) == 0)
      throw InvalidArgument("validation split must contain both OK and NOK samples");
    const auto scores = score_all(model, val.matrix);
    threshold = select_threshold(scores, val.labels, objective);
  } else if (a.threshold) {
    throw InvalidArgument("--threshold is only used with --threshold-source fixed");
  }

  EvalReport report = evaluate(model, test, threshold, objective);
  report.threshold_source = source;
  report.detector = detector ? detector_display_name(to_string(*detector)) : "unknown";
  if (source == ThresholdSource::test)
    log.warn("threshold selected on the evaluated split; accuracy is optimistic");

  nlohmann::json j = report_to_json(report);
  j["split"] = a.split;
  j["samples"] = test.size();
  j["model_config_hash"] = model.config_hash;
  if (a.cv_folds > 0) {
    if (a.manifest.empty()) throw InvalidArgument("--cv-folds needs --manifest");
    const LabeledDataset train = load_split(a.features, a.manifest, "train");
    const auto cv_source = source == ThresholdSource::validation ? ThresholdSource::validation : ThresholdSource::test;
    const auto cv = cross_validate(model.config, train, a.cv_folds, a.seed, cv_source);
    j["cross_validation"] = {{"folds", a.cv_folds},
                             {"mean_accuracy", cv.mean_accuracy},
                             {"std_accuracy", cv.std_accuracy},
                             {"mean_auc", cv.mean_auc},
                             {"std_auc", cv.std_auc}};
  }

  const fs::path out(a.out);
  csv::write_text(out / "report.json", j.dump(2) + "\n");
  csv::write_text(out / "roc.csv", roc_to_csv(report.roc));
  const std::string table = format_table(std::span<const EvalReport>(&report, 1));
  csv::write_text(out / "report.txt", table);
  std::cout << table;
  return 0;
}

int cmd_report(const ReportArgs& a) {
  std::vector<EvalReport> reports;
  for (const auto& path : a.inputs) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(csv::read_text(path));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ": " + e.what());
    }
    reports.push_back(report_from_json(j));
  }
  const std::string table = format_table(reports);
  if (!a.out.empty()) csv::write_text(a.out, table);
  std::cout << table;
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  auto log = make_logger();

  CLI::App app{"Keypoint-descriptor anomaly detection", "kpad"};
  app.set_config("--config", "", "INI file; [extract], [split], [train], [eval] sections hold subcommand options");
  app.require_subcommand(1);

  GlobalArgs global;
  app.add_option("--seed", global.seed, "Top-level random seed")->capture_default_str();
  app.add_option("--jobs", global.jobs, "Extraction worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Detect keypoints and write the descriptor CSV");
  extract->add_option("--images", ex.images, "Image root laid out as <root>/<class>/*.png");
  extract->add_option("--manifest", ex.manifest, "CSV with path,class (split manifests work too)");
  extract->add_flag("--augment", ex.augment, "Add the 90/180/270 degree rotations of every image");
  extract->add_flag("--crop", ex.crop, "Crop to the Otsu foreground bounding box first");
  extract->add_option("--padding", ex.padding, "Crop padding in pixels")->capture_default_str();
  extract->add_option("--detector", ex.detector.detector, "dog | fast_hessian")->capture_default_str();
  extract->add_option("-k,--top-k", ex.detector.k, "Keypoints per descriptor")->capture_default_str();
  extract->add_option("--octaves", ex.detector.octaves);
  extract->add_option("--scales", ex.detector.scales, "Scales per octave (DoG)");
  extract->add_option("--sigma", ex.detector.sigma, "Base blur (DoG)");
  extract->add_option("--contrast-threshold", ex.detector.contrast_threshold);
  extract->add_option("--edge-ratio", ex.detector.edge_ratio, "Edge rejection ratio (DoG)");
  extract->add_option("--border", ex.detector.border);
  extract->add_option("--out", ex.out, "Feature CSV")->required();
  extract->add_option("--jobs", global.jobs, "Extraction worker threads")->check(CLI::PositiveNumber);

  SplitArgs sp;
  auto* split = app.add_subcommand("split", "Draw train/validation/test manifests");
  split->add_option("--images", sp.images, "Image root laid out as <root>/<class>/*.png");
  split->add_option("--manifest", sp.records, "CSV with path,class");
  split->add_option("--train-ok", sp.spec.train_ok)->capture_default_str();
  split->add_option("--train-nok", sp.spec.train_nok)->capture_default_str();
  split->add_option("--validation-ok", sp.spec.validation_ok)->capture_default_str();
  split->add_option("--validation-nok", sp.spec.validation_nok)->capture_default_str();
  split->add_option("--test-ok", sp.spec.test_ok)->capture_default_str();
  split->add_option("--test-nok", sp.spec.test_nok)->capture_default_str();
  split->add_option("--nok-ratio", sp.nok_ratio, "incomplete:strange:color share of test NOK")->capture_default_str();
  split->add_option("--unit", sp.unit, "augmented | original")->capture_default_str();
  split->add_flag("--no-group-disjoint", sp.no_group_disjoint, "Allow rotations of one capture in several splits");
  split->add_option("--out", sp.out, "Split manifest CSV")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Fit a model on the train split");
  train->add_option("--features", tr.features, "Feature CSV")->required();
  train->add_option("--manifest", tr.manifest, "Split manifest; without it every feature row is used");
  train->add_option("--split", tr.split)->capture_default_str();
  train->add_option("--model", tr.model.model, "ocsvm | svdd | svm | gnb | logreg | tree")->capture_default_str();
  train->add_option("--normalize", tr.model.normalize, "occ_only | all | none")->capture_default_str();
  train->add_option("--nu", tr.model.nu)->capture_default_str();
  train->add_option("--gamma", tr.model.gamma, "RBF width; data-driven default when unset");
  train->add_option("--c-pos", tr.model.c_pos, "SVDD OK penalty");
  train->add_option("--c-neg", tr.model.c_neg, "SVDD NOK penalty")->capture_default_str();
  train->add_flag("--svdd-negatives", tr.model.svdd_negatives, "Use labeled NOK rows in SVDD");
  train->add_option("--svm-c", tr.model.svm_c)->capture_default_str();
  train->add_option("--l2", tr.model.l2, "Logistic regression L2 weight")->capture_default_str();
  train->add_option("--max-splits", tr.model.max_splits, "Coarse tree split budget")->capture_default_str();
  train->add_option("--tolerance", tr.model.tolerance)->capture_default_str();
  train->add_option("--max-iter", tr.model.max_iter, "SMO iteration cap")->capture_default_str();
  train->add_flag("--grid-search", tr.grid_search, "Pick gamma and nu by validation AUC (kernel models)");
  train->add_option("--out", tr.out, "Model JSON")->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score a split and write report.json, report.txt, roc.csv");
  eval->add_option("--model", ev.model, "Model JSON")->required();
  eval->add_option("--features", ev.features, "Feature CSV")->required();
  eval->add_option("--manifest", ev.manifest, "Split manifest; without it every feature row is used");
  eval->add_option("--split", ev.split)->capture_default_str();
  eval->add_option("--threshold-source", ev.threshold_source, "test | validation | fixed")->capture_default_str();
  eval->add_option("--threshold", ev.threshold, "Decision threshold for --threshold-source fixed");
  eval->add_option("--objective", ev.objective, "max_accuracy | youden")->capture_default_str();
  eval->add_option("--detector", ev.detector, "Override the detector label in the table");
  eval->add_option("--cv-folds", ev.cv_folds, "Also cross-validate on the train split")->capture_default_str();
  eval->add_option("--out", ev.out, "Output directory")->required();

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "Tabulate report.json files");
  report->add_option("inputs", rp.inputs, "report.json files")->required();
  report->add_option("--out", rp.out, "Write the table here as well");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::invalid);
  }

  try {
    if (*extract) return cmd_extract(ex, global, *log);
    if (*split) return cmd_split(sp, global, *log);
    if (*train) return cmd_train(tr, *log);
    if (*eval) {
      ev.seed = global.seed;
      return cmd_eval(ev, *log);
    }
    if (*report) return cmd_report(rp);
  } catch (const ConvergenceError& e) {
    log->error("{} (residual {})", e.what(), csv::format_number(e.residual()));
    return e.exit_code();
  } catch (const Error& e) {
    log->error("{}", e.what());
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    log->error("malformed JSON: {}", e.what());
    return static_cast<int>(ErrorKind::io);
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return static_cast<int>(ErrorKind::io);
  }
  return static_cast<int>(ErrorKind::invalid);
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace kpad
