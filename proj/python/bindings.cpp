#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kpad/cli.hpp"
#include "kpad/errors.hpp"
#include "kpad/evaluation.hpp"
#include "kpad/model_io.hpp"
#include "kpad/synthetic.hpp"

namespace py = pybind11;

namespace {

using Array2D = py::array_t<double, py::array::c_style | py::array::forcecast>;

kpad::GrayImage to_image(const Array2D& array) {
  if (array.ndim() != 2) throw kpad::InvalidArgument("image must be a 2-D array");
  kpad::GrayImage img(static_cast<int>(array.shape(1)), static_cast<int>(array.shape(0)));
  std::copy(array.data(), array.data() + array.size(), img.data.begin());
  return img;
}

Array2D from_image(const kpad::GrayImage& img) {
  Array2D out({img.height, img.width});
  std::copy(img.data.begin(), img.data.end(), out.mutable_data());
  return out;
}

std::vector<kpad::Label> to_labels(const std::vector<int>& labels) {
  std::vector<kpad::Label> out;
  for (int v : labels) {
    if (v != 0 && v != 1) throw kpad::InvalidArgument("labels must be 0 (OK) or 1 (NOK)");
    out.push_back(static_cast<kpad::Label>(v));
  }
  return out;
}

kpad::DetectorConfig detector_config(kpad::DetectorKind kind, const py::kwargs& kw) {
  auto cfg = kpad::DetectorConfig::defaults_for(kind);
  for (const auto& [key, value] : kw) {
    const auto name = key.cast<std::string>();
    if (name == "octaves") cfg.octaves = value.cast<int>();
    else if (name == "scales_per_octave") cfg.scales_per_octave = value.cast<int>();
    else if (name == "base_sigma") cfg.base_sigma = value.cast<double>();
    else if (name == "contrast_threshold") cfg.contrast_threshold = value.cast<double>();
    else if (name == "edge_ratio_threshold") cfg.edge_ratio_threshold = value.cast<double>();
    else if (name == "border_margin") cfg.border_margin = value.cast<int>();
    else throw kpad::InvalidArgument("unknown detector parameter '" + name + "'");
  }
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_kpad, m) {
  m.doc() = "Keypoint-descriptor anomaly detection core";

  static py::exception<kpad::Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const kpad::Error& e) {
      PyErr_SetObject(error.ptr(), py::make_tuple(e.what(), e.exit_code()).ptr());
    }
  });

  py::class_<kpad::Keypoint>(m, "Keypoint")
      .def_readonly("x", &kpad::Keypoint::x)
      .def_readonly("y", &kpad::Keypoint::y)
      .def_readonly("scale", &kpad::Keypoint::scale)
      .def_readonly("response", &kpad::Keypoint::response)
      .def_property_readonly("detector", [](const kpad::Keypoint& k) { return std::string(kpad::to_string(k.detector)); })
      .def("__repr__", [](const kpad::Keypoint& k) {
        return "Keypoint(x=" + std::to_string(k.x) + ", y=" + std::to_string(k.y) + ", scale=" +
               std::to_string(k.scale) + ", response=" + std::to_string(k.response) + ")";
      });

  m.def(
      "detect",
      [](const Array2D& image, const std::string& detector, const py::kwargs& kw) {
        const auto kind = kpad::detector_from_string(detector);
        return kpad::detect(kind, to_image(image), detector_config(kind, kw));
      },
      py::arg("image"), py::arg("detector") = "dog",
      "Keypoints of a grayscale image in [0,1], strongest first.");

  m.def(
      "build_vector",
      [](const std::vector<kpad::Keypoint>& keypoints, int k) { return kpad::build_vector(keypoints, k).values; },
      py::arg("keypoints"), py::arg("k") = kpad::kDefaultTopK,
      "[scale_1, response_1, ..., scale_k, response_k] of the k strongest keypoints, zero-padded.");

  m.def(
      "describe",
      [](const Array2D& image, const std::string& detector, int k, const py::kwargs& kw) {
        const auto kind = kpad::detector_from_string(detector);
        return kpad::build_vector(kpad::detect(kind, to_image(image), detector_config(kind, kw)), k).values;
      },
      py::arg("image"), py::arg("detector") = "dog", py::arg("k") = kpad::kDefaultTopK);

  py::class_<kpad::TrainedModel>(m, "Model")
      .def_property_readonly("kind", [](const kpad::TrainedModel& t) { return std::string(kpad::to_string(t.kind)); })
      .def_readonly("feature_dim", &kpad::TrainedModel::feature_dim)
      .def_readonly("config_hash", &kpad::TrainedModel::config_hash)
      .def_readonly("iterations", &kpad::TrainedModel::iterations)
      .def_readonly("final_residual", &kpad::TrainedModel::final_residual)
      .def("score", [](const kpad::TrainedModel& t, const kpad::Matrix& x) { return kpad::score_all(t, x); },
           "Anomaly score per row, higher = more anomalous.")
      .def("to_json", [](const kpad::TrainedModel& t) { return kpad::model_to_json(t).dump(); })
      .def_static("from_json",
                  [](const std::string& text) { return kpad::model_from_json(nlohmann::json::parse(text)); });

  m.def(
      "train",
      [](const kpad::Matrix& x, const std::vector<int>& labels, const std::string& model, const std::string& params) {
        const auto kind = kpad::model_kind_from_string(model);
        kpad::LabeledDataset ds;
        ds.matrix = x;
        ds.labels = to_labels(labels);
        for (std::size_t i = 0; i < ds.labels.size(); ++i) ds.sample_ids.push_back(std::to_string(i));
        kpad::ModelConfig defaults;
        defaults.kind = kind;
        auto j = kpad::config_to_json(defaults);
        const auto overrides = nlohmann::json::parse(params.empty() ? "{}" : params);
        for (const auto& [key, value] : overrides.items()) {
          if (!j.contains(key)) throw kpad::InvalidArgument("unknown hyperparameter '" + key + "'");
          j[key] = value;
        }
        return kpad::train_model(kpad::config_from_json(j, kind), ds);
      },
      py::arg("x"), py::arg("labels"), py::arg("model") = "ocsvm", py::arg("params") = "",
      "Fits a model. `params` is a JSON object of hyperparameters as stored in model files.");

  m.def(
      "roc_auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        const auto r = kpad::roc_and_auc(scores, to_labels(labels));
        return py::make_tuple(r.curve.fpr, r.curve.tpr, r.curve.thresholds, r.auc);
      },
      py::arg("scores"), py::arg("labels"), "(fpr, tpr, thresholds, auc) with NOK (=1) as positive.");

  m.def(
      "select_threshold",
      [](const std::vector<double>& scores, const std::vector<int>& labels, const std::string& objective) {
        return kpad::select_threshold(scores, to_labels(labels), kpad::threshold_objective_from_string(objective));
      },
      py::arg("scores"), py::arg("labels"), py::arg("objective") = "max_accuracy");

  m.def(
      "synthetic_biscuit",
      [](std::uint64_t seed, const std::string& defect, int size) {
        kpad::Rng rng(seed);
        kpad::synth::BiscuitStyle style;
        style.size = size;
        kpad::synth::Defect d = kpad::synth::Defect::none;
        if (defect == "spots") d = kpad::synth::Defect::spots;
        else if (defect == "bite") d = kpad::synth::Defect::bite;
        else if (defect == "color") d = kpad::synth::Defect::color;
        else if (defect != "none") throw kpad::InvalidArgument("defect must be none, spots, bite or color");
        return from_image(kpad::synth::biscuit(rng, d, style));
      },
      py::arg("seed"), py::arg("defect") = "none", py::arg("size") = 97);

  m.def(
      "synthetic_texture",
      [](std::uint64_t seed, int width, int height) {
        kpad::Rng rng(seed);
        return from_image(kpad::synth::texture(rng, width, height));
      },
      py::arg("seed"), py::arg("width") = 97, py::arg("height") = 97);

  m.def(
      "run_cli", [](const std::vector<std::string>& args) {
        std::vector<std::string> argv{"kpad"};
        argv.insert(argv.end(), args.begin(), args.end());
        return kpad::run_cli(argv);
      },
      py::arg("args"), "Runs a `kpad` subcommand in-process and returns its exit code.");
}
