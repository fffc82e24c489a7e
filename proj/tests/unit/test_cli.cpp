#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kpad/cli.hpp"
#include "kpad/csv.hpp"
#include "kpad/evaluation.hpp"
#include "kpad/model_io.hpp"
#include "kpad/pipeline.hpp"
#include "kpad/synthetic.hpp"

using namespace kpad;
namespace fs = std::filesystem;

namespace {

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "kpad");
  return run_cli(args);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Shared fixture directory with a small synthetic image tree.
struct Workspace {
  fs::path root;
  fs::path images;
  Workspace() {
    root = fs::temp_directory_path() / "kpad_test_cli";
    fs::remove_all(root);
    images = root / "images";
    synth::write_dataset(images, 60, 36, 5);
  }
  ~Workspace() { fs::remove_all(root); }
  std::string path(const std::string& name) const { return (root / name).string(); }
};

Workspace& workspace() {
  static Workspace ws;
  return ws;
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(cli({}) == 2);
  CHECK(cli({"bogus"}) == 2);
  CHECK(cli({"extract"}) == 2);
  CHECK(cli({"extract", "--out", "x.csv"}) == 2);
  CHECK(cli({"extract", "--images", "a", "--manifest", "b", "--out", "x.csv"}) == 2);
  CHECK(cli({"train", "--features", "f.csv", "--out", "m.json", "--model", "forest"}) == 2);
  CHECK(cli({"--help"}) == 0);
}

TEST_CASE("missing inputs exit with code 1") {
  auto& ws = workspace();
  CHECK(cli({"extract", "--images", ws.path("nowhere"), "--out", ws.path("x.csv")}) == 1);
  CHECK(cli({"train", "--features", ws.path("nothing.csv"), "--out", ws.path("m.json")}) == 1);
  CHECK(cli({"report", ws.path("none.json")}) == 1);
}

TEST_CASE("extract writes one row per image") {
  auto& ws = workspace();
  REQUIRE(cli({"extract", "--images", ws.images.string(), "--detector", "fast_hessian", "--out", ws.path("f.csv")}) == 0);
  const auto file = read_features(ws.path("f.csv"));
  CHECK(file.dataset.size() == 96);
  CHECK(file.dataset.matrix.cols() == 10);
  CHECK(file.detector == DetectorKind::fast_hessian);
  CHECK(slurp(ws.path("f.csv")).rfind("# detector=fast_hessian k=5\n", 0) == 0);

  REQUIRE(cli({"extract", "--images", ws.images.string(), "-k", "6", "--augment", "--crop", "--out", ws.path("f6.csv")}) == 0);
  const auto aug = read_features(ws.path("f6.csv"));
  CHECK(aug.dataset.size() == 384);
  CHECK(aug.dataset.matrix.cols() == 12);
  CHECK(aug.detector == DetectorKind::dog);
}

TEST_CASE("extract output does not depend on the worker count") {
  auto& ws = workspace();
  REQUIRE(cli({"extract", "--images", ws.images.string(), "--out", ws.path("j1.csv")}) == 0);
  REQUIRE(cli({"--jobs", "3", "extract", "--images", ws.images.string(), "--out", ws.path("j3.csv")}) == 0);
  REQUIRE(cli({"extract", "--images", ws.images.string(), "--jobs", "4", "--out", ws.path("j4.csv")}) == 0);
  CHECK(slurp(ws.path("j1.csv")) == slurp(ws.path("j3.csv")));
  CHECK(slurp(ws.path("j1.csv")) == slurp(ws.path("j4.csv")));
}

TEST_CASE("flat images give zero-padded rows and unreadable images are skipped") {
  auto& ws = workspace();
  const auto flat = ws.root / "flat";
  fs::create_directories(flat / "ok");
  fs::create_directories(flat / "nok_color");
  save_png(GrayImage(40, 40, 0.5), flat / "ok" / "a.png");
  save_png(GrayImage(40, 40, 0.2), flat / "nok_color" / "b.png");
  { std::ofstream(flat / "ok" / "broken.png") << "not a png"; }
  REQUIRE(cli({"extract", "--images", flat.string(), "--out", ws.path("flat.csv")}) == 0);
  const auto file = read_features(ws.path("flat.csv"));
  CHECK(file.dataset.size() == 2);
  CHECK(file.dataset.matrix.isZero(0.0));
  fs::remove(flat / "ok" / "a.png");
  fs::remove(flat / "nok_color" / "b.png");
  CHECK(cli({"extract", "--images", flat.string(), "--out", ws.path("none.csv")}) == 2);
}

TEST_CASE("split, train, eval and report") {
  auto& ws = workspace();
  REQUIRE(cli({"extract", "--images", ws.images.string(), "--detector", "fast_hessian", "--augment", "--out",
               ws.path("aug.csv")}) == 0);
  REQUIRE(cli({"split", "--images", ws.images.string(), "--train-ok", "40", "--train-nok", "4", "--validation-ok", "12",
               "--validation-nok", "12", "--test-ok", "20", "--test-nok", "20", "--nok-ratio", "0.4:0.3:0.3", "--out",
               ws.path("splits.csv")}) == 0);
  const auto rows = read_split_manifest(ws.path("splits.csv"));
  CHECK(rows.size() == 108);

  REQUIRE(cli({"train", "--features", ws.path("aug.csv"), "--manifest", ws.path("splits.csv"), "--model", "ocsvm",
               "--out", ws.path("oc.json")}) == 0);
  const auto model = load_model(ws.path("oc.json"));
  CHECK(model.kind == ModelKind::ocsvm);
  CHECK(model.feature_dim == 10);

  REQUIRE(cli({"train", "--features", ws.path("aug.csv"), "--manifest", ws.path("splits.csv"), "--model", "gnb",
               "--out", ws.path("gnb.json")}) == 0);

  REQUIRE(cli({"eval", "--model", ws.path("oc.json"), "--features", ws.path("aug.csv"), "--manifest",
               ws.path("splits.csv"), "--threshold-source", "validation", "--out", ws.path("eval_oc")}) == 0);
  for (const char* f : {"report.json", "report.txt", "roc.csv"}) CHECK(fs::exists(ws.root / "eval_oc" / f));
  const auto j = nlohmann::json::parse(slurp(ws.root / "eval_oc" / "report.json"));
  CHECK(j.at("threshold_source") == "validation");
  CHECK(j.at("n") == 40);
  CHECK(j.at("split") == "test");
  CHECK(j.at("model_config_hash") == model.config_hash);
  CHECK(j.at("detector") == "SURF (fast-Hessian)");
  const auto back = report_from_json(j);
  CHECK(back.accuracy == j.at("accuracy").get<double>());
  CHECK(slurp(ws.root / "eval_oc" / "roc.csv").rfind("threshold,fpr,tpr\ninf,0,0\n", 0) == 0);

  REQUIRE(cli({"eval", "--model", ws.path("gnb.json"), "--features", ws.path("aug.csv"), "--manifest",
               ws.path("splits.csv"), "--cv-folds", "3", "--out", ws.path("eval_gnb")}) == 0);
  const auto jg = nlohmann::json::parse(slurp(ws.root / "eval_gnb" / "report.json"));
  CHECK(jg.at("threshold_source") == "test");
  CHECK(jg.contains("cross_validation"));

  CHECK(cli({"eval", "--model", ws.path("gnb.json"), "--features", ws.path("aug.csv"), "--manifest",
             ws.path("splits.csv"), "--threshold-source", "fixed", "--out", ws.path("eval_fixed")}) == 2);
  REQUIRE(cli({"eval", "--model", ws.path("gnb.json"), "--features", ws.path("aug.csv"), "--manifest",
               ws.path("splits.csv"), "--threshold-source", "fixed", "--threshold", "0.5", "--out",
               ws.path("eval_fixed")}) == 0);

  REQUIRE(cli({"report", (ws.root / "eval_oc" / "report.json").string(), (ws.root / "eval_gnb" / "report.json").string(),
               "--out", ws.path("table.txt")}) == 0);
  const auto table = slurp(ws.path("table.txt"));
  CHECK(table.find("One-class SVM") != std::string::npos);
  CHECK(table.find("Naive Bayes (Gaussian)") != std::string::npos);
}

TEST_CASE("grid search requires and uses a validation split") {
  auto& ws = workspace();
  REQUIRE(fs::exists(ws.path("splits.csv")));
  CHECK(cli({"train", "--features", ws.path("aug.csv"), "--model", "ocsvm", "--grid-search", "--out",
             ws.path("g.json")}) == 2);
  REQUIRE(cli({"train", "--features", ws.path("aug.csv"), "--manifest", ws.path("splits.csv"), "--model", "ocsvm",
               "--grid-search", "--out", ws.path("g.json")}) == 0);
  const auto m = load_model(ws.path("g.json"));
  bool on_grid = false;
  for (double g : kGammaGrid) on_grid = on_grid || std::abs(*m.config.gamma - g / 10.0) < 1e-15;
  CHECK(on_grid);
}

TEST_CASE("a split without NOK rows cannot be evaluated") {
  auto& ws = workspace();
  {
    std::ofstream m(ws.root / "okonly.csv");
    m << "id,path,class,rotation,split\n";
    m << "ok/img0000,x.png,ok,0,test\nok/img0001,y.png,ok,0,test\n";
  }
  CHECK(cli({"eval", "--model", ws.path("gnb.json"), "--features", ws.path("aug.csv"), "--manifest",
             ws.path("okonly.csv"), "--out", ws.path("eval_bad")}) == 2);
}

TEST_CASE("infeasible split requests exit with code 2") {
  auto& ws = workspace();
  CHECK(cli({"split", "--images", ws.images.string(), "--train-ok", "1000", "--out", ws.path("bad.csv")}) == 2);
  CHECK(cli({"split", "--images", ws.images.string(), "--nok-ratio", "1:1", "--out", ws.path("bad.csv")}) == 2);
}

TEST_CASE("INI config supplies subcommand options and flags override it") {
  auto& ws = workspace();
  {
    std::ofstream ini(ws.root / "run.ini");
    ini << "[extract]\ndetector=fast_hessian\ntop-k=3\n";
  }
  REQUIRE(cli({"--config", ws.path("run.ini"), "extract", "--images", ws.images.string(), "--out", ws.path("ini.csv")}) == 0);
  const auto a = read_features(ws.path("ini.csv"));
  CHECK(a.detector == DetectorKind::fast_hessian);
  CHECK(a.dataset.matrix.cols() == 6);
  REQUIRE(cli({"--config", ws.path("run.ini"), "extract", "--images", ws.images.string(), "-k", "4", "--out",
               ws.path("ini2.csv")}) == 0);
  const auto b = read_features(ws.path("ini2.csv"));
  CHECK(b.detector == DetectorKind::fast_hessian);
  CHECK(b.dataset.matrix.cols() == 8);
}

TEST_CASE("non-convergence exits with code 3") {
  auto& ws = workspace();
  REQUIRE(fs::exists(ws.path("aug.csv")));
  CHECK(cli({"train", "--features", ws.path("aug.csv"), "--model", "ocsvm", "--max-iter", "1", "--tolerance", "1e-12",
             "--out", ws.path("nc.json")}) == 3);
}

TEST_CASE("reruns are byte-identical") {
  auto& ws = workspace();
  REQUIRE(fs::exists(ws.path("splits.csv")));
  REQUIRE(cli({"train", "--features", ws.path("aug.csv"), "--manifest", ws.path("splits.csv"), "--model", "ocsvm",
               "--out", ws.path("oc2.json")}) == 0);
  CHECK(slurp(ws.path("oc.json")) == slurp(ws.path("oc2.json")));
  REQUIRE(cli({"split", "--images", ws.images.string(), "--train-ok", "40", "--train-nok", "4", "--validation-ok", "12",
               "--validation-nok", "12", "--test-ok", "20", "--test-nok", "20", "--out", ws.path("splits2.csv")}) == 0);
  CHECK(slurp(ws.path("splits.csv")) == slurp(ws.path("splits2.csv")));
}
