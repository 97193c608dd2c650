// Copyright 2026 The rbig Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line front end for the rbig library. Verb-style subcommands cover
// the whole pipeline: fit a detector, score data, run change detection on an
// image pair, evaluate scores against a ground-truth mask, draw synthetic
// samples from a fitted density, and generate the bundled toy datasets.
//
// Exit codes: 0 success, 2 usage / unreadable or garbled input files,
// 3 domain errors (violated preconditions, fit failures, mismatched shapes).

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rbig/rbig.hpp"

namespace {

using nlohmann::json;
using rbig::Index;
using rbig::Matrix;
using rbig::Vector;

constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_raster_path(const std::string& path) {
  return ends_with(path, ".mbrs");
}

// Tabular view of either input flavor. For rasters the rows are the valid
// (non-nodata) pixels and enough geometry is kept to write an aligned
// score map back out.
struct TabularInput {
  Matrix X;
  bool is_raster = false;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t bands = 0;
  std::vector<Index> pixel_index;  // row -> linear pixel position
};

TabularInput load_tabular(const std::string& path) {
  TabularInput in;
  if (is_raster_path(path)) {
    rbig::RasterImage img = rbig::read_raster(path);
    in.is_raster = true;
    in.width = img.width;
    in.height = img.height;
    in.bands = img.bands;
    auto [X, index] = rbig::flatten_to_matrix(img);
    in.X = std::move(X);
    in.pixel_index = std::move(index);
  } else {
    rbig::CsvMatrix csv = rbig::read_csv_matrix(path);
    in.X = std::move(csv.values);
  }
  return in;
}

void write_scores(const Vector& scores, const TabularInput& in,
                  const std::string& out_path) {
  if (in.is_raster) {
    rbig::RasterImage map = rbig::make_score_map(in.width, in.height, scores,
                                                 in.pixel_index);
    rbig::write_raster(map, out_path);
  } else {
    rbig::write_csv_matrix(out_path, scores, {"score"});
  }
}

// Pulls a column out of a CSV by header name, falling back to the only
// column when the file has exactly one.
Vector extract_column(const rbig::CsvMatrix& csv, const std::string& name,
                      const std::string& path) {
  for (std::size_t j = 0; j < csv.columns.size(); ++j) {
    if (csv.columns[j] == name) {
      return csv.values.col(static_cast<Index>(j));
    }
  }
  if (csv.values.cols() == 1) return csv.values.col(0);
  throw rbig::ParseError(path + ": no \"" + name +
                         "\" column and more than one column present");
}

// ---------------------------------------------------------------------------
// Detector configuration shared by `fit` and `detect-change`.
// ---------------------------------------------------------------------------

struct MethodOptions {
  std::string method = "rbig";
  int layers = 100;
  int bins = 0;  // 0 = sqrt(l) heuristic
  std::string rotation = "pca";
  double tol_negentropy = 1e-3;
  double retain_fraction = 0.95;
  std::string sigma_rule = "median";
  int max_support = 2000;
  double reg = -1.0;  // < 0 = per-method default
  std::uint64_t seed = 0;
};

void add_method_flags(CLI::App* cmd, MethodOptions& opt) {
  cmd->add_option("--method", opt.method, "Detector to fit")
      ->check(CLI::IsMember({"rbig", "rx", "krx", "kde", "hybrid"}))
      ->capture_default_str();
  cmd->add_option("--layers", opt.layers,
                  "Maximum Gaussianization iterations (rbig, hybrid)")
      ->capture_default_str();
  cmd->add_option("--bins", opt.bins,
                  "Histogram bins per marginal; 0 picks sqrt(samples)")
      ->capture_default_str();
  cmd->add_option("--rotation", opt.rotation,
                  "Rotation family between iterations (rbig, hybrid)")
      ->check(CLI::IsMember({"pca", "random"}))
      ->capture_default_str();
  cmd->add_option("--tol-negentropy", opt.tol_negentropy,
                  "Per-dimension early-stop threshold; 0 disables")
      ->capture_default_str();
  cmd->add_option("--retain-fraction", opt.retain_fraction,
                  "Fraction of lowest-RX rows kept before the hybrid refit")
      ->capture_default_str();
  cmd->add_option("--sigma-rule", opt.sigma_rule,
                  "Kernel lengthscale rule (krx, kde)")
      ->check(CLI::IsMember({"median", "mean"}))
      ->capture_default_str();
  cmd->add_option("--max-support", opt.max_support,
                  "Background rows kept by kernel detectors")
      ->capture_default_str();
  cmd->add_option("--reg", opt.reg,
                  "Regularization weight; negative picks the per-method "
                  "default (1e-6 rx, 1e-3 krx)");
  cmd->add_option("--seed", opt.seed, "Random seed")->capture_default_str();
}

rbig::RbigConfig rbig_config_from(const MethodOptions& opt) {
  rbig::RbigConfig cfg;
  cfg.max_layers = opt.layers;
  cfg.bins = opt.bins;
  cfg.rotation = opt.rotation == "random" ? rbig::RotationKind::kRandom
                                          : rbig::RotationKind::kPca;
  cfg.tol_negentropy = opt.tol_negentropy;
  cfg.seed = opt.seed;
  return cfg;
}

rbig::KernelConfig kernel_config_from(const MethodOptions& opt) {
  rbig::KernelConfig cfg;
  cfg.sigma_rule = opt.sigma_rule == "mean" ? rbig::SigmaRule::kMean
                                            : rbig::SigmaRule::kMedian;
  cfg.max_support = opt.max_support;
  if (opt.reg >= 0.0) cfg.reg_lambda = opt.reg;
  cfg.seed = opt.seed;
  return cfg;
}

void describe_density(const rbig::GaussianizationModel& m, json& report) {
  report["layers"] = m.layers().size();
  report["bins"] = m.bins_used();
  report["negentropy_trace"] = m.has_trace() ? m.negentropy_trace()
                                             : std::vector<double>{};
  report["dropped_bands"] = m.dropped_bands();
  report["warnings"] = m.warnings();
}

rbig::DetectorModel fit_by_method(const Matrix& X, const MethodOptions& opt,
                                  json& report) {
  report["method"] = opt.method;
  if (opt.method == "rbig") {
    auto m = rbig::GaussianizationModel::fit(X, rbig_config_from(opt));
    describe_density(m, report);
    return m;
  }
  if (opt.method == "rx") {
    return rbig::fit_rx(X, opt.reg >= 0.0 ? opt.reg : 1e-6);
  }
  if (opt.method == "krx" || opt.method == "kde") {
    const auto kind = opt.method == "krx" ? rbig::KernelKind::kKrx
                                          : rbig::KernelKind::kKde;
    auto m = rbig::fit_kernel(X, kind, kernel_config_from(opt));
    report["support"] = m.support.rows();
    report["sigma"] = m.sigma;
    return m;
  }
  // "hybrid" is the only value the flag validator still admits.
  rbig::HybridConfig cfg;
  cfg.retain_fraction = opt.retain_fraction;
  cfg.rbig = rbig_config_from(opt);
  if (opt.reg >= 0.0) cfg.rx_reg_lambda = opt.reg;
  auto m = rbig::fit_hybrid(X, cfg);
  report["retained_rows"] = m.retained.size();
  describe_density(m.density, report);
  return m;
}

// ---------------------------------------------------------------------------
// Subcommands.
// ---------------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string model_out;
  MethodOptions method;
};

int run_fit(const FitArgs& a) {
  json report;
  auto t0 = Clock::now();
  TabularInput in = load_tabular(a.input);
  const double load_s = seconds_since(t0);

  auto t1 = Clock::now();
  rbig::DetectorModel model = fit_by_method(in.X, a.method, report);
  const double fit_s = seconds_since(t1);

  auto t2 = Clock::now();
  rbig::save_model(model, a.model_out);
  const double save_s = seconds_since(t2);

  report["input"] = a.input;
  report["model_out"] = a.model_out;
  report["rows"] = in.X.rows();
  report["columns"] = in.X.cols();
  // Timings go to standard output only; files stay byte-reproducible.
  report["timings"] = {{"load_s", load_s}, {"fit_s", fit_s},
                       {"save_s", save_s}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

struct ScoreArgs {
  std::string model;
  std::string input;
  std::string out;
};

int run_score(const ScoreArgs& a) {
  rbig::DetectorModel model = rbig::load_model(a.model);
  TabularInput in = load_tabular(a.input);
  Vector scores = rbig::score_detector(model, in.X);
  write_scores(scores, in, a.out);
  return 0;
}

struct ChangeArgs {
  std::string before;
  std::string after;
  std::string out;
  MethodOptions method;
};

int run_detect_change(const ChangeArgs& a) {
  TabularInput before = load_tabular(a.before);
  TabularInput after = load_tabular(a.after);
  if (before.is_raster != after.is_raster) {
    throw rbig::InvalidArgumentError(
        "detect-change: before and after must both be rasters or both CSV");
  }
  if (before.is_raster &&
      (before.width != after.width || before.height != after.height ||
       before.bands != after.bands)) {
    throw rbig::DimensionMismatchError(
        "detect-change: geometry mismatch, before " +
        std::to_string(before.width) + "x" + std::to_string(before.height) +
        "x" + std::to_string(before.bands) + " vs after " +
        std::to_string(after.width) + "x" + std::to_string(after.height) +
        "x" + std::to_string(after.bands));
  }
  if (before.X.cols() != after.X.cols()) {
    throw rbig::DimensionMismatchError(
        "detect-change: band count mismatch, before " +
        std::to_string(before.X.cols()) + " vs after " +
        std::to_string(after.X.cols()));
  }

  json report;
  auto t0 = Clock::now();
  rbig::DetectorModel model = fit_by_method(before.X, a.method, report);
  const double fit_s = seconds_since(t0);

  auto t1 = Clock::now();
  Vector scores = rbig::score_change(model, after.X);
  const double score_s = seconds_since(t1);
  write_scores(scores, after, a.out);

  report["before"] = a.before;
  report["after"] = a.after;
  report["out"] = a.out;
  report["rows"] = after.X.rows();
  report["timings"] = {{"fit_s", fit_s}, {"score_s", score_s}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

struct EvalArgs {
  std::string scores;
  std::string mask;
  std::string out_prefix;
  std::vector<double> fpr_caps{0.1, 0.2, 0.3};
  int bootstrap = 1000;
  std::uint64_t seed = 0;
};

std::pair<Vector, std::vector<int>> load_scores_and_mask(const EvalArgs& a) {
  if (is_raster_path(a.scores) != is_raster_path(a.mask)) {
    throw rbig::InvalidArgumentError(
        "eval: scores and mask must both be rasters or both CSV");
  }
  if (is_raster_path(a.scores)) {
    rbig::RasterImage img = rbig::read_raster(a.scores);
    if (img.bands != 1) {
      throw rbig::ParseError("eval: score raster must be single-band, got " +
                             std::to_string(img.bands) + " bands");
    }
    std::vector<int> mask = rbig::read_mask(a.mask, img.width, img.height);
    // Keep only scored pixels; the mask is subset to the same positions.
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t p = 0; p < img.values.size(); ++p) {
      if (img.has_nodata && img.values[p] == img.nodata) continue;
      s.push_back(img.values[p]);
      y.push_back(mask[p]);
    }
    Vector scores = Eigen::Map<const Vector>(s.data(),
                                             static_cast<Index>(s.size()));
    return {std::move(scores), std::move(y)};
  }
  rbig::CsvMatrix scsv = rbig::read_csv_matrix(a.scores);
  rbig::CsvMatrix mcsv = rbig::read_csv_matrix(a.mask);
  Vector scores = extract_column(scsv, "score", a.scores);
  Vector labels_raw = extract_column(mcsv, "label", a.mask);
  if (scores.size() != labels_raw.size()) {
    throw rbig::DimensionMismatchError(
        "eval: " + std::to_string(scores.size()) + " scores vs " +
        std::to_string(labels_raw.size()) + " labels");
  }
  std::vector<int> labels(static_cast<std::size_t>(labels_raw.size()));
  for (Index i = 0; i < labels_raw.size(); ++i) {
    labels[static_cast<std::size_t>(i)] = labels_raw[i] != 0.0 ? 1 : 0;
  }
  return {std::move(scores), std::move(labels)};
}

int run_eval(const EvalArgs& a) {
  auto [scores, labels] = load_scores_and_mask(a);

  rbig::RocCurve roc = rbig::roc_curve(scores, labels);
  rbig::PrCurve pr = rbig::precision_recall(scores, labels);

  auto as_vector = [](const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
  };
  Matrix roc_table(static_cast<Index>(roc.thresholds.size()), 3);
  roc_table.col(0) = as_vector(roc.thresholds);
  roc_table.col(1) = as_vector(roc.fpr);
  roc_table.col(2) = as_vector(roc.tpr);
  rbig::write_csv_matrix(a.out_prefix + "roc.csv", roc_table,
                         {"threshold", "fpr", "tpr"});

  Matrix pr_table(static_cast<Index>(pr.thresholds.size()), 3);
  pr_table.col(0) = as_vector(pr.thresholds);
  pr_table.col(1) = as_vector(pr.recall);
  pr_table.col(2) = as_vector(pr.precision);
  rbig::write_csv_matrix(a.out_prefix + "pr.csv", pr_table,
                         {"threshold", "recall", "precision"});

  std::size_t positives = 0;
  for (int y : labels) positives += static_cast<std::size_t>(y);

  json summary;
  summary["n"] = labels.size();
  summary["positives"] = positives;
  summary["negatives"] = labels.size() - positives;
  summary["auc"] = roc.auc;
  summary["average_precision"] = pr.average_precision;
  json partial = json::array();
  for (double cap : a.fpr_caps) {
    rbig::PartialAucResult p = rbig::partial_auc(roc, cap);
    partial.push_back(
        {{"fpr_cap", cap}, {"raw", p.raw}, {"normalized", p.normalized}});
  }
  summary["partial_auc"] = std::move(partial);
  if (a.bootstrap > 0) {
    rbig::RngState rng(a.seed);
    rbig::BootstrapSummary bs =
        rbig::bootstrap_auc(scores, labels, a.bootstrap, rng);
    summary["bootstrap"] = {{"runs", a.bootstrap},   {"seed", a.seed},
                            {"median", bs.median},   {"q025", bs.q025},
                            {"q975", bs.q975},       {"min", bs.min_value},
                            {"max", bs.max_value}};
  }

  std::ofstream js(a.out_prefix + "summary.json");
  if (!js) {
    throw rbig::ParseError("eval: cannot open " + a.out_prefix +
                           "summary.json");
  }
  js << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

struct SynthArgs {
  std::string model;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  rbig::DetectorModel model = rbig::load_model(a.model);
  const auto* density = std::get_if<rbig::GaussianizationModel>(&model);
  if (density == nullptr) {
    throw rbig::InvalidArgumentError(
        "synth: sampling needs a Gaussianization density model, got \"" +
        std::string(rbig::detector_kind_name(model)) + "\"");
  }
  rbig::RngState rng(a.seed);
  Matrix samples = density->sample(static_cast<Index>(a.n), rng);
  std::vector<std::string> columns;
  columns.reserve(static_cast<std::size_t>(samples.cols()));
  for (Index j = 0; j < samples.cols(); ++j) {
    columns.push_back("x" + std::to_string(j));
  }
  rbig::write_csv_matrix(a.out, samples, columns);
  return 0;
}

struct ToyArgs {
  std::string kind;
  std::int64_t n = 5000;
  double anomaly_rate = 0.01;
  std::uint64_t seed = 0;
  std::string out_prefix;
  std::uint32_t width = 250;
  std::uint32_t height = 250;
  std::uint32_t bands = 8;
  double changed_fraction = 0.05;
};

int run_make_toy(const ToyArgs& a) {
  rbig::RngState rng(a.seed);
  json report;
  report["kind"] = a.kind;
  if (a.kind == "cd-pair") {
    rbig::CdPair pair = rbig::make_cd_pair(a.width, a.height, a.bands,
                                           a.changed_fraction, rng);
    rbig::write_raster(pair.before, a.out_prefix + "before.mbrs");
    rbig::write_raster(pair.after, a.out_prefix + "after.mbrs");
    rbig::write_raster(pair.mask, a.out_prefix + "mask.mbrs");
    std::size_t positives = 0;
    for (double v : pair.mask.values) positives += v != 0.0;
    report["files"] = {a.out_prefix + "before.mbrs",
                       a.out_prefix + "after.mbrs",
                       a.out_prefix + "mask.mbrs"};
    report["positives"] = positives;
  } else {
    rbig::ToyData toy = a.kind == "ring"
                            ? rbig::make_ring(static_cast<Index>(a.n),
                                              a.anomaly_rate, rng)
                        : a.kind == "gaussian"
                            ? rbig::make_gaussian(static_cast<Index>(a.n), rng)
                            : rbig::make_mixture(static_cast<Index>(a.n), rng);
    std::vector<std::string> columns;
    for (Index j = 0; j < toy.X.cols(); ++j) {
      columns.push_back("x" + std::to_string(j));
    }
    rbig::write_csv_matrix(a.out_prefix + "data.csv", toy.X, columns);
    Vector labels(toy.X.rows());
    for (Index i = 0; i < labels.size(); ++i) {
      labels[i] = toy.labels[static_cast<std::size_t>(i)];
    }
    rbig::write_csv_matrix(a.out_prefix + "mask.csv", labels, {"label"});
    report["files"] = {a.out_prefix + "data.csv", a.out_prefix + "mask.csv"};
    report["positives"] = static_cast<std::int64_t>(labels.sum());
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative Gaussianization toolkit: density estimation, "
               "anomaly detection, and change detection for multiband data"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "Cap on worker threads (default: RBIG_THREADS or all cores)");

  FitArgs fit;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Fit a detector on CSV or raster data");
  fit_cmd->fallthrough();
  fit_cmd->add_option("--input", fit.input, "Training data (.csv or .mbrs)")
      ->required();
  fit_cmd->add_option("--model-out", fit.model_out, "Model file to write")
      ->required();
  add_method_flags(fit_cmd, fit.method);

  ScoreArgs score;
  CLI::App* score_cmd =
      app.add_subcommand("score", "Score data under a fitted model");
  score_cmd->fallthrough();
  score_cmd->add_option("--model", score.model, "Fitted model file")
      ->required();
  score_cmd->add_option("--input", score.input, "Data to score")->required();
  score_cmd
      ->add_option("--out", score.out,
                   "Scores out; CSV input gives CSV, raster gives a map")
      ->required();

  ChangeArgs change;
  CLI::App* change_cmd = app.add_subcommand(
      "detect-change", "Fit on a before image, score the after image");
  change_cmd->fallthrough();
  change_cmd->add_option("--before", change.before, "Reference image or CSV")
      ->required();
  change_cmd->add_option("--after", change.after, "Test image or CSV")
      ->required();
  change_cmd->add_option("--out", change.out, "Change scores out")->required();
  add_method_flags(change_cmd, change.method);

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "ROC / PR / AUC evaluation of scores against a mask");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--scores", eval.scores, "Score CSV or map")
      ->required();
  eval_cmd->add_option("--mask", eval.mask, "Ground-truth mask")->required();
  eval_cmd
      ->add_option("--out-prefix", eval.out_prefix,
                   "Prefix for roc.csv, pr.csv, summary.json")
      ->required();
  eval_cmd
      ->add_option("--fpr-caps", eval.fpr_caps,
                   "False-positive-rate caps for partial AUC")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd
      ->add_option("--bootstrap", eval.bootstrap,
                   "Bootstrap resamples for the AUC interval; 0 disables")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "Bootstrap seed")
      ->capture_default_str();

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "Draw samples from a fitted Gaussianization density");
  synth_cmd->fallthrough();
  synth_cmd->add_option("--model", synth.model, "Fitted density model")
      ->required();
  synth_cmd->add_option("--n", synth.n, "Number of samples")
      ->check(CLI::NonNegativeNumber)
      ->required();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Sample CSV to write")->required();

  ToyArgs toy;
  CLI::App* toy_cmd =
      app.add_subcommand("make-toy", "Generate a synthetic benchmark dataset");
  toy_cmd->fallthrough();
  toy_cmd->add_option("--kind", toy.kind, "Dataset family")
      ->check(CLI::IsMember({"ring", "gaussian", "mixture", "cd-pair"}))
      ->required();
  toy_cmd->add_option("--n", toy.n, "Sample count (point datasets)")
      ->capture_default_str();
  toy_cmd
      ->add_option("--anomaly-rate", toy.anomaly_rate,
                   "Anomaly fraction (ring)")
      ->capture_default_str();
  toy_cmd->add_option("--seed", toy.seed, "Random seed")
      ->capture_default_str();
  toy_cmd->add_option("--out-prefix", toy.out_prefix, "Prefix for the files")
      ->required();
  toy_cmd->add_option("--width", toy.width, "Image width (cd-pair)")
      ->capture_default_str();
  toy_cmd->add_option("--height", toy.height, "Image height (cd-pair)")
      ->capture_default_str();
  toy_cmd->add_option("--bands", toy.bands, "Band count (cd-pair)")
      ->capture_default_str();
  toy_cmd
      ->add_option("--changed-fraction", toy.changed_fraction,
                   "Changed-pixel fraction (cd-pair)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the error message
    return code == 0 ? 0 : kExitUsage;
  }

  if (threads > 0) rbig::set_max_threads(threads);

  try {
    if (fit_cmd->parsed()) return run_fit(fit);
    if (score_cmd->parsed()) return run_score(score);
    if (change_cmd->parsed()) return run_detect_change(change);
    if (eval_cmd->parsed()) return run_eval(eval);
    if (synth_cmd->parsed()) return run_synth(synth);
    if (toy_cmd->parsed()) return run_make_toy(toy);
  } catch (const rbig::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const rbig::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return 0;
}
