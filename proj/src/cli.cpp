// Copyright 2026 The isda Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "isda/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "isda/archive.hpp"
#include "isda/dataset_io.hpp"
#include "isda/pipeline.hpp"

namespace isda {

namespace {

// Bad flag values detected after parsing; reported with the usage exit code.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FitArgs {
  std::string data;
  std::string model_out;
  bool kernel = false;
  std::optional<double> delta;
  std::optional<int> subclasses;
  bool grid = false;
  std::string centering = "centered";
  std::uint64_t seed = 0;
  bool no_batch = false;
  std::optional<double> sigma;
  bool strip_support = false;
};

struct UpdateArgs {
  std::string model;
  std::string data;
  std::string target_mode = "exact";
  std::string model_out;
};

struct EvalArgs {
  std::string model;
  std::string data;
  std::string train;
  int k = 5;
};

struct BenchArgs {
  std::string data;
  std::string batch = "0.1";
  std::string methods;
  std::optional<double> delta;
  std::optional<int> subclasses;
  bool grid = false;
  int repetitions = 5;
  std::uint64_t seed = 0;
  std::string centering = "centered";
  int k = 5;
  std::string out;
};

struct SynthArgs {
  SynthSpec spec;
  std::string layout = "random";
  std::string out;
};

CenteringMode parse_centering(const std::string& s) {
  if (s == "centered") return CenteringMode::kCentered;
  if (s == "none") return CenteringMode::kNonCentered;
  throw UsageError("--centering must be 'centered' or 'none', got '" + s + "'");
}

TargetMode parse_target_mode(const std::string& s) {
  if (s == "exact") return TargetMode::kExact;
  if (s == "approx") return TargetMode::kApprox;
  throw UsageError("--target-mode must be 'exact' or 'approx', got '" + s + "'");
}

std::vector<Method> parse_methods(const std::string& list) {
  if (list.empty()) return all_methods();
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t comma = list.find(',', start);
    if (comma == std::string::npos) comma = list.size();
    const std::string name = list.substr(start, comma - start);
    if (!name.empty()) {
      const std::optional<Method> m = parse_method(name);
      if (!m) throw UsageError("unknown method '" + name + "'");
      out.push_back(*m);
    }
    start = comma + 1;
  }
  if (out.empty()) throw UsageError("--methods is empty");
  return out;
}

void apply_batch(const std::string& batch, ExperimentConfig& config) {
  if (batch == "one") {
    config.batch_scheme = BatchScheme::kOneSample;
    return;
  }
  double f = 0.0;
  const auto [ptr, ec] = std::from_chars(batch.data(), batch.data() + batch.size(), f);
  if (ec != std::errc() || ptr != batch.data() + batch.size() || !(f >= 0.0 && f < 1.0)) {
    throw UsageError("--batch must be 'one' or a fraction in [0, 1), got '" + batch + "'");
  }
  config.batch_scheme = BatchScheme::kFraction;
  config.batch_fraction = f;
}

std::vector<Membership> zip(const std::vector<int>& classes, const std::vector<int>& subclasses) {
  std::vector<Membership> out(classes.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Membership{classes[i], subclasses[i]};
  return out;
}

std::vector<int> class_labels_of(const TargetMatrix& targets) {
  std::vector<int> out;
  out.reserve(targets.membership.size());
  for (const Membership& m : targets.membership) out.push_back(m.class_label);
  return out;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const CenteringMode centering = parse_centering(a.centering);
  if (a.delta && !(*a.delta > 0.0)) throw UsageError("--delta must be > 0");
  if (a.subclasses && *a.subclasses < 1) throw UsageError("--subclasses must be >= 1");
  if (a.no_batch && a.kernel) throw UsageError("--no-batch applies to linear models only");
  if (a.sigma && !a.kernel) throw UsageError("--sigma applies to kernel models only");
  if (a.strip_support && !a.kernel) throw UsageError("--strip-support applies to kernel models only");

  const DatasetFile data = load_csv_dataset(a.data);
  double delta = a.delta.value_or(1.0);
  std::optional<int> z = a.subclasses;
  if (a.grid) {
    ExperimentConfig config = ExperimentConfig::protocol_defaults();
    config.seed = a.seed;
    config.centering = centering;
    if (a.delta) config.deltas = {*a.delta};
    if (a.subclasses) config.subclass_counts = {*a.subclasses};
    const GridSearchResult best = grid_search(
        data.x, data.class_labels, config, a.kernel ? ModelFamily::kKernel : ModelFamily::kLinear);
    delta = best.delta;
    z = best.subclasses;
    out << "grid: delta=" << delta << " z=" << *z << " validation_accuracy=" << best.accuracy
        << "\n";
  }

  // Subclasses come from the file's subclass column unless a count is
  // requested, in which case they are discovered by k-means.
  SubclassPartition partition;
  std::vector<int> subclasses;
  if (z || !data.subclass_labels) {
    SubclassDiscovery found = discover_subclasses(data.x, data.class_labels, z.value_or(1), a.seed);
    partition = std::move(found.partition);
    subclasses = std::move(found.labels);
  } else {
    subclasses = *data.subclass_labels;
    partition = partition_from_labels(data.x, data.class_labels, subclasses);
  }
  const LabeledDataset ds(data.x, data.class_labels, subclasses);

  ModelArchive archive;
  archive.seed = a.seed;
  archive.partition = std::move(partition);
  if (a.kernel) {
    archive.kind = ModelKind::kKernel;
    archive.kernel = make_kernel_state(ds, a.sigma, delta, centering);
    if (a.strip_support) archive.kernel->model.support.resize(ds.dim(), 0);
    out << "fit: kernel model, N=" << ds.size() << " d=" << ds.dim()
        << " dims=" << archive.kernel->model.a.cols() << " sigma=" << archive.kernel->model.sigma
        << " delta=" << delta << "\n";
  } else {
    archive.kind = ModelKind::kLinear;
    archive.linear =
        make_linear_state(ds, delta, a.no_batch ? StateMode::kNoBatch : StateMode::kWithData);
    out << "fit: linear model, N=" << ds.size() << " d=" << ds.dim()
        << " dims=" << archive.linear->model.w.cols() << " delta=" << delta << "\n";
  }
  save_archive(a.model_out, archive);
  return kExitOk;
}

int cmd_update(const UpdateArgs& a, std::ostream& out) {
  const TargetMode target_mode = parse_target_mode(a.target_mode);
  ModelArchive archive = load_archive(a.model);
  const DatasetFile data = load_csv_dataset(a.data);
  const std::vector<int> subclasses =
      data.subclass_labels ? *data.subclass_labels
                           : assign_to_centroids(data.x, archive.partition, data.class_labels);
  const std::vector<Membership> members = zip(data.class_labels, subclasses);

  if (archive.kind == ModelKind::kKernel) {
    KernelIncrementalState& state = *archive.kernel;
    if (state.model.support.cols() != state.model.a.rows()) {
      throw Error(ErrorCode::kMissingSupport,
                  "kernel archive has no support samples; it cannot be updated");
    }
    KernelUpdate update = incr_fit_kernel(std::move(state), data.x, members, target_mode);
    out << "update: +" << data.size() << " samples, N=" << update.state.model.a.rows()
        << " kernel_evals=" << update.kernel_evaluations << "\n";
    archive.kernel = std::move(update.state);
  } else {
    LinearUpdate update = incr_fit(std::move(*archive.linear), data.x, members, target_mode);
    out << "update: +" << data.size() << " samples, N=" << update.state.stats.count << "\n";
    archive.linear = std::move(update.state);
  }
  archive.default_target_mode = target_mode;
  save_archive(a.model_out, archive);
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const ModelArchive archive = load_archive(a.model);
  const DatasetFile data = load_csv_dataset(a.data);

  // Gallery for the kNN classifier: --train when given, else the samples
  // retained in the archive.
  Matrix gallery;
  std::vector<int> gallery_labels;
  if (!a.train.empty()) {
    const DatasetFile train = load_csv_dataset(a.train);
    gallery = train.x;
    gallery_labels = train.class_labels;
  } else if (archive.kind == ModelKind::kKernel) {
    const KernelExpansionModel& m = archive.kernel->model;
    if (m.support.cols() != m.a.rows()) {
      throw Error(ErrorCode::kMissingSupport, "kernel archive has no support samples");
    }
    gallery = m.support;
    if (m.centering == CenteringMode::kCentered) gallery.colwise() += m.reference_mean;
    gallery_labels = class_labels_of(archive.kernel->targets);
  } else if (archive.linear->mode == StateMode::kWithData) {
    gallery = archive.linear->data;
    gallery_labels = class_labels_of(archive.linear->targets);
  } else {
    throw UsageError("no-batch models keep no training samples; pass --train");
  }

  Matrix p_gallery;
  Matrix p_test;
  if (archive.kind == ModelKind::kKernel) {
    const KernelExpansionModel& m = archive.kernel->model;
    if (m.support.cols() != m.a.rows()) {
      throw Error(ErrorCode::kMissingSupport, "kernel archive has no support samples");
    }
    p_gallery = project_kernel(m, gallery);
    p_test = project_kernel(m, data.x);
  } else {
    p_gallery = project_linear(archive.linear->model, gallery);
    p_test = project_linear(archive.linear->model, data.x);
  }
  const std::vector<int> predicted = knn_classify(p_gallery, gallery_labels, p_test, a.k);
  const double acc = accuracy(predicted, data.class_labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == data.class_labels[i];
  char line[96];
  std::snprintf(line, sizeof line, "accuracy %.6f (%zu/%zu)\n", acc, correct, predicted.size());
  out << line;
  return kExitOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  ExperimentConfig config = ExperimentConfig::protocol_defaults();
  apply_batch(a.batch, config);
  config.methods = parse_methods(a.methods);
  config.centering = parse_centering(a.centering);
  config.seed = a.seed;
  config.repetitions = a.repetitions;
  config.k = a.k;
  if (!a.grid) {
    config.deltas = {a.delta.value_or(1.0)};
    config.subclass_counts = {a.subclasses.value_or(1)};
  } else {
    if (a.delta) config.deltas = {*a.delta};
    if (a.subclasses) config.subclass_counts = {*a.subclasses};
  }
  try {
    config.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const DatasetFile data = load_csv_dataset(a.data);
  const BenchReport report = bench_incremental(data.x, data.class_labels, config);
  out << report.format_table();
  if (!a.out.empty()) {
    std::ofstream csv(a.out, std::ios::binary);
    if (!csv) throw Error(ErrorCode::kIoError, "cannot write " + a.out);
    csv << report.to_csv();
    if (!csv) throw Error(ErrorCode::kIoError, "write failed for " + a.out);
  }
  return kExitOk;
}

int cmd_synth(SynthArgs a, std::ostream& out) {
  if (a.layout == "random") {
    a.spec.layout = SynthLayout::kRandom;
  } else if (a.layout == "interleaved") {
    a.spec.layout = SynthLayout::kInterleaved;
  } else {
    throw UsageError("--layout must be 'random' or 'interleaved', got '" + a.layout + "'");
  }
  if (a.spec.classes < 1 || a.spec.subclasses < 1 || a.spec.dim < 1 || a.spec.per_subclass < 1) {
    throw UsageError("synth counts must be >= 1");
  }
  if (!(a.spec.separation > 0.0)) throw UsageError("--separation must be > 0");
  const DatasetFile data = synth(a.spec);
  if (a.out.empty()) {
    write_csv_dataset(out, data);
  } else {
    save_csv_dataset(a.out, data);
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incremental subclass discriminant analysis", "isda"};
  app.require_subcommand(1);

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a model and write its archive");
  fit_cmd->add_option("--data", fit.data, "Training CSV")->required();
  fit_cmd->add_option("--model-out", fit.model_out, "Output archive")->required();
  fit_cmd->add_flag("--kernel", fit.kernel, "Fit the RBF kernel model");
  fit_cmd->add_option("--delta", fit.delta, "Ridge regularizer (default 1)");
  fit_cmd->add_option("--subclasses", fit.subclasses,
                      "Subclasses per class via k-means (default: the subclass column, else 1)");
  fit_cmd->add_flag("--grid", fit.grid, "Select delta and z by validation grid search");
  fit_cmd->add_option("--centering", fit.centering, "Kernel centering: centered|none");
  fit_cmd->add_option("--seed", fit.seed, "RNG seed");
  fit_cmd->add_flag("--no-batch", fit.no_batch, "Linear state without the raw training data");
  fit_cmd->add_option("--sigma", fit.sigma, "RBF width (default: mean pairwise distance)");
  fit_cmd->add_flag("--strip-support", fit.strip_support, "Drop kernel support samples");

  UpdateArgs update;
  CLI::App* update_cmd = app.add_subcommand("update", "Absorb a new batch into a model");
  update_cmd->add_option("--model", update.model, "Input archive")->required();
  update_cmd->add_option("--data", update.data, "New samples CSV")->required();
  update_cmd->add_option("--target-mode", update.target_mode, "exact|approx (default exact)");
  update_cmd->add_option("--model-out", update.model_out, "Output archive")->required();

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Print kNN accuracy of a model on a dataset");
  eval_cmd->add_option("--model", eval.model, "Archive")->required();
  eval_cmd->add_option("--data", eval.data, "Test CSV")->required();
  eval_cmd->add_option("--train", eval.train, "Gallery CSV (default: samples in the archive)");
  eval_cmd->add_option("--k", eval.k, "Neighbors (default 5)");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Time incremental steps against refits");
  bench_cmd->add_option("--data", bench.data, "Dataset CSV")->required();
  bench_cmd->add_option("--batch", bench.batch, "one|<fraction> (default 0.1)");
  bench_cmd->add_option("--methods", bench.methods, "Comma-separated methods (default all)");
  bench_cmd->add_option("--delta", bench.delta, "Fixed delta");
  bench_cmd->add_option("--subclasses", bench.subclasses, "Fixed z");
  bench_cmd->add_flag("--grid", bench.grid, "Tune delta and z per repetition");
  bench_cmd->add_option("--repetitions", bench.repetitions, "Re-splits (default 5)");
  bench_cmd->add_option("--seed", bench.seed, "RNG seed");
  bench_cmd->add_option("--centering", bench.centering, "Kernel centering: centered|none");
  bench_cmd->add_option("--k", bench.k, "Neighbors (default 5)");
  bench_cmd->add_option("--out", bench.out, "CSV report path");

  SynthArgs synth_args;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate Gaussian subclass blobs");
  synth_cmd->add_option("--classes", synth_args.spec.classes, "Class count")->required();
  synth_cmd->add_option("--subclasses", synth_args.spec.subclasses, "Subclasses per class")
      ->required();
  synth_cmd->add_option("--dim", synth_args.spec.dim, "Feature dimension")->required();
  synth_cmd->add_option("--per-subclass", synth_args.spec.per_subclass, "Samples per subclass")
      ->required();
  synth_cmd->add_option("--separation", synth_args.spec.separation, "Radius of subclass means")
      ->required();
  synth_cmd->add_option("--seed", synth_args.spec.seed, "RNG seed");
  synth_cmd->add_option("--layout", synth_args.layout, "random|interleaved");
  synth_cmd->add_option("--out", synth_args.out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out);
    if (update_cmd->parsed()) return cmd_update(update, out);
    if (eval_cmd->parsed()) return cmd_eval(eval, out);
    if (bench_cmd->parsed()) return cmd_bench(bench, out);
    if (synth_cmd->parsed()) return cmd_synth(synth_args, out);
  } catch (const UsageError& e) {
    err << "isda: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "isda: error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace isda
