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

#include "isda/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace isda {

namespace {

constexpr int kMaxKMeansIterations = 100;

Matrix gather_columns(const Matrix& x, std::span<const Index> idx) {
  Matrix out(x.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = x.col(idx[j]);
  return out;
}

std::vector<int> gather_labels(std::span<const int> labels, std::span<const Index> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (Index i : idx) out.push_back(labels[static_cast<std::size_t>(i)]);
  return out;
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

template <typename T>
std::vector<T> concat(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<Membership> zip_memberships(std::span<const int> classes,
                                        std::span<const int> subclasses) {
  std::vector<Membership> out(classes.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Membership{classes[i], subclasses[i]};
  return out;
}

// Returns true when any label changed.
bool assign_nearest(const Matrix& x, const Matrix& centroids, std::vector<int>& labels) {
  bool changed = false;
  for (Index i = 0; i < x.cols(); ++i) {
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centroids.cols(); ++c) {
      const double dist = (x.col(i) - centroids.col(c)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = static_cast<int>(c);
      }
    }
    if (labels[static_cast<std::size_t>(i)] != best) {
      labels[static_cast<std::size_t>(i)] = best;
      changed = true;
    }
  }
  return changed;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

KMeansResult kmeans(const Matrix& x, int z, std::uint64_t seed) {
  const Index n = x.cols();
  if (z < 1 || n < z) {
    throw Error(ErrorCode::kTooFewSamples, "k-means needs at least z=" + std::to_string(z) +
                                               " samples, got " + std::to_string(n));
  }
  std::mt19937_64 rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  KMeansResult result;
  result.centroids.resize(x.rows(), z);
  for (int c = 0; c < z; ++c) result.centroids.col(c) = x.col(order[static_cast<std::size_t>(c)]);
  result.labels.assign(static_cast<std::size_t>(n), -1);

  bool converged = false;
  for (int iter = 0; iter < kMaxKMeansIterations; ++iter) {
    result.iterations = iter + 1;
    if (!assign_nearest(x, result.centroids, result.labels)) {
      converged = true;
      break;
    }
    Matrix sums = Matrix::Zero(x.rows(), z);
    std::vector<Index> counts(static_cast<std::size_t>(z), 0);
    for (Index i = 0; i < n; ++i) {
      const int c = result.labels[static_cast<std::size_t>(i)];
      sums.col(c) += x.col(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < z; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        result.centroids.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      Index farthest = 0;
      double far_dist = -1.0;
      for (Index i = 0; i < n; ++i) {
        const double dist = (x.col(i) - result.centroids.col(c)).squaredNorm();
        if (dist > far_dist) {
          far_dist = dist;
          farthest = i;
        }
      }
      result.centroids.col(c) = x.col(farthest);
    }
  }
  if (!converged) assign_nearest(x, result.centroids, result.labels);
  return result;
}

SubclassDiscovery discover_subclasses(const Matrix& x, std::span<const int> class_labels, int z,
                                      std::uint64_t seed) {
  if (static_cast<Index>(class_labels.size()) != x.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "one class label per sample is required");
  }
  const int classes =
      class_labels.empty() ? 0 : *std::max_element(class_labels.begin(), class_labels.end()) + 1;
  SubclassDiscovery out;
  out.partition.centroids.resize(static_cast<std::size_t>(classes));
  out.labels.assign(class_labels.size(), 0);
  for (int c = 0; c < classes; ++c) {
    std::vector<Index> idx;
    for (std::size_t i = 0; i < class_labels.size(); ++i) {
      if (class_labels[i] == c) idx.push_back(static_cast<Index>(i));
    }
    if (static_cast<Index>(idx.size()) < z) {
      throw Error(ErrorCode::kTooFewSamples, "class " + std::to_string(c) + " has " +
                                                 std::to_string(idx.size()) +
                                                 " samples, fewer than z=" + std::to_string(z));
    }
    KMeansResult km = kmeans(gather_columns(x, idx), z, mix_seed(seed, static_cast<std::uint64_t>(c)));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      out.labels[static_cast<std::size_t>(idx[j])] = km.labels[j];
    }
    out.partition.centroids[static_cast<std::size_t>(c)] = std::move(km.centroids);
  }
  return out;
}

SubclassPartition partition_from_labels(const Matrix& x, std::span<const int> class_labels,
                                        std::span<const int> subclass_labels) {
  const std::vector<Membership> members = zip_memberships(class_labels, subclass_labels);
  const CellLayout layout = make_cell_layout(members);
  SubclassPartition partition;
  partition.centroids.resize(static_cast<std::size_t>(layout.class_count));
  std::vector<int> z(static_cast<std::size_t>(layout.class_count), 0);
  for (const Membership& cell : layout.cells) {
    z[static_cast<std::size_t>(cell.class_label)] =
        std::max(z[static_cast<std::size_t>(cell.class_label)], cell.subclass_label + 1);
  }
  for (int c = 0; c < layout.class_count; ++c) {
    partition.centroids[static_cast<std::size_t>(c)] = Matrix::Zero(x.rows(), z[static_cast<std::size_t>(c)]);
  }
  for (Index i = 0; i < x.cols(); ++i) {
    const Membership& m = members[static_cast<std::size_t>(i)];
    partition.centroids[static_cast<std::size_t>(m.class_label)].col(m.subclass_label) += x.col(i);
  }
  for (Index a = 0; a < layout.size(); ++a) {
    const Membership& cell = layout.cells[static_cast<std::size_t>(a)];
    partition.centroids[static_cast<std::size_t>(cell.class_label)].col(cell.subclass_label) /=
        static_cast<double>(layout.counts[static_cast<std::size_t>(a)]);
  }
  return partition;
}

std::vector<int> assign_to_centroids(const Matrix& x_new, const SubclassPartition& partition,
                                     std::span<const int> class_labels_new) {
  if (static_cast<Index>(class_labels_new.size()) != x_new.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "one class label per sample is required");
  }
  std::vector<int> out(class_labels_new.size(), 0);
  for (Index i = 0; i < x_new.cols(); ++i) {
    const int c = class_labels_new[static_cast<std::size_t>(i)];
    if (c < 0 || c >= partition.class_count() ||
        partition.centroids[static_cast<std::size_t>(c)].cols() == 0) {
      throw Error(ErrorCode::kUnknownClass, "class " + std::to_string(c) + " has no centroids");
    }
    const Matrix& centroids = partition.centroids[static_cast<std::size_t>(c)];
    if (centroids.rows() != x_new.rows()) {
      throw Error(ErrorCode::kDimensionMismatch, "centroid dimension differs from the data");
    }
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index s = 0; s < centroids.cols(); ++s) {
      const double dist = (x_new.col(i) - centroids.col(s)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        out[static_cast<std::size_t>(i)] = static_cast<int>(s);
      }
    }
  }
  return out;
}

std::vector<int> knn_classify(const Matrix& train, std::span<const int> train_labels,
                              const Matrix& test, int k) {
  if (train.rows() != test.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "train and test live in different spaces");
  }
  if (static_cast<Index>(train_labels.size()) != train.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "one label per training sample is required");
  }
  if (k < 1 || k > train.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "k must lie in [1, number of training samples]");
  }
  const Index n = train.cols();
  std::vector<int> predicted(static_cast<std::size_t>(test.cols()));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Index q = 0; q < test.cols(); ++q) {
    for (Index i = 0; i < n; ++i) {
      dist[static_cast<std::size_t>(i)] = (train.col(i) - test.col(q)).norm();
    }
    std::iota(order.begin(), order.end(), Index{0});
    const auto closer = [&](Index a, Index b) {
      const double da = dist[static_cast<std::size_t>(a)];
      const double db = dist[static_cast<std::size_t>(b)];
      if (da != db) return da < db;
      const int la = train_labels[static_cast<std::size_t>(a)];
      const int lb = train_labels[static_cast<std::size_t>(b)];
      if (la != lb) return la < lb;
      return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);
    std::map<int, std::pair<int, double>> votes;  // label -> (count, cumulative distance)
    for (int j = 0; j < k; ++j) {
      const Index i = order[static_cast<std::size_t>(j)];
      auto& [count, cumulative] = votes[train_labels[static_cast<std::size_t>(i)]];
      ++count;
      cumulative += dist[static_cast<std::size_t>(i)];
    }
    int best_label = votes.begin()->first;
    auto best = votes.begin()->second;
    for (const auto& [label, vote] : votes) {
      if (vote.first > best.first || (vote.first == best.first && vote.second < best.second)) {
        best = vote;
        best_label = label;
      }
    }
    predicted[static_cast<std::size_t>(q)] = best_label;
  }
  return predicted;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "prediction and truth lengths differ");
  }
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

Split stratified_split(std::span<const int> labels, const SplitRatios& ratios, std::uint64_t seed) {
  const std::array<double, 3> r{ratios.train, ratios.validation, ratios.test};
  for (double v : r) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "split ratios must be >= 0");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split ratios must sum to 1");
  }
  std::map<int, std::vector<Index>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<Index>(i));

  std::mt19937_64 rng(seed);
  Split split;
  std::array<std::vector<Index>*, 3> parts{&split.train, &split.validation, &split.test};
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n = static_cast<double>(idx.size());
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> remainders{};
    std::size_t assigned = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      const double exact = r[p] * n;
      counts[p] = static_cast<std::size_t>(std::floor(exact + 1e-9));
      remainders[p] = exact - static_cast<double>(counts[p]);
      assigned += counts[p];
    }
    while (assigned < idx.size()) {
      std::size_t best = 0;
      for (std::size_t p = 1; p < 3; ++p) {
        if (remainders[p] > remainders[best]) best = p;
      }
      ++counts[best];
      remainders[best] = -1.0;
      ++assigned;
    }
    for (std::size_t p = 0; p < 3; ++p) {
      if (r[p] > 0.0 && counts[p] == 0) {
        throw Error(ErrorCode::kTooFewSamples,
                    "class " + std::to_string(label) + " has too few samples for every split");
      }
    }
    std::size_t offset = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      parts[p]->insert(parts[p]->end(), idx.begin() + static_cast<std::ptrdiff_t>(offset),
                       idx.begin() + static_cast<std::ptrdiff_t>(offset + counts[p]));
      offset += counts[p];
    }
  }
  for (auto* part : parts) std::sort(part->begin(), part->end());
  return split;
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kFastSda: return "fastSDA";
    case Method::kIFastSda: return "I-fastSDA";
    case Method::kIAFastSda: return "IA-fastSDA";
    case Method::kIFastSdaNB: return "I-fastSDA-NB";
    case Method::kIAFastSdaNB: return "IA-fastSDA-NB";
    case Method::kFastKsda: return "fastKSDA";
    case Method::kIFastKsda: return "I-fastKSDA";
    case Method::kIAFastKsda: return "IA-fastKSDA";
  }
  return "?";
}

std::vector<Method> all_methods() {
  return {Method::kFastSda,   Method::kIFastSda,  Method::kIAFastSda,  Method::kIFastSdaNB,
          Method::kIAFastSdaNB, Method::kFastKsda, Method::kIFastKsda, Method::kIAFastKsda};
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : all_methods()) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

bool is_kernel_method(Method method) {
  return method == Method::kFastKsda || method == Method::kIFastKsda ||
         method == Method::kIAFastKsda;
}

ExperimentConfig ExperimentConfig::protocol_defaults() {
  ExperimentConfig config;
  config.deltas = {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0};
  config.subclass_counts = {1, 2, 3, 4, 5};
  config.k = 5;
  config.ratios = SplitRatios{0.5, 0.3, 0.2};
  config.batch_scheme = BatchScheme::kFraction;
  config.batch_fraction = 0.1;
  config.repetitions = 5;
  config.methods = all_methods();
  return config;
}

void ExperimentConfig::validate() const {
  if (deltas.empty() || subclass_counts.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "delta and subclass grids must be non-empty");
  }
  for (double d : deltas) {
    if (!(d >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "regularizers must be >= 0");
  }
  for (int z : subclass_counts) {
    if (z < 1) throw Error(ErrorCode::kInvalidArgument, "subclass counts must be >= 1");
  }
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split ratios must sum to 1");
  }
  if (batch_scheme == BatchScheme::kFraction && !(batch_fraction >= 0.0 && batch_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "batch fraction must lie in [0, 1)");
  }
  if (repetitions < 1) throw Error(ErrorCode::kInvalidArgument, "repetitions must be >= 1");
}

GridSearchResult grid_search(const Matrix& x, std::span<const int> labels,
                             std::span<const Index> train, std::span<const Index> validation,
                             const ExperimentConfig& config, ModelFamily family) {
  config.validate();
  const Matrix x_train = gather_columns(x, train);
  const Matrix x_val = gather_columns(x, validation);
  const std::vector<int> y_train = gather_labels(labels, train);
  const std::vector<int> y_val = gather_labels(labels, validation);

  std::vector<int> zs = config.subclass_counts;
  std::vector<double> deltas = config.deltas;
  std::sort(zs.begin(), zs.end());
  zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
  std::sort(deltas.begin(), deltas.end());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());

  const double sigma = family == ModelFamily::kKernel ? mean_distance_sigma(x_train) : 0.0;
  GridSearchResult result;
  for (int z : zs) {
    const SubclassDiscovery found = discover_subclasses(x_train, y_train, z, config.seed);
    const LabeledDataset ds(x_train, y_train, found.labels);
    for (double delta : deltas) {
      Matrix p_train;
      Matrix p_val;
      if (family == ModelFamily::kLinear) {
        const LinearProjectionModel model = fit_fast_sda(ds, delta);
        p_train = project_linear(model, x_train);
        p_val = project_linear(model, x_val);
      } else {
        const KernelExpansionModel model = fit_fast_ksda(ds, sigma, delta, config.centering);
        p_train = project_kernel(model, x_train);
        p_val = project_kernel(model, x_val);
      }
      const double acc = accuracy(knn_classify(p_train, y_train, p_val, config.k), y_val);
      result.cells.push_back(GridCell{delta, z, acc});
      if (acc > result.accuracy) {
        result.accuracy = acc;
        result.delta = delta;
        result.subclasses = z;
      }
    }
  }
  return result;
}

GridSearchResult grid_search(const Matrix& x, std::span<const int> labels,
                             const ExperimentConfig& config, ModelFamily family) {
  const Split split = stratified_split(labels, config.ratios, config.seed);
  return grid_search(x, labels, split.train, split.validation, config, family);
}

const BenchRow* BenchReport::find(std::string_view method) const {
  for (const BenchRow& row : rows) {
    if (row.method == method) return &row;
  }
  return nullptr;
}

std::string BenchReport::format_table() const {
  const BenchRow* linear_ref = find(method_name(Method::kFastSda));
  const BenchRow* kernel_ref = find(method_name(Method::kFastKsda));
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %9s %4s %12s %9s %14s\n", "method", "accuracy", "z",
                "time_s", "speedup", "kernel_evals");
  out << line;
  for (const BenchRow& row : rows) {
    const auto method = parse_method(row.method);
    const BenchRow* ref = method && is_kernel_method(*method) ? kernel_ref : linear_ref;
    char speedup[32] = "-";
    if (ref != nullptr && ref != &row && row.time_seconds > 0.0) {
      std::snprintf(speedup, sizeof speedup, "%.1fx", ref->time_seconds / row.time_seconds);
    }
    const std::string evals = row.kernel_evals ? std::to_string(*row.kernel_evals) : "-";
    std::snprintf(line, sizeof line, "%-16s %8.1f%% %4d %12.6f %9s %14s\n", row.method.c_str(),
                  100.0 * row.accuracy, row.subclasses, row.time_seconds, speedup, evals.c_str());
    out << line;
  }
  return out.str();
}

std::string BenchReport::to_csv() const {
  std::ostringstream out;
  out << "method,accuracy,subclasses,time_seconds,kernel_evals\n";
  char line[256];
  for (const BenchRow& row : rows) {
    const std::string evals = row.kernel_evals ? std::to_string(*row.kernel_evals) : "";
    std::snprintf(line, sizeof line, "%s,%.6f,%d,%.9f,%s\n", row.method.c_str(), row.accuracy,
                  row.subclasses, row.time_seconds, evals.c_str());
    out << line;
  }
  return out.str();
}

namespace {

struct FamilyChoice {
  double delta = 0.0;
  int z = 1;
};

FamilyChoice choose_hyperparameters(const Matrix& x, std::span<const int> labels,
                                    const Split& split, const ExperimentConfig& config,
                                    std::uint64_t seed, ModelFamily family) {
  if (config.deltas.size() == 1 && config.subclass_counts.size() == 1) {
    return FamilyChoice{config.deltas.front(), config.subclass_counts.front()};
  }
  ExperimentConfig tuned = config;
  tuned.seed = seed;
  const GridSearchResult best = grid_search(x, labels, split.train, split.validation, tuned, family);
  return FamilyChoice{best.delta, best.subclasses};
}

struct RunResult {
  double accuracy = 0.0;
  double seconds = 0.0;
  std::optional<std::uint64_t> kernel_evals;
  int z = 0;
};

}  // namespace

BenchReport bench_incremental(const Matrix& x, std::span<const int> labels,
                              const ExperimentConfig& config) {
  config.validate();
  if (static_cast<Index>(labels.size()) != x.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "one class label per sample is required");
  }
  std::map<Method, std::vector<RunResult>> runs;
  const bool want_linear = std::any_of(config.methods.begin(), config.methods.end(),
                                       [](Method m) { return !is_kernel_method(m); });
  const bool want_kernel = std::any_of(config.methods.begin(), config.methods.end(),
                                       [](Method m) { return is_kernel_method(m); });

  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t rep_seed = mix_seed(config.seed, static_cast<std::uint64_t>(rep));
    const Split split = stratified_split(labels, config.ratios, rep_seed);

    std::vector<Index> train = split.train;
    std::mt19937_64 rng(mix_seed(rep_seed, 1));
    std::shuffle(train.begin(), train.end(), rng);
    const auto n_train = static_cast<Index>(train.size());
    const Index m = config.batch_scheme == BatchScheme::kOneSample
                        ? 1
                        : static_cast<Index>(std::llround(config.batch_fraction *
                                                          static_cast<double>(n_train)));
    if (m >= n_train) {
      throw Error(ErrorCode::kTooFewSamples, "incremental batch leaves no initial batch");
    }
    const std::span<const Index> initial_idx(train.data(), static_cast<std::size_t>(n_train - m));
    const std::span<const Index> batch_idx(train.data() + (n_train - m), static_cast<std::size_t>(m));

    const Matrix x_init = gather_columns(x, initial_idx);
    const Matrix x_batch = gather_columns(x, batch_idx);
    const Matrix x_all = hconcat(x_init, x_batch);
    const Matrix x_test = gather_columns(x, split.test);
    const std::vector<int> y_init = gather_labels(labels, initial_idx);
    const std::vector<int> y_batch = gather_labels(labels, batch_idx);
    const std::vector<int> y_all = concat(y_init, y_batch);
    const std::vector<int> y_test = gather_labels(labels, split.test);

    const auto score = [&](const Matrix& gallery, const Matrix& probes) {
      return accuracy(knn_classify(gallery, y_all, probes, config.k), y_test);
    };

    for (ModelFamily family : {ModelFamily::kLinear, ModelFamily::kKernel}) {
      if (family == ModelFamily::kLinear && !want_linear) continue;
      if (family == ModelFamily::kKernel && !want_kernel) continue;
      const FamilyChoice choice =
          choose_hyperparameters(x, labels, split, config, mix_seed(rep_seed, 2), family);
      const SubclassDiscovery found =
          discover_subclasses(x_init, y_init, choice.z, mix_seed(rep_seed, 3));
      const std::vector<int> sub_batch = assign_to_centroids(x_batch, found.partition, y_batch);
      const std::vector<Membership> batch_members = zip_memberships(y_batch, sub_batch);
      const LabeledDataset ds_init(x_init, y_init, found.labels);
      const LabeledDataset ds_all(x_all, y_all, concat(found.labels, sub_batch));
      const double sigma = family == ModelFamily::kKernel ? mean_distance_sigma(x_init) : 0.0;

      for (Method method : config.methods) {
        if (is_kernel_method(method) != (family == ModelFamily::kKernel)) continue;
        RunResult run;
        run.z = choice.z;
        switch (method) {
          case Method::kFastSda: {
            const auto start = Clock::now();
            const LinearProjectionModel model = fit_fast_sda(ds_all, choice.delta);
            run.seconds = seconds_since(start);
            run.accuracy = score(project_linear(model, x_all), project_linear(model, x_test));
            break;
          }
          case Method::kIFastSda:
          case Method::kIAFastSda:
          case Method::kIFastSdaNB:
          case Method::kIAFastSdaNB: {
            const bool no_batch = method == Method::kIFastSdaNB || method == Method::kIAFastSdaNB;
            const bool approx = method == Method::kIAFastSda || method == Method::kIAFastSdaNB;
            LinearIncrementalState state = make_linear_state(
                ds_init, choice.delta, no_batch ? StateMode::kNoBatch : StateMode::kWithData);
            const auto start = Clock::now();
            LinearUpdate update = incr_fit(std::move(state), x_batch, batch_members,
                                           approx ? TargetMode::kApprox : TargetMode::kExact);
            run.seconds = seconds_since(start);
            run.accuracy =
                score(project_linear(update.model, x_all), project_linear(update.model, x_test));
            break;
          }
          case Method::kFastKsda: {
            const auto start = Clock::now();
            const KernelFit fit = fit_fast_ksda_full(ds_all, sigma, choice.delta, config.centering);
            run.seconds = seconds_since(start);
            run.kernel_evals = fit.kernel_evaluations;
            run.accuracy =
                score(project_kernel(fit.model, x_all), project_kernel(fit.model, x_test));
            break;
          }
          case Method::kIFastKsda:
          case Method::kIAFastKsda: {
            KernelIncrementalState state =
                make_kernel_state(ds_init, sigma, choice.delta, config.centering);
            const auto start = Clock::now();
            KernelUpdate update =
                incr_fit_kernel(std::move(state), x_batch, batch_members,
                                method == Method::kIAFastKsda ? TargetMode::kApprox
                                                              : TargetMode::kExact);
            run.seconds = seconds_since(start);
            run.kernel_evals = update.kernel_evaluations;
            run.accuracy =
                score(project_kernel(update.model, x_all), project_kernel(update.model, x_test));
            break;
          }
        }
        runs[method].push_back(run);
      }
    }
  }

  BenchReport report;
  for (Method method : config.methods) {
    const std::vector<RunResult>& rs = runs[method];
    if (rs.empty()) continue;
    BenchRow row;
    row.method = std::string(method_name(method));
    std::map<int, int> z_votes;
    double evals = 0.0;
    for (const RunResult& r : rs) {
      row.accuracy += r.accuracy;
      row.time_seconds += r.seconds;
      row.run_accuracies.push_back(r.accuracy);
      ++z_votes[r.z];
      if (r.kernel_evals) evals += static_cast<double>(*r.kernel_evals);
    }
    row.accuracy /= static_cast<double>(rs.size());
    row.time_seconds /= static_cast<double>(rs.size());
    int best_votes = 0;
    for (const auto& [z, votes] : z_votes) {
      if (votes > best_votes) {
        best_votes = votes;
        row.subclasses = z;
      }
    }
    if (rs.front().kernel_evals) {
      row.kernel_evals = static_cast<std::uint64_t>(std::llround(evals / static_cast<double>(rs.size())));
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace isda
