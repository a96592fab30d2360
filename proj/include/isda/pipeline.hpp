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

// Evaluation protocol around the solvers: subclass discovery, kNN scoring,
// stratified splitting, hyperparameter search and the incremental benchmark.

#ifndef ISDA_PIPELINE_HPP_
#define ISDA_PIPELINE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isda/incr_kernel.hpp"
#include "isda/incr_linear.hpp"
#include "isda/sda_batch.hpp"

namespace isda {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

struct KMeansResult {
  Matrix centroids;  // d x z
  std::vector<int> labels;
  int iterations = 0;
};

// Lloyd's algorithm. Initial centroids are z distinct samples drawn with
// `seed`; an emptied cluster is re-seeded at the sample farthest from its
// former centroid. At most 100 iterations.
KMeansResult kmeans(const Matrix& x, int z, std::uint64_t seed);

// Per-class subclass centroids; frozen after discovery.
struct SubclassPartition {
  std::vector<Matrix> centroids;  // indexed by class, d x z_c

  int class_count() const { return static_cast<int>(centroids.size()); }
};

struct SubclassDiscovery {
  SubclassPartition partition;
  std::vector<int> labels;
};

// k-means with z clusters inside every class.
SubclassDiscovery discover_subclasses(const Matrix& x, std::span<const int> class_labels, int z,
                                      std::uint64_t seed);

// Subclass centroids from known labels (the subclass means).
SubclassPartition partition_from_labels(const Matrix& x, std::span<const int> class_labels,
                                         std::span<const int> subclass_labels);

// Nearest centroid of the sample's own class; ties go to the lower index.
std::vector<int> assign_to_centroids(const Matrix& x_new, const SubclassPartition& partition,
                                     std::span<const int> class_labels_new);

// Majority vote of the k nearest training points. Vote ties go to the
// smaller cumulative distance, then to the lower label.
std::vector<int> knn_classify(const Matrix& train, std::span<const int> train_labels,
                              const Matrix& test, int k);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

struct SplitRatios {
  double train = 0.5;
  double validation = 0.3;
  double test = 0.2;
};

struct Split {
  std::vector<Index> train;
  std::vector<Index> validation;
  std::vector<Index> test;
};

// Per-class largest-remainder allocation. Every partition with a positive
// ratio must receive at least one sample of every class (TooFewSamples).
Split stratified_split(std::span<const int> labels, const SplitRatios& ratios, std::uint64_t seed);

enum class BatchScheme : std::uint8_t { kOneSample, kFraction };

enum class Method : std::uint8_t {
  kFastSda,
  kIFastSda,
  kIAFastSda,
  kIFastSdaNB,
  kIAFastSdaNB,
  kFastKsda,
  kIFastKsda,
  kIAFastKsda,
};

std::string_view method_name(Method method);
std::optional<Method> parse_method(std::string_view name);
bool is_kernel_method(Method method);
std::vector<Method> all_methods();

enum class ModelFamily : std::uint8_t { kLinear, kKernel };

struct ExperimentConfig {
  std::vector<double> deltas;
  std::vector<int> subclass_counts;
  int k = 5;
  SplitRatios ratios;
  BatchScheme batch_scheme = BatchScheme::kFraction;
  double batch_fraction = 0.1;
  std::uint64_t seed = 0;
  CenteringMode centering = CenteringMode::kCentered;
  TargetMode target_mode = TargetMode::kExact;
  int repetitions = 5;
  std::vector<Method> methods;

  // Evaluation protocol values: delta in {1e-3, ..., 1e3}, z in 1..5, k = 5,
  // 50/30/20 stratified splits, five repetitions, 10% incremental batch.
  static ExperimentConfig protocol_defaults();

  // Ratios must sum to 1 within 1e-9; the batch fraction must lie in [0, 1)
  // (0 is accepted as the degenerate empty batch).
  void validate() const;
};

struct GridCell {
  double delta = 0.0;
  int subclasses = 0;
  double accuracy = 0.0;
};

struct GridSearchResult {
  double delta = 0.0;
  int subclasses = 0;
  double accuracy = -1.0;
  std::vector<GridCell> cells;  // in evaluation order
};

// Fits on `train`, scores kNN accuracy on `validation`. Ties go to the
// smaller z, then the smaller delta.
GridSearchResult grid_search(const Matrix& x, std::span<const int> labels,
                             std::span<const Index> train, std::span<const Index> validation,
                             const ExperimentConfig& config, ModelFamily family);

// Splits with config.ratios and config.seed, then searches.
GridSearchResult grid_search(const Matrix& x, std::span<const int> labels,
                             const ExperimentConfig& config,
                             ModelFamily family = ModelFamily::kLinear);

struct BenchRow {
  std::string method;
  double accuracy = 0.0;            // mean test accuracy in [0, 1]
  int subclasses = 0;               // z used (most frequent across repetitions)
  double time_seconds = 0.0;        // mean time of the measured phase
  std::optional<std::uint64_t> kernel_evals;
  std::vector<double> run_accuracies;  // one per repetition
};

struct BenchReport {
  std::vector<BenchRow> rows;

  const BenchRow* find(std::string_view method) const;
  // Human-readable table; incremental rows also show the speedup over the
  // matching refit when both were run.
  std::string format_table() const;
  // Columns: method,accuracy,subclasses,time_seconds,kernel_evals
  std::string to_csv() const;
};

// Times only the comparable phase: the incremental step versus a full refit
// on initial + incremental data. Clustering is excluded; kernel refits include
// the kernel matrix. Subclasses of the incremental batch come from the
// initial batch's centroids for every method.
BenchReport bench_incremental(const Matrix& x, std::span<const int> labels,
                              const ExperimentConfig& config);

}  // namespace isda

#endif  // ISDA_PIPELINE_HPP_
