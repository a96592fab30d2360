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

// CSV datasets: header `feat_0,...,feat_{d-1},class[,subclass]`, one sample
// per row.

#ifndef ISDA_DATASET_IO_HPP_
#define ISDA_DATASET_IO_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "isda/sda_batch.hpp"

namespace isda {

struct DatasetFile {
  Matrix x;  // d x N, row order of the file preserved as column order
  std::vector<int> class_labels;
  std::optional<std::vector<int>> subclass_labels;

  Index size() const { return x.cols(); }
  // Missing subclass column means one subclass per class.
  LabeledDataset labeled() const;
};

DatasetFile parse_csv_dataset(std::istream& in);
DatasetFile load_csv_dataset(const std::string& path);

void write_csv_dataset(std::ostream& out, const DatasetFile& data);
void save_csv_dataset(const std::string& path, const DatasetFile& data);

enum class SynthLayout : std::uint8_t {
  kRandom,       // every subclass mean uniform on the sphere
  kInterleaved,  // subclass means of a class come in antipodal pairs (+v, -v),
                 // so with even z every class mean sits near the origin
};

struct SynthSpec {
  int classes = 2;
  int subclasses = 1;
  int dim = 2;
  int per_subclass = 50;
  double separation = 10.0;
  std::uint64_t seed = 0;
  SynthLayout layout = SynthLayout::kRandom;
};

// Unit-covariance Gaussian blobs with means at radius `separation`; rows are
// ordered class-major, then subclass. Deterministic per seed.
DatasetFile synth(const SynthSpec& spec);

}  // namespace isda

#endif  // ISDA_DATASET_IO_HPP_
