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

// Versioned binary model archive.
//
// Layout: the magic bytes "ISDA", a format-version byte, a kind byte
// (0 linear, 1 kernel), then the payload. All integers are little-endian
// (u8/i32/u64), reals are little-endian IEEE-754 binary64, so matrices
// round-trip bit-exactly. A matrix is u64 rows, u64 cols, then rows*cols
// reals in column-major order; a vector is u64 length then its reals.
//
// Payload, common prefix:
//   u64 seed, u8 default target mode, partition (u64 classes, one matrix of
//   centroids per class), memberships (u64 count, count x (i32 class,
//   i32 subclass)), target matrix T.
// Linear payload:
//   u8 state mode, f64 delta, u64 N_t, vector mu_t, matrix W, vector mean,
//   matrix P, matrix H (0x0 unless no-batch), matrix X_t (0x0 in no-batch).
// Kernel payload:
//   u8 centering, f64 sigma, f64 delta, u64 kernel evaluations, matrix A,
//   matrix support (0 columns when stripped), vector reference mean, matrix R.

#ifndef ISDA_ARCHIVE_HPP_
#define ISDA_ARCHIVE_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "isda/incr_kernel.hpp"
#include "isda/incr_linear.hpp"
#include "isda/pipeline.hpp"

namespace isda {

inline constexpr std::uint8_t kArchiveVersion = 1;

enum class ModelKind : std::uint8_t { kLinear = 0, kKernel = 1 };

struct ModelArchive {
  ModelKind kind = ModelKind::kLinear;
  std::uint64_t seed = 0;
  TargetMode default_target_mode = TargetMode::kExact;
  SubclassPartition partition;
  std::optional<LinearIncrementalState> linear;
  std::optional<KernelIncrementalState> kernel;
};

std::string encode_archive(const ModelArchive& archive);
ModelArchive decode_archive(const std::string& bytes);

void save_archive(const std::string& path, const ModelArchive& archive);
ModelArchive load_archive(const std::string& path);

}  // namespace isda

#endif  // ISDA_ARCHIVE_HPP_
