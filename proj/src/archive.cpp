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

#include "isda/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace isda {

namespace {

constexpr char kMagic[4] = {'I', 'S', 'D', 'A'};
// Guards against absurd sizes in corrupted files before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

template <typename U>
U to_little_endian(U v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out = static_cast<U>((out << 8) | ((v >> (8 * i)) & 0xFF));
    }
    return out;
  }
}

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u64(std::uint64_t v) { raw(to_little_endian(v)); }
  void i32(std::int32_t v) { raw(to_little_endian(static_cast<std::uint32_t>(v))); }
  void f64(double v) { raw(to_little_endian(std::bit_cast<std::uint64_t>(v))); }

  void vector(const Vector& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i) f64(v(i));
  }

  void matrix(const Matrix& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    const double* data = m.data();
    for (Index i = 0; i < m.size(); ++i) f64(data[i]);
  }

  void bytes(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  template <typename U>
  void raw(U v) {
    char buf[sizeof(U)];
    std::memcpy(buf, &v, sizeof(U));
    out_.append(buf, sizeof(U));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint64_t u64() { return to_little_endian(raw<std::uint64_t>()); }
  std::int32_t i32() { return static_cast<std::int32_t>(to_little_endian(raw<std::uint32_t>())); }
  double f64() { return std::bit_cast<double>(to_little_endian(raw<std::uint64_t>())); }

  Vector vector() {
    const std::uint64_t n = u64();
    check_size(n);
    Vector v(static_cast<Index>(n));
    for (Index i = 0; i < v.size(); ++i) v(i) = f64();
    return v;
  }

  Matrix matrix() {
    const std::uint64_t rows = u64();
    const std::uint64_t cols = u64();
    if (rows > kMaxElements || cols > kMaxElements) fail("matrix shape out of range");
    check_size(rows * cols);
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    double* data = m.data();
    for (Index i = 0; i < m.size(); ++i) data[i] = f64();
    return m;
  }

  void expect(const char* p, std::size_t n) {
    need(n);
    if (in_.compare(pos_, n, p, n) != 0) fail("bad magic bytes");
    pos_ += n;
  }

  bool done() const { return pos_ == in_.size(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kArchiveFormat, what + " at byte " + std::to_string(pos_));
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) fail("truncated archive");
  }
  void check_size(std::uint64_t n) const {
    if (n > kMaxElements || n * 8 > in_.size() - pos_) fail("element count exceeds archive size");
  }
  template <typename U>
  U raw() {
    need(sizeof(U));
    U v;
    std::memcpy(&v, in_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }

  const std::string& in_;
  std::size_t pos_ = 0;
};

void write_targets(Writer& w, const TargetMatrix& targets) {
  w.u64(targets.membership.size());
  for (const Membership& m : targets.membership) {
    w.i32(m.class_label);
    w.i32(m.subclass_label);
  }
  w.matrix(targets.t);
}

TargetMatrix read_targets(Reader& r) {
  TargetMatrix targets;
  const std::uint64_t n = r.u64();
  if (n > kMaxElements) r.fail("membership count out of range");
  targets.membership.resize(static_cast<std::size_t>(n));
  for (Membership& m : targets.membership) {
    m.class_label = r.i32();
    m.subclass_label = r.i32();
  }
  targets.t = r.matrix();
  if (static_cast<std::uint64_t>(targets.t.cols()) != n) r.fail("target matrix width mismatch");
  return targets;
}

template <typename E>
E read_enum(Reader& r, std::uint8_t max) {
  const std::uint8_t v = r.u8();
  if (v > max) r.fail("enum value out of range");
  return static_cast<E>(v);
}

}  // namespace

std::string encode_archive(const ModelArchive& archive) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u8(kArchiveVersion);
  w.u8(static_cast<std::uint8_t>(archive.kind));
  w.u64(archive.seed);
  w.u8(static_cast<std::uint8_t>(archive.default_target_mode));
  w.u64(archive.partition.centroids.size());
  for (const Matrix& c : archive.partition.centroids) w.matrix(c);

  if (archive.kind == ModelKind::kLinear) {
    if (!archive.linear) throw Error(ErrorCode::kInvalidArgument, "linear archive without state");
    const LinearIncrementalState& s = *archive.linear;
    write_targets(w, s.targets);
    w.u8(static_cast<std::uint8_t>(s.mode));
    w.f64(s.delta);
    w.u64(static_cast<std::uint64_t>(s.stats.count));
    w.vector(s.stats.mean);
    w.matrix(s.model.w);
    w.vector(s.model.mean);
    w.matrix(s.gram_inverse);
    w.matrix(s.hat);
    w.matrix(s.data);
  } else {
    if (!archive.kernel) throw Error(ErrorCode::kInvalidArgument, "kernel archive without state");
    const KernelIncrementalState& s = *archive.kernel;
    write_targets(w, s.targets);
    w.u8(static_cast<std::uint8_t>(s.model.centering));
    w.f64(s.model.sigma);
    w.f64(s.model.delta);
    w.u64(s.kernel_evaluations);
    w.matrix(s.model.a);
    w.matrix(s.model.support);
    w.vector(s.model.reference_mean);
    w.matrix(s.factor.matrix());
  }
  return w.take();
}

ModelArchive decode_archive(const std::string& bytes) {
  Reader r(bytes);
  r.expect(kMagic, sizeof kMagic);
  const std::uint8_t version = r.u8();
  if (version != kArchiveVersion) {
    r.fail("unsupported archive version " + std::to_string(version));
  }
  ModelArchive archive;
  archive.kind = read_enum<ModelKind>(r, 1);
  archive.seed = r.u64();
  archive.default_target_mode = read_enum<TargetMode>(r, 1);
  const std::uint64_t classes = r.u64();
  if (classes > kMaxElements) r.fail("class count out of range");
  for (std::uint64_t c = 0; c < classes; ++c) archive.partition.centroids.push_back(r.matrix());

  if (archive.kind == ModelKind::kLinear) {
    LinearIncrementalState s;
    s.targets = read_targets(r);
    s.mode = read_enum<StateMode>(r, 1);
    s.delta = r.f64();
    s.stats.count = static_cast<Index>(r.u64());
    s.stats.mean = r.vector();
    s.model.w = r.matrix();
    s.model.mean = r.vector();
    s.model.delta = s.delta;
    s.gram_inverse = r.matrix();
    s.hat = r.matrix();
    s.data = r.matrix();
    archive.linear = std::move(s);
  } else {
    KernelIncrementalState s;
    s.targets = read_targets(r);
    s.model.centering = read_enum<CenteringMode>(r, 1);
    s.model.sigma = r.f64();
    s.model.delta = r.f64();
    s.kernel_evaluations = r.u64();
    s.model.a = r.matrix();
    s.model.support = r.matrix();
    s.model.reference_mean = r.vector();
    try {
      s.factor = UpperTriangular::from_factor(r.matrix());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kArchiveFormat) throw;
      r.fail(std::string("invalid Cholesky factor: ") + e.what());
    }
    archive.kernel = std::move(s);
  }
  if (!r.done()) r.fail("trailing bytes");
  return archive;
}

void save_archive(const std::string& path, const ModelArchive& archive) {
  const std::string bytes = encode_archive(archive);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

ModelArchive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_archive(bytes);
}

}  // namespace isda
