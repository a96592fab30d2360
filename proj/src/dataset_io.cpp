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

#include "isda/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string_view>

namespace isda {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  field = trim(field);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": cannot parse '" +
                                            std::string(field) + "'");
  }
  return value;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

LabeledDataset DatasetFile::labeled() const {
  if (subclass_labels) return LabeledDataset(x, class_labels, *subclass_labels);
  return LabeledDataset(x, class_labels, std::vector<int>(class_labels.size(), 0));
}

DatasetFile parse_csv_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    have_header = !trim(line).empty();
  }
  if (!have_header) throw Error(ErrorCode::kEmptyDataset, "file has no header");

  const std::vector<std::string_view> header = split_fields(line);
  std::optional<std::size_t> class_col;
  std::optional<std::size_t> subclass_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string_view name = trim(header[i]);
    if (name == "class") class_col = i;
    if (name == "subclass") subclass_col = i;
  }
  if (!class_col) throw Error(ErrorCode::kMissingClassColumn, "header lacks a 'class' column");
  const std::size_t fields = header.size();
  const std::size_t dim = fields - 1 - (subclass_col ? 1 : 0);
  if (dim == 0) throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": no feature columns");

  std::vector<double> values;
  DatasetFile data;
  std::vector<int> subclasses;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string_view> row = split_fields(line);
    if (row.size() != fields) {
      throw Error(ErrorCode::kRaggedRows, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(fields) + " fields, got " +
                                              std::to_string(row.size()));
    }
    for (std::size_t i = 0; i < fields; ++i) {
      if (i == *class_col) {
        data.class_labels.push_back(parse_number<int>(row[i], line_no));
      } else if (subclass_col && i == *subclass_col) {
        subclasses.push_back(parse_number<int>(row[i], line_no));
      } else {
        values.push_back(parse_number<double>(row[i], line_no));
      }
    }
  }
  if (data.class_labels.empty()) throw Error(ErrorCode::kEmptyDataset, "file has no samples");
  data.x = Eigen::Map<const Matrix>(values.data(), static_cast<Index>(dim),
                                    static_cast<Index>(data.class_labels.size()));
  if (subclass_col) data.subclass_labels = std::move(subclasses);
  return data;
}

DatasetFile load_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return parse_csv_dataset(in);
}

void write_csv_dataset(std::ostream& out, const DatasetFile& data) {
  std::string text;
  for (Index f = 0; f < data.x.rows(); ++f) text += "feat_" + std::to_string(f) + ",";
  text += data.subclass_labels ? "class,subclass\n" : "class\n";
  for (Index j = 0; j < data.x.cols(); ++j) {
    for (Index f = 0; f < data.x.rows(); ++f) {
      append_double(text, data.x(f, j));
      text += ',';
    }
    text += std::to_string(data.class_labels[static_cast<std::size_t>(j)]);
    if (data.subclass_labels) {
      text += ',';
      text += std::to_string((*data.subclass_labels)[static_cast<std::size_t>(j)]);
    }
    text += '\n';
  }
  out << text;
}

void save_csv_dataset(const std::string& path, const DatasetFile& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  write_csv_dataset(out, data);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

DatasetFile synth(const SynthSpec& spec) {
  if (spec.classes < 1 || spec.subclasses < 1 || spec.dim < 1 || spec.per_subclass < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synth counts must be >= 1");
  }
  if (!(spec.separation > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "separation must be > 0");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto unit_direction = [&]() {
    Vector v(spec.dim);
    do {
      for (Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    } while (v.norm() == 0.0);
    return Vector(v / v.norm());
  };

  std::vector<Vector> means;
  for (int c = 0; c < spec.classes; ++c) {
    Vector pair_direction;
    for (int s = 0; s < spec.subclasses; ++s) {
      if (spec.layout == SynthLayout::kInterleaved) {
        if (s % 2 == 0) pair_direction = unit_direction();
        const double sign = s % 2 == 0 ? 1.0 : -1.0;
        means.push_back(sign * spec.separation * pair_direction);
      } else {
        means.push_back(spec.separation * unit_direction());
      }
    }
  }

  const Index n = static_cast<Index>(spec.classes) * spec.subclasses * spec.per_subclass;
  DatasetFile data;
  data.x.resize(spec.dim, n);
  data.subclass_labels.emplace();
  Index col = 0;
  for (int c = 0; c < spec.classes; ++c) {
    for (int s = 0; s < spec.subclasses; ++s) {
      const Vector& mean = means[static_cast<std::size_t>(c * spec.subclasses + s)];
      for (int i = 0; i < spec.per_subclass; ++i, ++col) {
        for (Index f = 0; f < spec.dim; ++f) data.x(f, col) = mean(f) + normal(rng);
        data.class_labels.push_back(c);
        data.subclass_labels->push_back(s);
      }
    }
  }
  return data;
}

}  // namespace isda
