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

// Python arrays hold one sample per row; the C++ core stores one per column.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "isda/archive.hpp"
#include "isda/dataset_io.hpp"
#include "isda/incr_kernel.hpp"
#include "isda/incr_linear.hpp"
#include "isda/pipeline.hpp"

namespace py = pybind11;

namespace isda {
namespace {

std::vector<Membership> memberships(const std::vector<int>& classes,
                                    const std::vector<int>& subclasses) {
  if (classes.size() != subclasses.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "class and subclass label counts differ");
  }
  std::vector<Membership> out(classes.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {classes[i], subclasses[i]};
  return out;
}

LabeledDataset dataset(const Matrix& x, std::vector<int> classes,
                       std::optional<std::vector<int>> subclasses) {
  std::vector<int> sub = subclasses ? *subclasses : std::vector<int>(classes.size(), 0);
  return LabeledDataset(x.transpose(), std::move(classes), std::move(sub));
}

TargetMode target_mode(const std::string& name) {
  if (name == "exact") return TargetMode::kExact;
  if (name == "approx") return TargetMode::kApprox;
  throw Error(ErrorCode::kInvalidArgument, "target mode must be 'exact' or 'approx'");
}

CenteringMode centering(const std::string& name) {
  if (name == "centered") return CenteringMode::kCentered;
  if (name == "none") return CenteringMode::kNonCentered;
  throw Error(ErrorCode::kInvalidArgument, "centering must be 'centered' or 'none'");
}

class LinearModel {
 public:
  LinearModel(const Matrix& x, std::vector<int> classes,
              std::optional<std::vector<int>> subclasses, double delta, bool no_batch)
      : state_(make_linear_state(dataset(x, std::move(classes), std::move(subclasses)), delta,
                                 no_batch ? StateMode::kNoBatch : StateMode::kWithData)) {}

  void update(const Matrix& x_new, const std::vector<int>& classes,
              std::optional<std::vector<int>> subclasses, const std::string& mode) {
    const std::vector<int> sub = subclasses ? *subclasses : std::vector<int>(classes.size(), 0);
    state_ = incr_fit(std::move(state_), x_new.transpose(), memberships(classes, sub),
                      target_mode(mode))
                 .state;
  }

  Matrix transform(const Matrix& x) const {
    return project_linear(state_.model, x.transpose()).transpose();
  }

  const Matrix& w() const { return state_.model.w; }
  const Vector& mean() const { return state_.model.mean; }
  double delta() const { return state_.delta; }
  Index count() const { return state_.stats.count; }
  bool no_batch() const { return state_.mode == StateMode::kNoBatch; }
  const Matrix& targets() const { return state_.targets.t; }

  py::bytes to_bytes() const {
    ModelArchive ar;
    ar.kind = ModelKind::kLinear;
    ar.linear = state_;
    return py::bytes(encode_archive(ar));
  }

  static LinearModel from_bytes(const std::string& bytes) {
    ModelArchive ar = decode_archive(bytes);
    if (!ar.linear) throw Error(ErrorCode::kArchiveFormat, "archive holds a kernel model");
    return LinearModel(std::move(*ar.linear));
  }

 private:
  explicit LinearModel(LinearIncrementalState state) : state_(std::move(state)) {}
  LinearIncrementalState state_;
};

class KernelModel {
 public:
  KernelModel(const Matrix& x, std::vector<int> classes,
              std::optional<std::vector<int>> subclasses, double delta,
              std::optional<double> sigma, const std::string& mode)
      : state_(make_kernel_state(dataset(x, std::move(classes), std::move(subclasses)), sigma,
                                 delta, centering(mode))) {}

  std::uint64_t update(const Matrix& x_new, const std::vector<int>& classes,
                       std::optional<std::vector<int>> subclasses, const std::string& mode) {
    const std::vector<int> sub = subclasses ? *subclasses : std::vector<int>(classes.size(), 0);
    KernelUpdate up = incr_fit_kernel(std::move(state_), x_new.transpose(),
                                      memberships(classes, sub), target_mode(mode));
    state_ = std::move(up.state);
    return up.kernel_evaluations;
  }

  Matrix transform(const Matrix& x) const {
    return project_kernel(state_.model, x.transpose()).transpose();
  }

  const Matrix& a() const { return state_.model.a; }
  double sigma() const { return state_.model.sigma; }
  double delta() const { return state_.model.delta; }
  Index count() const { return state_.model.a.rows(); }
  std::uint64_t kernel_evaluations() const { return state_.kernel_evaluations; }

  py::bytes to_bytes() const {
    ModelArchive ar;
    ar.kind = ModelKind::kKernel;
    ar.kernel = state_;
    return py::bytes(encode_archive(ar));
  }

  static KernelModel from_bytes(const std::string& bytes) {
    ModelArchive ar = decode_archive(bytes);
    if (!ar.kernel) throw Error(ErrorCode::kArchiveFormat, "archive holds a linear model");
    return KernelModel(std::move(*ar.kernel));
  }

 private:
  explicit KernelModel(KernelIncrementalState state) : state_(std::move(state)) {}
  KernelIncrementalState state_;
};

py::tuple synth_py(int classes, int subclasses, int dim, int per_subclass, double separation,
                   std::uint64_t seed, const std::string& layout) {
  SynthSpec spec;
  spec.classes = classes;
  spec.subclasses = subclasses;
  spec.dim = dim;
  spec.per_subclass = per_subclass;
  spec.separation = separation;
  spec.seed = seed;
  if (layout == "interleaved") {
    spec.layout = SynthLayout::kInterleaved;
  } else if (layout != "random") {
    throw Error(ErrorCode::kInvalidArgument, "layout must be 'random' or 'interleaved'");
  }
  const DatasetFile d = synth(spec);
  return py::make_tuple(Matrix(d.x.transpose()), d.class_labels, *d.subclass_labels);
}

}  // namespace
}  // namespace isda

PYBIND11_MODULE(_isda, m) {
  using namespace isda;
  m.doc() = "Incremental fast subclass discriminant analysis";

  static PyObject* error_type =
      PyErr_NewException("isda._isda.IsdaError", PyExc_RuntimeError, nullptr);
  m.attr("IsdaError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  py::class_<LinearModel>(m, "LinearModel")
      .def(py::init<const Matrix&, std::vector<int>, std::optional<std::vector<int>>, double,
                    bool>(),
           py::arg("x"), py::arg("classes"), py::arg("subclasses") = py::none(),
           py::arg("delta") = 1.0, py::arg("no_batch") = false)
      .def("update", &LinearModel::update, py::arg("x"), py::arg("classes"),
           py::arg("subclasses") = py::none(), py::arg("mode") = "exact")
      .def("transform", &LinearModel::transform, py::arg("x"))
      .def_property_readonly("w", &LinearModel::w)
      .def_property_readonly("mean", &LinearModel::mean)
      .def_property_readonly("delta", &LinearModel::delta)
      .def_property_readonly("count", &LinearModel::count)
      .def_property_readonly("no_batch", &LinearModel::no_batch)
      .def_property_readonly("targets", &LinearModel::targets)
      .def("to_bytes", &LinearModel::to_bytes)
      .def_static("from_bytes", &LinearModel::from_bytes);

  py::class_<KernelModel>(m, "KernelModel")
      .def(py::init<const Matrix&, std::vector<int>, std::optional<std::vector<int>>, double,
                    std::optional<double>, const std::string&>(),
           py::arg("x"), py::arg("classes"), py::arg("subclasses") = py::none(),
           py::arg("delta") = 1.0, py::arg("sigma") = py::none(),
           py::arg("centering") = "centered")
      .def("update", &KernelModel::update, py::arg("x"), py::arg("classes"),
           py::arg("subclasses") = py::none(), py::arg("mode") = "exact")
      .def("transform", &KernelModel::transform, py::arg("x"))
      .def_property_readonly("a", &KernelModel::a)
      .def_property_readonly("sigma", &KernelModel::sigma)
      .def_property_readonly("delta", &KernelModel::delta)
      .def_property_readonly("count", &KernelModel::count)
      .def_property_readonly("kernel_evaluations", &KernelModel::kernel_evaluations)
      .def("to_bytes", &KernelModel::to_bytes)
      .def_static("from_bytes", &KernelModel::from_bytes);

  m.def("synth", &synth_py, py::arg("classes"), py::arg("subclasses"), py::arg("dim"),
        py::arg("per_subclass"), py::arg("separation") = 10.0, py::arg("seed") = 0,
        py::arg("layout") = "random");

  m.def(
      "discover_subclasses",
      [](const Matrix& x, const std::vector<int>& classes, int z, std::uint64_t seed) {
        return discover_subclasses(x.transpose(), classes, z, seed).labels;
      },
      py::arg("x"), py::arg("classes"), py::arg("z"), py::arg("seed") = 0);

  m.def(
      "knn_classify",
      [](const Matrix& train, const std::vector<int>& labels, const Matrix& test, int k) {
        return knn_classify(train.transpose(), labels, test.transpose(), k);
      },
      py::arg("train"), py::arg("labels"), py::arg("test"), py::arg("k") = 5);

  m.def(
      "stratified_split",
      [](const std::vector<int>& labels, std::uint64_t seed) {
        const Split s = stratified_split(labels, SplitRatios{}, seed);
        return py::make_tuple(s.train, s.validation, s.test);
      },
      py::arg("labels"), py::arg("seed") = 0);

  m.def(
      "build_targets",
      [](const std::vector<int>& classes, const std::vector<int>& subclasses) {
        return build_targets(memberships(classes, subclasses)).t;
      },
      py::arg("classes"), py::arg("subclasses"));

  m.def(
      "between_laplacian",
      [](const std::vector<int>& classes, const std::vector<int>& subclasses) {
        return build_between_laplacian(memberships(classes, subclasses));
      },
      py::arg("classes"), py::arg("subclasses"));

  m.def(
      "rbf_kernel",
      [](const Matrix& x, const Matrix& y, double sigma) {
        return rbf_kernel(x.transpose(), y.transpose(), sigma);
      },
      py::arg("x"), py::arg("y"), py::arg("sigma"));

  m.def("kernel_evaluation_counter", &kernel_evaluation_counter);
}
