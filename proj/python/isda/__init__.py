# Copyright 2026 The isda Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Incremental fast subclass discriminant analysis.

Arrays are (samples, features); labels are integer sequences.
"""

from ._isda import (
    IsdaError,
    KernelModel,
    LinearModel,
    between_laplacian,
    build_targets,
    discover_subclasses,
    kernel_evaluation_counter,
    knn_classify,
    rbf_kernel,
    stratified_split,
    synth,
)

__all__ = [
    "IsdaError",
    "KernelModel",
    "LinearModel",
    "between_laplacian",
    "build_targets",
    "discover_subclasses",
    "kernel_evaluation_counter",
    "knn_classify",
    "rbf_kernel",
    "stratified_split",
    "synth",
]

__version__ = "0.1.0"
