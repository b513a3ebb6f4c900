// Copyright 2026 The HaloScope Authors.
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

#pragma once

#include "haloscope/matrix.hpp"

namespace haloscope {

struct SymmetricEigen {
  Vector values;   // non-increasing
  Matrix vectors;  // column j pairs with values[j]
  int sweeps = 0;
};

// Cyclic Jacobi rotations on a symmetric matrix. Deterministic: the rotation
// order is fixed and no randomness is involved.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, int max_sweeps = 100);

}  // namespace haloscope
