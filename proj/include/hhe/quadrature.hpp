// Copyright 2026 The HHE Authors
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

#ifndef HHE_QUADRATURE_HPP_
#define HHE_QUADRATURE_HPP_

#include <vector>

#include "hhe/common.hpp"
#include "hhe/element.hpp"

namespace hhe {

// Gauss rules on [0,1]; weight functions 1 (Legendre) and (1-x)^beta (Jacobi).
// Exact for polynomial degree <= 2n-1 against the weight.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);
void gauss_jacobi(int n, double beta, std::vector<double>& x,
                  std::vector<double>& w);

struct QuadratureRule {
  std::vector<Vec3> points;
  std::vector<double> weights;  // include the domain measure
};

// Conical-product rule on the unit tetrahedron {x,y,z>=0, x+y+z<=1} with n
// points per axis, exact for total degree <= 2n-1. Weights sum to 1/6.
const QuadratureRule& tet_rule(int n);

// Points per axis needed for stiffness integrands of sub-tetrahedra of the
// given parent kind (integrand polynomial degree after composition with the
// parent geometry map and an affine tet map).
int tet_rule_order(ElementKind kind);

// Direct tensor rules on the parametric domain of each kind, used for
// whole-element integrals and as an independent integration path in tests.
const QuadratureRule& classical_rule(ElementKind kind);

}  // namespace hhe

#endif  // HHE_QUADRATURE_HPP_
