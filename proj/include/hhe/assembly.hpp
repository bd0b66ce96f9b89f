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

#ifndef HHE_ASSEMBLY_HPP_
#define HHE_ASSEMBLY_HPP_

#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "hhe/dofs.hpp"

namespace hhe {

struct Material {
  double youngsModulus = 1.0;
  double poissonRatio = 0.3;
  // Isotropic stiffness in Voigt order [xx, yy, zz, yz, xz, xy] with
  // engineering shear strains.
  Eigen::Matrix<double, 6, 6> elasticity() const;
};

// Element stiffness of one basal field, integrated over the field's physical
// subdomain only. Rows/cols ordered (slot, component).
Eigen::MatrixXd field_stiffness(const Domain& d, int element, int fieldId,
                                const Material& mat);

struct AssembledSystem {
  Eigen::SparseMatrix<double> K;
  Eigen::VectorXd F;  // zero: enrichment surfaces are traction-free
};

// Deterministic threaded assembly: per-field blocks are computed in
// parallel, scattered serially in (element, field) order.
AssembledSystem assemble_system(const Domain& d, const DofMap& map,
                                const Material& mat, int threads = 1);

struct Constraint {
  int dof;
  double value;
};

// Eliminates constrained dofs, solves the reduced system (dense LDLT below
// 3000 unknowns, conjugate gradients above), and validates the residual.
// Throws "singular system" advice when the reduced operator is rank
// deficient and "conflicting constraints" when one dof is pinned twice with
// different values.
Eigen::VectorXd solve_constrained(const AssembledSystem& sys,
                                  const std::vector<Constraint>& constraints);

// Largest absolute strain component over all fields' quadrature points.
double max_strain_component(const Domain& d, const DofMap& map,
                            const Eigen::VectorXd& q);

// Number of eigenvalues below 1e-8 * max eigenvalue (dense; small systems).
int count_near_zero_modes(const Eigen::SparseMatrix<double>& K);

void write_matrix_market(const Eigen::SparseMatrix<double>& K,
                         const std::string& path);
void write_dense_vector(const Eigen::VectorXd& v, const std::string& path);

}  // namespace hhe

#endif  // HHE_ASSEMBLY_HPP_
