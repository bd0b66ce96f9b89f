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

#include "hhe/assembly.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>

#include "hhe/quadrature.hpp"

namespace hhe {

Eigen::Matrix<double, 6, 6> Material::elasticity() const {
  const double E = youngsModulus, nu = poissonRatio;
  const double lam = E * nu / ((1 + nu) * (1 - 2 * nu));
  const double mu = E / (2 * (1 + nu));
  Eigen::Matrix<double, 6, 6> C = Eigen::Matrix<double, 6, 6>::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) C(i, j) = lam;
    C(i, i) = lam + 2 * mu;
    C(i + 3, i + 3) = mu;
  }
  return C;
}

namespace {

Eigen::MatrixXd strain_matrix(const Eigen::Matrix<double, Eigen::Dynamic, 3>& dNdx) {
  const int N = (int)dNdx.rows();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(6, 3 * N);
  for (int i = 0; i < N; ++i) {
    B(0, 3 * i + 0) = dNdx(i, 0);
    B(1, 3 * i + 1) = dNdx(i, 1);
    B(2, 3 * i + 2) = dNdx(i, 2);
    B(3, 3 * i + 1) = dNdx(i, 2);
    B(3, 3 * i + 2) = dNdx(i, 1);
    B(4, 3 * i + 0) = dNdx(i, 2);
    B(4, 3 * i + 2) = dNdx(i, 0);
    B(5, 3 * i + 0) = dNdx(i, 1);
    B(5, 3 * i + 1) = dNdx(i, 0);
  }
  return B;
}

// Visits every quadrature point of the field's physical subdomain with the
// physical weight and shape gradients.
template <typename Fn>
void field_quadrature(const Domain& d, int element, int fieldId, Fn&& fn) {
  const EnrichmentTree& tree = d.trees[element];
  const ElementKind kind = tree.kind();
  std::vector<TetCell> own;
  const std::vector<TetCell>* cells;
  if (!tree.enriched() && fieldId == 0) {
    cells = &root_decomposition(kind);
  } else {
    own = tetrahedralize(tree.field(fieldId).boundary, tables(kind).refVolume);
    cells = &own;
  }
  const QuadratureRule& rule = tet_rule(tet_rule_order(kind));
  for (const TetCell& cell : *cells) {
    Eigen::Matrix3d M;
    M.col(0) = cell.v[1] - cell.v[0];
    M.col(1) = cell.v[2] - cell.v[0];
    M.col(2) = cell.v[3] - cell.v[0];
    const double detM = 6.0 * cell.volume;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const Vec3 xi = cell.v[0] + M * rule.points[q];
      const Eigen::Matrix3d J = jacobian(d.mesh, element, xi);
      const double detJ = J.determinant();
      if (detJ <= 0)
        throw NumericalError("nonpositive jacobian in element " +
                             std::to_string(element));
      const Eigen::Matrix<double, Eigen::Dynamic, 3> dNdx =
          shape_gradients(kind, xi) * J.inverse();
      fn(rule.weights[q] * detM * detJ, dNdx);
    }
  }
}

}  // namespace

Eigen::MatrixXd field_stiffness(const Domain& d, int element, int fieldId,
                                const Material& mat) {
  const int N = (int)d.mesh.elements[element].conn.size();
  const Eigen::Matrix<double, 6, 6> C = mat.elasticity();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(3 * N, 3 * N);
  field_quadrature(d, element, fieldId,
                   [&](double w, const Eigen::Matrix<double, Eigen::Dynamic, 3>& dNdx) {
                     const Eigen::MatrixXd B = strain_matrix(dNdx);
                     K.noalias() += w * (B.transpose() * C * B);
                   });
  return K;
}

AssembledSystem assemble_system(const Domain& d, const DofMap& map,
                                const Material& mat, int threads) {
  std::vector<std::pair<int, int>> jobs;  // (element, field ordinal)
  for (size_t e = 0; e < d.mesh.elements.size(); ++e)
    for (size_t ord = 0; ord < map.fieldIds[e].size(); ++ord)
      jobs.push_back({(int)e, (int)ord});

  std::vector<Eigen::MatrixXd> blocks(jobs.size());
  auto work = [&](size_t begin, size_t step) {
    for (size_t j = begin; j < jobs.size(); j += step)
      blocks[j] = field_stiffness(d, jobs[j].first,
                                  map.fieldIds[jobs[j].first][jobs[j].second], mat);
  };
  const int n = std::max(1, threads);
  if (n == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work, (size_t)t, (size_t)n);
    for (std::thread& t : pool) t.join();
  }

  std::vector<Eigen::Triplet<double>> triplets;
  for (size_t j = 0; j < jobs.size(); ++j) {
    const auto [e, ord] = jobs[j];
    const int N = (int)d.mesh.elements[e].conn.size();
    std::vector<int> dofs(3 * N);
    for (int slot = 0; slot < N; ++slot)
      for (int comp = 0; comp < 3; ++comp)
        dofs[3 * slot + comp] = map.dof(e, ord, slot, comp);
    for (int r = 0; r < 3 * N; ++r)
      for (int c = 0; c < 3 * N; ++c)
        triplets.emplace_back(dofs[r], dofs[c], blocks[j](r, c));
  }

  AssembledSystem sys;
  sys.K.resize(map.totalDofs, map.totalDofs);
  sys.K.setFromTriplets(triplets.begin(), triplets.end());
  sys.F = Eigen::VectorXd::Zero(map.totalDofs);
  return sys;
}

Eigen::VectorXd solve_constrained(const AssembledSystem& sys,
                                  const std::vector<Constraint>& constraints) {
  const int n = (int)sys.K.rows();
  std::map<int, double> pinned;
  for (const Constraint& c : constraints) {
    if (c.dof < 0 || c.dof >= n)
      throw ScenarioError("constraint dof out of range: " + std::to_string(c.dof));
    auto [it, inserted] = pinned.emplace(c.dof, c.value);
    if (!inserted && it->second != c.value)
      throw ScenarioError("conflicting constraints on dof " + std::to_string(c.dof));
  }

  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  std::vector<int> freeIndex(n, -1);
  std::vector<int> freeDofs;
  for (int i = 0; i < n; ++i) {
    auto it = pinned.find(i);
    if (it != pinned.end()) {
      q[i] = it->second;
    } else {
      freeIndex[i] = (int)freeDofs.size();
      freeDofs.push_back(i);
    }
  }
  const int nf = (int)freeDofs.size();
  if (nf == 0) return q;

  const Eigen::VectorXd rhsFull = sys.F - sys.K * q;
  Eigen::VectorXd rhs(nf);
  for (int i = 0; i < nf; ++i) rhs[i] = rhsFull[freeDofs[i]];

  std::vector<Eigen::Triplet<double>> triplets;
  for (int col = 0; col < n; ++col) {
    if (freeIndex[col] < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.K, col); it; ++it) {
      if (freeIndex[it.row()] < 0) continue;
      triplets.emplace_back(freeIndex[it.row()], freeIndex[col], it.value());
    }
  }
  Eigen::SparseMatrix<double> Kff(nf, nf);
  Kff.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::VectorXd qf;
  if (nf < 3000) {
    qf = Eigen::MatrixXd(Kff).ldlt().solve(rhs);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(20 * nf);
    cg.compute(Kff);
    qf = cg.solve(rhs);
  }

  double residual = (Kff * qf - rhs).norm();
  const double scale = rhs.norm();
  if (scale > 0) residual /= scale;
  if (!(residual <= 1e-10))
    throw NumericalError("singular system — add constraints");

  for (int i = 0; i < nf; ++i) q[freeDofs[i]] = qf[i];
  return q;
}

double max_strain_component(const Domain& d, const DofMap& map,
                            const Eigen::VectorXd& q) {
  double best = 0;
  for (size_t e = 0; e < d.mesh.elements.size(); ++e) {
    const int N = (int)d.mesh.elements[e].conn.size();
    for (size_t ord = 0; ord < map.fieldIds[e].size(); ++ord) {
      Eigen::VectorXd qe(3 * N);
      for (int slot = 0; slot < N; ++slot)
        for (int comp = 0; comp < 3; ++comp)
          qe[3 * slot + comp] = q[map.dof((int)e, (int)ord, slot, comp)];
      field_quadrature(
          d, (int)e, map.fieldIds[e][ord],
          [&](double, const Eigen::Matrix<double, Eigen::Dynamic, 3>& dNdx) {
            const Eigen::Matrix<double, 6, 1> eps = strain_matrix(dNdx) * qe;
            best = std::max(best, eps.cwiseAbs().maxCoeff());
          });
    }
  }
  return best;
}

int count_near_zero_modes(const Eigen::SparseMatrix<double>& K) {
  const Eigen::MatrixXd dense(K);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if (top == 0) return (int)ev.size();
  int count = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) < 1e-8 * top) ++count;
  return count;
}

void write_matrix_market(const Eigen::SparseMatrix<double>& K,
                         const std::string& path) {
  std::ofstream out(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << K.rows() << " " << K.cols() << " " << K.nonZeros() << "\n";
  char buf[64];
  for (int col = 0; col < K.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", (int)it.row() + 1,
                    (int)it.col() + 1, it.value());
      out << buf;
    }
}

void write_dense_vector(const Eigen::VectorXd& v, const std::string& path) {
  std::ofstream out(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  char buf[64];
  for (int i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v[i]);
    out << buf;
  }
}

}  // namespace hhe
