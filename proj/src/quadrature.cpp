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

#include "hhe/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace hhe {

namespace {

// Gauss rule for the Jacobi weight (1-x)^a (1+x)^b on [-1,1] via the
// Golub-Welsch eigendecomposition of the monic three-term recurrence.
void gauss_jacobi_sym(int n, double a, double b, std::vector<double>& x,
                      std::vector<double>& w) {
  if (n < 1) throw Error("quadrature order must be positive");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  auto alpha = [&](int k) -> double {
    if (k == 0) return (b - a) / (a + b + 2.0);
    const double s = 2.0 * k + a + b;
    return (b * b - a * a) / (s * (s + 2.0));
  };
  auto beta = [&](int k) -> double {
    const double s = 2.0 * k + a + b;
    return 4.0 * k * (k + a) * (k + b) * (k + a + b) /
           (s * s * (s + 1.0) * (s - 1.0));
  };
  const double beta0 = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) *
                       std::tgamma(b + 1.0) / std::tgamma(a + b + 2.0);
  for (int k = 0; k < n; ++k) {
    J(k, k) = alpha(k);
    if (k + 1 < n) {
      const double off = std::sqrt(beta(k + 1));
      J(k, k + 1) = off;
      J(k + 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    w[i] = beta0 * v0 * v0;
  }
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  gauss_jacobi(n, 0.0, x, w);
}

void gauss_jacobi(int n, double beta, std::vector<double>& x,
                  std::vector<double>& w) {
  std::vector<double> xs, ws;
  gauss_jacobi_sym(n, beta, 0.0, xs, ws);
  x.resize(n);
  w.resize(n);
  const double scale = std::pow(2.0, -beta - 1.0);
  for (int i = 0; i < n; ++i) {
    x[i] = 0.5 * (1.0 + xs[i]);
    w[i] = scale * ws[i];
  }
}

const QuadratureRule& tet_rule(int n) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> xu, wu, xv, wv, xw, ww;
  gauss_jacobi(n, 2.0, xu, wu);
  gauss_jacobi(n, 1.0, xv, wv);
  gauss_legendre(n, xw, ww);
  QuadratureRule rule;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double u = xu[i], v = xv[j], t = xw[k];
        rule.points.emplace_back(u, v * (1 - u), t * (1 - u) * (1 - v));
        rule.weights.push_back(wu[i] * wv[j] * ww[k]);
      }
  return cache.emplace(n, std::move(rule)).first->second;
}

int tet_rule_order(ElementKind kind) {
  switch (kind) {
    case ElementKind::tet4: return 1;
    case ElementKind::wedge6: return 2;
    case ElementKind::hex8: return 3;
    case ElementKind::pyramid5: return 4;
  }
  throw Error("bad element kind");
}

namespace {

QuadratureRule make_classical(ElementKind kind) {
  QuadratureRule rule;
  switch (kind) {
    case ElementKind::hex8: {
      std::vector<double> x, w;
      gauss_legendre(3, x, w);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) {
            rule.points.emplace_back(2 * x[i] - 1, 2 * x[j] - 1, 2 * x[k] - 1);
            rule.weights.push_back(8 * w[i] * w[j] * w[k]);
          }
      return rule;
    }
    case ElementKind::tet4: return tet_rule(2);
    case ElementKind::wedge6: {
      const Vec3 tri[3] = {{0.5, 0.0, 0}, {0.5, 0.5, 0}, {0.0, 0.5, 0}};
      std::vector<double> x, w;
      gauss_legendre(2, x, w);
      for (const Vec3& p : tri)
        for (int k = 0; k < 2; ++k) {
          rule.points.emplace_back(p[0], p[1], 2 * x[k] - 1);
          rule.weights.push_back((1.0 / 6.0) * 2 * w[k]);
        }
      return rule;
    }
    case ElementKind::pyramid5: {
      std::vector<double> x2, w2, x3, w3;
      gauss_legendre(2, x2, w2);
      gauss_legendre(3, x3, w3);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 3; ++k) {
            rule.points.emplace_back(2 * x2[i] - 1, 2 * x2[j] - 1, x3[k]);
            rule.weights.push_back(4 * w2[i] * w2[j] * w3[k]);
          }
      return rule;
    }
  }
  throw Error("bad element kind");
}

}  // namespace

const QuadratureRule& classical_rule(ElementKind kind) {
  static const QuadratureRule hex = make_classical(ElementKind::hex8);
  static const QuadratureRule tet = make_classical(ElementKind::tet4);
  static const QuadratureRule wedge = make_classical(ElementKind::wedge6);
  static const QuadratureRule pyr = make_classical(ElementKind::pyramid5);
  switch (kind) {
    case ElementKind::hex8: return hex;
    case ElementKind::tet4: return tet;
    case ElementKind::wedge6: return wedge;
    case ElementKind::pyramid5: return pyr;
  }
  throw Error("bad element kind");
}

}  // namespace hhe
