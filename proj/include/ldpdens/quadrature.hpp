//
// Copyright 2026 The ldpdens Authors
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
//

#ifndef LDPDENS_QUADRATURE_HPP_
#define LDPDENS_QUADRATURE_HPP_

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <functional>
#include <stdexcept>

namespace ldpdens {

// Adaptive Gauss-Kronrod integration on [a, b] to relative tolerance `tol`
// (with an absolute floor for integrals that vanish by symmetry). Throws if
// the error estimate signals catastrophic non-convergence; the frozen-value
// tests pin the actual accuracy separately.
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-12) {
  double error = 0.0;
  double l1 = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          std::forward<F>(f), a, b, 14, tol, &error, &l1);
  const double scale = std::max(std::abs(value), l1);
  if (!(error <= 1e4 * tol * scale + 1e-11)) {
    throw std::runtime_error("quadrature did not converge");
  }
  return value;
}

// Same rule at a lower order, used to confirm stability of frozen constants.
template <typename F>
double integrate_low_order(F&& f, double a, double b, double tol = 1e-10) {
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      std::forward<F>(f), a, b, 10, tol, &error);
}

}  // namespace ldpdens

#endif  // LDPDENS_QUADRATURE_HPP_
