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

#ifndef LDPDENS_TESTBED_HPP_
#define LDPDENS_TESTBED_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ldpdens/fourier.hpp"
#include "ldpdens/rng.hpp"

namespace ldpdens {

// Antisymmetric bump on [0,1]:
//   psi(t) =  exp(-1/(1-(4t-1)^2)) on (0, 1/2),
//            -exp(-1/(1-(4t-3)^2)) on (1/2, 1),
// zero elsewhere. Smooth, periodic, integrates to 0, max |psi| = 1/e.
double psi(double t);

// Closed-form k-th derivative of psi (k <= 8). The derivative of
// exp(-1/(1-u^2)) is a polynomial multiple of itself over a power of
// (1-u^2); the polynomials are generated once per order.
double psi_derivative(int k, double t);

// Frozen quadrature values of the psi moments. Computed by adaptive
// Gauss-Kronrod; stable to 1e-8 across quadrature orders (tested).
struct PsiMoments {
  double l1;         // ||psi||_1
  double l2_sq;      // ||psi||_2^2
  double sup;        // ||psi||_inf = exp(-1)
  // ||psi^{(k)}||_2^2 for k = 1..4.
  double deriv_l2_sq[5];
};
const PsiMoments& psi_moments();

// Localized tensor bump on the cell prod_m [(j_m-1)/J, j_m/J]:
// G_j(x) = prod_m psi(J (x_m - (j_m-1)/J)). Zero integral;
// ||G_j||_p^p = ||psi||_p^{pd} / J^d.
double bump_g(std::span<const std::uint32_t> cell, std::uint32_t grid,
              std::span<const double> x);

// Scale constants of the perturbation families: gamma for densities
// f_nu = 1 + (gamma/J^beta) sum nu_j G_j inside the Sobolev ball of radius
// R, and eta for the discriminator family inside the unit ball.
// Requires R^2 > d and integer beta, delta (derivative norms).
struct FamilyConstants {
  double gamma = 0.0;
  double eta = 0.0;
};
FamilyConstants family_constants(int beta, int delta, double r, int d);

// A concrete testbed density f_nu = 1 + (gamma_n/J^beta) sum_j nu_j G_j.
struct BumpFamilySpec {
  int d = 1;
  std::uint32_t grid = 1;       // J: cells per axis
  int beta = 1;
  std::vector<std::uint8_t> nu; // grid^d cell activations, lexicographic
  double gamma_n = 0.0;

  // Dense (all cells on) or pattern-based construction; gamma_n defaults to
  // the largest admissible value for the given radius.
  static BumpFamilySpec make(int d, std::uint32_t grid, int beta, double r,
                             std::vector<std::uint8_t> nu);
  static BumpFamilySpec dense(int d, std::uint32_t grid, int beta, double r);
  static BumpFamilySpec uniform(int d);  // nu = 0: the uniform density

  std::uint64_t cell_count() const;
  double density(std::span<const double> x) const;
  // Envelope constant M = 1 + gamma_n ||psi||_inf^d / grid^beta (<= 2).
  double envelope() const;

  std::string to_json() const;
  static BumpFamilySpec from_json(const std::string& text);
};

// i.i.d. draws from f_nu by rejection sampling against the uniform envelope.
std::vector<std::vector<double>> sample_density(const BumpFamilySpec& spec,
                                                std::uint64_t n,
                                                Xoshiro256& rng);
// Single draw (used by streaming simulation loops).
void sample_point(const BumpFamilySpec& spec, Xoshiro256& rng,
                  std::span<double> x_out);

// Exact Fourier coefficients theta_j(f_nu) for all j in {1..j_max}^d, by
// per-axis adaptive quadrature over the bumps' support cells (absolute
// tolerance 1e-10 per entry).
CoefficientTable true_coefficients(const BumpFamilySpec& spec,
                                   std::uint32_t j_max);

// Sufficient Sobolev membership check through the derivative
// characterization: with C1^2 = int f^2 and
// C2^2 = max_m int (d^{beta_m} f / dx_m^{beta_m})^2, membership in the ball
// of radius R holds as soon as d (C1^2 + C2^2) <= R^2.
struct MembershipReport {
  bool member = false;
  double margin = 0.0;  // R^2 - d (C1^2 + C2^2)
  double c1_sq = 0.0;
  double c2_sq = 0.0;
};

// Closed-form evaluation for a bump-family density (disjoint supports make
// the integrals products of 1-d psi moments).
MembershipReport sobolev_membership_check(const BumpFamilySpec& spec,
                                          int beta, double r);

// Generic handle version for periodic f on [0,1]^d (d <= 2): integrates f^2
// and the beta-th axis derivatives by tensor quadrature. The caller supplies
// the partial derivative evaluator.
MembershipReport sobolev_membership_check(
    const std::function<double(std::span<const double>)>& f,
    const std::function<double(int axis, std::span<const double>)>& f_deriv,
    int d, int beta, double r);

// Discriminator-family scale check: the lower-bound construction
// g_lambda = (eta/J^delta) sum lambda_j G_j must lie in the unit ball.
MembershipReport discriminator_membership_check(int d, std::uint32_t grid,
                                                int delta, double eta);

}  // namespace ldpdens

#endif  // LDPDENS_TESTBED_HPP_
