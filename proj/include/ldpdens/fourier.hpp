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

#ifndef LDPDENS_FOURIER_HPP_
#define LDPDENS_FOURIER_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace ldpdens {

// Multi-index j = (j_1, ..., j_d) into the tensor Fourier basis of
// L2([0,1]^d). Every coordinate is >= 1; j_m = 1 is the constant factor,
// j_m = 2k the cosine of frequency k, j_m = 2k+1 the sine.
using MultiIndex = std::vector<std::uint32_t>;

// Smoothness exponents (one per axis; isotropic = all equal) and ball
// radius for a Sobolev ball: sum_j (j_1^{2s_1} + ... + j_d^{2s_d}) theta_j^2
// <= radius^2.
struct SobolevParams {
  std::vector<double> smoothness;
  double radius = 1.0;

  SobolevParams() = default;
  SobolevParams(std::vector<double> s, double r);
  // Isotropic convenience constructor.
  SobolevParams(int d, double s, double r);

  int dim() const { return static_cast<int>(smoothness.size()); }
  // Harmonic mean of the per-axis exponents: 1/s = (1/d) sum 1/s_m.
  double harmonic_mean() const;
  bool isotropic(double tol = 0.0) const;
};

// One-dimensional basis function value phi_j(t), j >= 1, t in [0,1].
double eval_basis_1d(std::uint32_t j, double t);

// phi_j(x) = prod_m phi_{j_m}(x_m). Throws std::invalid_argument on a
// dimension mismatch. |result| <= 2^{d/2}.
double eval_basis(const MultiIndex& j, std::span<const double> x);

// Fills out[i-1] = phi_i(t) for i = 1..j_max using stable trig recurrences
// (the rotation is refreshed from std::sin/cos periodically, so values agree
// with eval_basis_1d to machine precision).
void eval_basis_axis(std::uint32_t j_max, double t, std::span<double> out);

// Envelope bound max_j ||phi_j||_inf = 2^{d/2}.
double basis_bound(int d);

// Sobolev weight sum_m j_m^{2 s_m}; >= d for every valid index.
double sobolev_weight(const MultiIndex& j, const SobolevParams& params);

// Sparse table of Fourier coefficients with finite support. Lookup of an
// absent index is exactly 0. Iteration order is lexicographic, which keeps
// every downstream reduction deterministic.
class CoefficientTable {
 public:
  CoefficientTable() = default;
  explicit CoefficientTable(int d) : d_(d) {}

  int dim() const { return d_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  double at(const MultiIndex& j) const;
  void set(const MultiIndex& j, double theta);
  // Adds delta to the stored value (inserting if absent).
  void add(const MultiIndex& j, double delta);

  const std::map<MultiIndex, double>& entries() const { return entries_; }

  // Largest coordinate appearing in the support, per axis; 0 if empty.
  std::vector<std::uint32_t> support_bound() const;

  // this - other, over the union of supports.
  CoefficientTable minus(const CoefficientTable& other) const;

  // Truncation to indices with j_m <= bound for all m.
  CoefficientTable truncated(std::uint32_t bound) const;

  std::string to_json() const;
  static CoefficientTable from_json(const std::string& text);

 private:
  int d_ = 0;
  std::map<MultiIndex, double> entries_;
};

// Exact adversarial (Sobolev-IPM) distance between two densities whose
// coefficient difference is `diff`: the supremum of int (f1 - f2) g over
// g in the Sobolev ball of radius 1 equals
//     sqrt( sum_j diff(j)^2 / sobolev_weight(j) ),
// attained at theta_j(g) proportional to diff(j)/weight(j). The
// discriminator radius must be 1; other radii are rejected.
double adversarial_distance(const CoefficientTable& diff,
                            const SobolevParams& discriminator);

// Pointwise reconstruction sum_j theta_j phi_j(x).
double eval_density(const CoefficientTable& coeffs, std::span<const double> x);

// Weighted squared norm sum_j weight(j) theta_j^2; membership in the ball
// iff the result is <= radius^2.
double sobolev_norm_sq(const CoefficientTable& coeffs,
                       const SobolevParams& params);

}  // namespace ldpdens

#endif  // LDPDENS_FOURIER_HPP_
