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

#ifndef LDPDENS_ADAPTIVE_HPP_
#define LDPDENS_ADAPTIVE_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ldpdens/estimator.hpp"
#include "ldpdens/fourier.hpp"
#include "ldpdens/schedule.hpp"
#include "ldpdens/testbed.hpp"

namespace ldpdens {

// Candidate truncations J = 2^{L+1}-1 for 0 <= L <= floor(log2(1+n a^2))-1.
// Requires n alpha^2 >= 2 (the selection guarantee needs it, and below that
// the collection would be pointless anyway).
struct ModelCollection {
  std::vector<std::uint32_t> js;  // strictly increasing
  std::uint64_t n = 0;
  double alpha = 0.0;
};

ModelCollection model_collection(std::uint64_t n, double alpha);

// Variance majorant
//   V(J) = sqrt(2) tau Sigma_J sqrt(d log J + (3/2) log(n a^2)
//                                  + log(tau Sigma_J)),
// finite and positive for A >= 1 (rejected otherwise). The schedule must be
// the dyadic partition for J with the optimal budget split, under which the
// radicand equals d log J + log tau + log(n a^2) + 2 log S >= log 2 sqrt(2).
double penalty_v(const BlockSchedule& schedule, std::uint64_t n, double alpha,
                 double a_max);

// Empirical bias surrogate
//   A^(J) = max_{J'} ( d(f^_{J'}, f^_{J' ^ J}) - kappa1 V(J') )_+ ,
// where f^_{J' ^ J} is the J'-pass estimate truncated to min(J, J')
// coordinates per axis (same noise, which is what makes the telescoping
// comparison meaningful). Estimates must exist for every J' in `v_table`.
double empirical_bias_a(
    const std::map<std::uint32_t, EstimateResult>& estimates, std::uint32_t j,
    const std::map<std::uint32_t, double>& v_table, double kappa1,
    const SobolevParams& discriminator);

struct SelectionEntry {
  std::uint32_t j = 0;
  double v = 0.0;
  double a_hat = 0.0;
  double crit = 0.0;
};

struct SelectionResult {
  std::uint32_t j_hat = 0;
  std::vector<SelectionEntry> table;
  EstimateResult estimate;  // f^ at j_hat
  double kappa1 = 2.0;
  double kappa2 = 2.0;
  // The procedure privatizes the data once per model; this reports the naive
  // composed privacy cost |M| * alpha of all passes together.
  double composed_budget = 0.0;

  std::string to_json() const;
};

// Minimizes Crit(J) = A^(J) + kappa2 V(J) over the collection; ties break to
// the smallest J. One estimate per collection member is required, each built
// from its own privatization pass at total budget alpha.
SelectionResult select(const std::map<std::uint32_t, EstimateResult>& estimates,
                       std::uint64_t n, double alpha, double a_max,
                       const SobolevParams& discriminator, double kappa1 = 2.0,
                       double kappa2 = 2.0);

struct ConcentrationReport {
  struct Point {
    double t = 0.0;
    double bound = 0.0;        // deviation bound at t
    double empirical = 0.0;    // observed exceedance frequency
    double std_error = 0.0;    // binomial standard error of the frequency
    bool pass = false;         // empirical <= bound + 3 SE
  };
  double v = 0.0;
  double tau_sigma = 0.0;
  std::vector<Point> points;
  bool pass = false;
};

// Monte Carlo check of the deviation bound
//   P( d(f^_J, f_J) >= V(J) + t )
//     <= (n a^2)^{-3/2} * 2/(tau Sigma_J) * exp(-t^2 / (2 (tau Sigma_J)^2))
// at t in {0, tau Sigma_J, 2 tau Sigma_J}, for a testbed truth with known
// coefficients.
ConcentrationReport concentration_check(const BlockSchedule& schedule,
                                        std::uint64_t n, double alpha,
                                        double a_max,
                                        const BumpFamilySpec& truth,
                                        std::uint32_t replications,
                                        std::uint64_t seed);

}  // namespace ldpdens

#endif  // LDPDENS_ADAPTIVE_HPP_
