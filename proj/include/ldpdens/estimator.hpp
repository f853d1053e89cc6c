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

#ifndef LDPDENS_ESTIMATOR_HPP_
#define LDPDENS_ESTIMATOR_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "ldpdens/fourier.hpp"
#include "ldpdens/schedule.hpp"

namespace ldpdens {

// Projection estimate theta^_j = (1/n) sum_i Z_{i,j} with per-block
// diagnostics. The coefficient support is exactly the schedule's index set.
struct EstimateResult {
  BlockSchedule schedule;
  std::uint64_t n = 0;
  std::vector<double> theta;               // flat, schedule order
  std::vector<double> block_variance;      // empirical per-block mean of Var(Z_j)

  CoefficientTable table() const;
  std::string to_json(std::uint64_t seed = 0) const;
};

// Streaming mean of private records. Sums are compensated (Kahan), so for a
// fixed record order the result is bit-stable regardless of how producers
// were scheduled.
class Aggregator {
 public:
  explicit Aggregator(const BlockSchedule& schedule);

  void consume(std::span<const double> z);
  std::uint64_t count() const { return n_; }

  // Mean of all consumed records. Throws on an empty dataset.
  EstimateResult finish() const;

 private:
  BlockSchedule schedule_;
  std::uint64_t n_ = 0;
  std::vector<double> sum_;
  std::vector<double> comp_;
  std::vector<double> sum_sq_;
  std::vector<double> comp_sq_;
};

// Aggregates a fully materialized dataset (all records share the schedule).
EstimateResult aggregate(const BlockSchedule& schedule,
                         const std::vector<std::vector<double>>& records);

// Risk of an estimate against a truth table truncated at `truth_bound` per
// axis: the exactly computed coefficient-space distance plus the analytic
// tail bound R * truth_bound^{-(beta+delta)} covering everything beyond the
// truth's support. Reported as the interval [head, head + tail].
struct RiskInterval {
  double head = 0.0;
  double tail = 0.0;
  double mid() const { return head + 0.5 * tail; }
  double upper() const { return head + tail; }
};

RiskInterval private_risk(const EstimateResult& estimate,
                          const CoefficientTable& truth,
                          std::uint32_t truth_bound,
                          const SobolevParams& truth_params,
                          const SobolevParams& discriminator);

// Distance between the estimate and the truth's projection onto the
// estimate's support (the pure stochastic error; no tail term).
double projection_error(const EstimateResult& estimate,
                        const CoefficientTable& truth,
                        const SobolevParams& discriminator);

// tau_{A,d} = 2 sqrt(2^d/d) A (e^A+1)/(e^A-1).
double tau_constant(double a_max, int d);

// Guaranteed bound on E[ d(f^_J, f_J) ]: tau_{A,d} * Sigma_J.
double variance_bound(const BlockSchedule& schedule, std::uint64_t n,
                      double a_max);

}  // namespace ldpdens

#endif  // LDPDENS_ESTIMATOR_HPP_
