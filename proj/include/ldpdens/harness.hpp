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

#ifndef LDPDENS_HARNESS_HPP_
#define LDPDENS_HARNESS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ldpdens/adaptive.hpp"
#include "ldpdens/estimator.hpp"
#include "ldpdens/fourier.hpp"
#include "ldpdens/schedule.hpp"
#include "ldpdens/testbed.hpp"

namespace ldpdens {

// Ground-truth density for a simulation. Three sources:
//  - "uniform":      f = 1 (zero bias, risk is pure stochastic error);
//  - "bump":         the localized bump family (pattern dense|sparse);
//  - "coefficient":  a trigonometric polynomial given by explicit
//                    coefficients ("spikes") or a random sign table with the
//                    target weighted mass, clamped so f stays a density.
struct TruthConfig {
  std::string kind = "uniform";
  // bump options
  std::string pattern = "dense";
  std::uint32_t grid = 2;
  // coefficient options
  std::vector<std::pair<MultiIndex, double>> spikes;
  std::uint32_t random_support = 0;  // >0: random table on {1..support}^d
  double mass_fraction = 0.9;        // of R^2, before the positivity clamp
};

struct ExperimentSpec {
  TruthConfig truth;
  int d = 1;
  double beta = 1.0;
  double delta = 1.0;
  double radius = 1.4142135623730951;
  double a_max = 1.0;  // A
  double alpha = 1.0;
  std::vector<std::uint64_t> n_grid;
  std::string mechanism = "block";  // block | global
  std::string selector = "fixed";   // fixed | adaptive
  std::uint32_t replications = 100;
  std::uint64_t seed = 0;
  double kappa1 = 2.0;
  double kappa2 = 2.0;
  // Truth-table truncation for the exact risk head; the analytic tail
  // bound R * truth_bound^{-(beta+delta)} covers the rest. 0 = default
  // (255 for d = 1, 63 for d = 2).
  std::uint32_t truth_bound = 0;
  std::uint32_t threads = 0;  // 0 = hardware concurrency

  void validate() const;
  std::uint32_t effective_truth_bound() const;
  std::string to_json() const;
  static ExperimentSpec from_json(const std::string& text);
};

// A realized truth: exact coefficient table plus a sampler.
class TruthDensity {
 public:
  static TruthDensity realize(const ExperimentSpec& spec);

  const CoefficientTable& table() const { return table_; }
  double declared_radius() const { return radius_; }
  bool is_bump() const { return bump_.has_value(); }
  const BumpFamilySpec& bump() const { return *bump_; }

  void sample(Xoshiro256& rng, std::span<double> x_out) const;

 private:
  CoefficientTable table_;
  double radius_ = 1.0;
  std::optional<BumpFamilySpec> bump_;
  // rejection envelope for coefficient truths
  double envelope_ = 1.0;
  int d_ = 1;
};

struct ReplicationPoint {
  std::uint64_t n = 0;
  std::uint32_t replication = 0;
  std::uint32_t j_used = 0;
  double head = 0.0;
  double tail = 0.0;
};

struct GridPoint {
  std::uint64_t n = 0;
  double budget = 0.0;  // n alpha^2
  std::uint32_t j = 0;  // fixed-selector truncation (most used for adaptive)
  double mean_head = 0.0;
  double mean_mid = 0.0;
  double se_mid = 0.0;
  double tail = 0.0;
  // adaptive runs: per-model mean risk (midpoint), for oracle comparisons
  std::vector<std::pair<std::uint32_t, double>> model_mean_mid;
};

struct RunResult {
  ExperimentSpec spec;
  std::vector<GridPoint> per_n;
  std::vector<ReplicationPoint> points;

  std::string to_json() const;
  static RunResult from_json(const std::string& text);
  std::string to_csv() const;  // raw per-replication risks
};

// Seeded Monte Carlo sweep over the n grid. Deterministic: identical
// (spec, seed) inputs give byte-identical to_json() output regardless of
// thread scheduling.
RunResult run(const ExperimentSpec& spec);

struct RateFitResult {
  std::vector<double> x;  // log(n a^2) (or log-corrected)
  std::vector<double> y;  // log mean risk (interval midpoint)
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double theoretical = 0.0;  // NaN in the critical case
  // critical case delta = d: both reference exponents are reported and the
  // harness takes no side.
  bool critical = false;
  double critical_upper_log_power = 0.0;  // [log]^{4d} variant
  RateRegime regime = RateRegime::kSub;
  bool dropped_first_point = false;

  std::string to_json() const;
};

// OLS of log mean-risk on log(n alpha^2). Drops the smallest grid point
// when its SE exceeds 25% of the mean. Needs >= 4 surviving points.
RateFitResult fit_rate(const RunResult& result);

// Same fit against log(n a^2 / log(n a^2)), compared with the adaptive-rate
// exponents (identical to the fixed-J ones; only the regressor changes).
RateFitResult fit_rate_log_corrected(const RunResult& result);

// Theoretical risk exponent for the configured mechanism and regime.
double theoretical_exponent(const ExperimentSpec& spec);

struct ComparisonPoint {
  std::uint64_t n = 0;
  double block_mean = 0.0;
  double block_se = 0.0;
  double global_mean = 0.0;
  double global_se = 0.0;
  double z_separation = 0.0;  // (global - block) / se_diff
};

struct ComparisonResult {
  RunResult block;
  RunResult global;
  RateFitResult block_fit;
  RateFitResult global_fit;
  std::vector<ComparisonPoint> per_n;

  std::string to_json() const;
};

// Paired sweep: the same truths and sample streams, each mechanism at its
// own theoretical truncation.
ComparisonResult compare_mechanisms(const ExperimentSpec& spec);

}  // namespace ldpdens

#endif  // LDPDENS_HARNESS_HPP_
