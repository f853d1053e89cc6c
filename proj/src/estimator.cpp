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

#include "ldpdens/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "ldpdens/mechanism.hpp"

namespace ldpdens {

namespace {

inline void kahan_add(double value, double& sum, double& comp) {
  const double y = value - comp;
  const double t = sum + y;
  comp = (t - sum) - y;
  sum = t;
}

}  // namespace

CoefficientTable EstimateResult::table() const {
  CoefficientTable out(schedule.dim());
  const auto order = schedule.coefficient_order();
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.set(order[i], theta[i]);
  }
  return out;
}

std::string EstimateResult::to_json(std::uint64_t seed) const {
  nlohmann::json out;
  out["n"] = n;
  out["seed"] = seed;
  out["schedule"] = nlohmann::json::parse(schedule.to_json());
  out["table"] = nlohmann::json::parse(table().to_json());
  out["block_variance"] = block_variance;
  return out.dump();
}

Aggregator::Aggregator(const BlockSchedule& schedule)
    : schedule_(schedule),
      sum_(schedule.coefficient_count(), 0.0),
      comp_(schedule.coefficient_count(), 0.0),
      sum_sq_(schedule.blocks().size(), 0.0),
      comp_sq_(schedule.blocks().size(), 0.0) {}

void Aggregator::consume(std::span<const double> z) {
  if (z.size() != sum_.size()) {
    throw std::invalid_argument("Aggregator: record size mismatch");
  }
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    kahan_add(z[i], sum_[i], comp_[i]);
  }
  const auto& blocks = schedule_.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    // |Z_j| is constant within a block, so the mean square over the block is
    // one representative value.
    const double v = z[blocks[b].offset];
    kahan_add(v * v, sum_sq_[b], comp_sq_[b]);
  }
  ++n_;
}

EstimateResult Aggregator::finish() const {
  if (n_ == 0) throw std::invalid_argument("Aggregator: empty dataset");
  EstimateResult result;
  result.schedule = schedule_;
  result.n = n_;
  result.theta.resize(sum_.size());
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    result.theta[i] = sum_[i] * inv_n;
  }
  const auto& blocks = schedule_.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const double mean_sq = sum_sq_[b] * inv_n;
    // Var(Z_j) estimate with E[Z_j] replaced by the block-average estimate;
    // diagnostic only.
    double mean_theta = 0.0;
    for (std::uint64_t i = 0; i < blocks[b].size; ++i) {
      const double t = result.theta[blocks[b].offset + i];
      mean_theta += t * t;
    }
    mean_theta /= static_cast<double>(blocks[b].size);
    result.block_variance.push_back(mean_sq - mean_theta);
  }
  return result;
}

EstimateResult aggregate(const BlockSchedule& schedule,
                         const std::vector<std::vector<double>>& records) {
  Aggregator agg(schedule);
  for (const auto& record : records) agg.consume(record);
  return agg.finish();
}

RiskInterval private_risk(const EstimateResult& estimate,
                          const CoefficientTable& truth,
                          std::uint32_t truth_bound,
                          const SobolevParams& truth_params,
                          const SobolevParams& discriminator) {
  if (truth_bound == 0 || truth.dim() != estimate.schedule.dim()) {
    throw std::invalid_argument("private_risk: truth/estimate mismatch");
  }
  // Triangle split d(f^, f) <= d(f^, f_tb) + d(f_tb, f): the head below is
  // exact over the union of the two supports; the analytic tail covers the
  // truth beyond its truncation.
  CoefficientTable diff = estimate.table().minus(truth);
  RiskInterval risk;
  risk.head = adversarial_distance(diff, discriminator);
  const double exponent = truth_params.harmonic_mean() +
                          discriminator.harmonic_mean();
  risk.tail = truth_params.radius *
              std::pow(static_cast<double>(truth_bound), -exponent);
  return risk;
}

double projection_error(const EstimateResult& estimate,
                        const CoefficientTable& truth,
                        const SobolevParams& discriminator) {
  const auto order = estimate.schedule.coefficient_order();
  double sum = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double diff = estimate.theta[i] - truth.at(order[i]);
    sum += diff * diff / sobolev_weight(order[i], discriminator);
  }
  return std::sqrt(sum);
}

double tau_constant(double a_max, int d) {
  return 2.0 * std::sqrt(std::pow(2.0, d) / static_cast<double>(d)) *
         xi_bound(a_max);
}

double variance_bound(const BlockSchedule& schedule, std::uint64_t n,
                      double a_max) {
  return tau_constant(a_max, schedule.dim()) * sigma_terms(schedule, n).total;
}

}  // namespace ldpdens
