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

#include "ldpdens/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "ldpdens/mechanism.hpp"

namespace ldpdens {

ModelCollection model_collection(std::uint64_t n, double alpha) {
  const double budget = static_cast<double>(n) * alpha * alpha;
  if (!(budget >= 2.0)) {
    throw std::invalid_argument("model_collection requires n alpha^2 >= 2");
  }
  const int l_max =
      static_cast<int>(std::floor(std::log2(1.0 + budget))) - 1;
  ModelCollection collection;
  collection.n = n;
  collection.alpha = alpha;
  for (int level = 0; level <= l_max; ++level) {
    collection.js.push_back(
        static_cast<std::uint32_t>((1ULL << (level + 1)) - 1));
  }
  return collection;
}

double penalty_v(const BlockSchedule& schedule, std::uint64_t n, double alpha,
                 double a_max) {
  if (a_max < 1.0) {
    throw std::invalid_argument("penalty_v requires A >= 1");
  }
  if (!schedule.allocated()) {
    throw std::invalid_argument("penalty_v: budgets not allocated");
  }
  const int d = schedule.dim();
  const double budget = static_cast<double>(n) * alpha * alpha;
  const double tau_sigma =
      tau_constant(a_max, d) * sigma_terms(schedule, n).total;
  const double radicand = d * std::log(static_cast<double>(schedule.bound())) +
                          1.5 * std::log(budget) + std::log(tau_sigma);
  if (!(radicand > 0)) {
    throw std::runtime_error("penalty_v: nonpositive radicand");
  }
  return std::sqrt(2.0) * tau_sigma * std::sqrt(radicand);
}

namespace {

// d(f^_{J'}, f^_{J' ^ J}) where the second estimate is the truncation of the
// first: only coefficients with some coordinate above the cut survive the
// difference.
double truncation_distance(const EstimateResult& estimate, std::uint32_t cut,
                           const SobolevParams& discriminator) {
  const auto order = estimate.schedule.coefficient_order();
  double sum = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    bool dropped = false;
    for (auto c : order[i]) dropped = dropped || (c > cut);
    if (dropped) {
      sum += estimate.theta[i] * estimate.theta[i] /
             sobolev_weight(order[i], discriminator);
    }
  }
  return std::sqrt(sum);
}

}  // namespace

double empirical_bias_a(
    const std::map<std::uint32_t, EstimateResult>& estimates, std::uint32_t j,
    const std::map<std::uint32_t, double>& v_table, double kappa1,
    const SobolevParams& discriminator) {
  double worst = 0.0;
  for (const auto& [j_prime, v] : v_table) {
    const auto it = estimates.find(j_prime);
    if (it == estimates.end()) {
      throw std::invalid_argument("empirical_bias_a: missing estimate");
    }
    if (j_prime <= j) continue;  // truncation keeps everything, term is 0
    const double dist =
        truncation_distance(it->second, std::min(j, j_prime), discriminator);
    worst = std::max(worst, dist - kappa1 * v);
  }
  return std::max(worst, 0.0);
}

SelectionResult select(
    const std::map<std::uint32_t, EstimateResult>& estimates, std::uint64_t n,
    double alpha, double a_max, const SobolevParams& discriminator,
    double kappa1, double kappa2) {
  if (estimates.empty()) {
    throw std::invalid_argument("select: empty model collection");
  }
  std::map<std::uint32_t, double> v_table;
  for (const auto& [j, estimate] : estimates) {
    v_table[j] = penalty_v(estimate.schedule, n, alpha, a_max);
  }
  SelectionResult result;
  result.kappa1 = kappa1;
  result.kappa2 = kappa2;
  result.composed_budget = static_cast<double>(estimates.size()) * alpha;
  double best = 0.0;
  for (const auto& [j, estimate] : estimates) {
    SelectionEntry entry;
    entry.j = j;
    entry.v = v_table[j];
    entry.a_hat =
        empirical_bias_a(estimates, j, v_table, kappa1, discriminator);
    entry.crit = entry.a_hat + kappa2 * entry.v;
    // Ascending map order makes strict '<' break ties to the smallest J.
    if (result.table.empty() || entry.crit < best) {
      best = entry.crit;
      result.j_hat = j;
    }
    result.table.push_back(entry);
  }
  result.estimate = estimates.at(result.j_hat);
  return result;
}

std::string SelectionResult::to_json() const {
  nlohmann::json out;
  out["j_hat"] = j_hat;
  out["kappa1"] = kappa1;
  out["kappa2"] = kappa2;
  out["composed_budget"] = composed_budget;
  out["criteria"] = nlohmann::json::array();
  for (const auto& entry : table) {
    out["criteria"].push_back({{"j", entry.j},
                               {"v", entry.v},
                               {"a_hat", entry.a_hat},
                               {"crit", entry.crit}});
  }
  out["estimate"] = nlohmann::json::parse(estimate.to_json());
  return out.dump();
}

ConcentrationReport concentration_check(const BlockSchedule& schedule,
                                        std::uint64_t n, double alpha,
                                        double a_max,
                                        const BumpFamilySpec& truth,
                                        std::uint32_t replications,
                                        std::uint64_t seed) {
  const double budget = static_cast<double>(n) * alpha * alpha;
  const double tau_sigma =
      tau_constant(a_max, schedule.dim()) * sigma_terms(schedule, n).total;
  const double v = penalty_v(schedule, n, alpha, a_max);
  const auto truth_table = true_coefficients(truth, schedule.bound());

  ConcentrationReport report;
  report.v = v;
  report.tau_sigma = tau_sigma;
  const std::vector<double> thresholds = {0.0, tau_sigma, 2.0 * tau_sigma};
  std::vector<std::uint32_t> exceed(thresholds.size(), 0);

  Privatizer privatizer(schedule);
  std::vector<double> x(static_cast<std::size_t>(schedule.dim()));
  std::vector<double> z(schedule.coefficient_count());
  for (std::uint32_t rep = 0; rep < replications; ++rep) {
    const std::uint64_t rep_key = derive_key(seed, rep);
    Xoshiro256 sample_rng(derive_key(rep_key, 0x5a0d));
    Aggregator agg(schedule);
    for (std::uint64_t i = 0; i < n; ++i) {
      sample_point(truth, sample_rng, x);
      privatizer.privatize_record(x, rep_key, i, z);
      agg.consume(z);
    }
    const double dist = projection_error(agg.finish(), truth_table,
                                         schedule.discriminator());
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      if (dist >= v + thresholds[t]) ++exceed[t];
    }
  }

  report.pass = true;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    ConcentrationReport::Point point;
    point.t = thresholds[t];
    point.bound = std::pow(budget, -1.5) * 2.0 / tau_sigma *
                  std::exp(-thresholds[t] * thresholds[t] /
                           (2.0 * tau_sigma * tau_sigma));
    point.empirical =
        static_cast<double>(exceed[t]) / static_cast<double>(replications);
    point.std_error = std::sqrt(
        std::max(point.empirical * (1.0 - point.empirical), 1e-12) /
        static_cast<double>(replications));
    point.pass = point.empirical <= point.bound + 3.0 * point.std_error;
    report.pass = report.pass && point.pass;
    report.points.push_back(point);
  }
  return report;
}

}  // namespace ldpdens
