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

#include "ldpdens/schedule.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ldpdens {

namespace {

// L such that J = 2^{L+1}-1, or -1 if J is not of that form.
int dyadic_level(std::uint32_t j) {
  std::uint64_t p = static_cast<std::uint64_t>(j) + 1;
  if (p < 2 || (p & (p - 1)) != 0) return -1;
  int level = -1;
  while (p > 1) {
    p >>= 1;
    ++level;
  }
  return level;  // J = 2^{level+1}-1 with level >= 0
}

// Largest dyadic value 2^{L+1}-1 that is <= target (never below 1).
std::uint32_t round_down_dyadic(double target) {
  if (target < 1.0) return 1;
  const int level =
      static_cast<int>(std::floor(std::log2(target + 1.0))) - 1;
  if (level < 0) return 1;
  return static_cast<std::uint32_t>((1ULL << (level + 1)) - 1);
}

// Weight prod_m 2^{l_m (1 - delta_m/d)/2} driving the budget split.
double allocation_weight(const Block& block, const SobolevParams& delta,
                         int d) {
  double exponent = 0.0;
  for (std::size_t m = 0; m < block.label.size(); ++m) {
    exponent += static_cast<double>(block.label[m]) *
                (1.0 - delta.smoothness[m] / static_cast<double>(d)) * 0.5;
  }
  return std::exp2(exponent);
}

void check_same_anisotropy(const SobolevParams& beta,
                           const SobolevParams& delta) {
  if (beta.dim() != delta.dim()) {
    throw std::invalid_argument("anisotropy: dimension mismatch");
  }
  const double b = beta.harmonic_mean();
  const double dl = delta.harmonic_mean();
  for (int m = 0; m < beta.dim(); ++m) {
    const double lhs = b / beta.smoothness[m];
    const double rhs = dl / delta.smoothness[m];
    if (std::abs(lhs - rhs) > 1e-9) {
      throw std::invalid_argument(
          "anisotropy mismatch between density and discriminator parameters");
    }
  }
}

}  // namespace

BlockSchedule BlockSchedule::build_dyadic(const std::vector<int>& levels,
                                          const SobolevParams& delta_hint) {
  BlockSchedule schedule;
  const int d = static_cast<int>(levels.size());
  std::vector<std::uint32_t> label(levels.size(), 0);
  std::vector<Block> blocks;
  // Lexicographic enumeration of l in prod {0,...,L_m}.
  for (;;) {
    Block block;
    block.label.assign(label.begin(), label.end());
    block.size = 1;
    for (int m = 0; m < d; ++m) {
      block.lo.push_back(1u << label[m]);
      block.hi.push_back((1u << (label[m] + 1)) - 1);
      block.size *= (1ULL << label[m]);
    }
    blocks.push_back(std::move(block));
    int axis = d - 1;
    while (axis >= 0 &&
           label[axis] == static_cast<std::uint32_t>(levels[axis])) {
      label[axis] = 0;
      --axis;
    }
    if (axis < 0) break;
    ++label[axis];
  }
  std::uint64_t offset = 0;
  for (auto& block : blocks) {
    block.offset = offset;
    offset += block.size;
  }
  schedule.d_ = d;
  for (int level : levels) {
    schedule.j_axis_.push_back((1u << (level + 1)) - 1);
  }
  schedule.blocks_ = std::move(blocks);
  schedule.total_ = offset;
  schedule.delta_ = delta_hint;
  return schedule;
}

std::vector<MultiIndex> Block::indices() const {
  std::vector<MultiIndex> out;
  out.reserve(size);
  MultiIndex j(lo.begin(), lo.end());
  const int d = static_cast<int>(lo.size());
  for (;;) {
    out.push_back(j);
    int axis = d - 1;
    while (axis >= 0 && j[axis] == hi[axis]) {
      j[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) break;
    ++j[axis];
  }
  return out;
}

std::vector<MultiIndex> BlockSchedule::coefficient_order() const {
  std::vector<MultiIndex> order;
  order.reserve(total_);
  for (const auto& block : blocks_) {
    auto idx = block.indices();
    order.insert(order.end(), idx.begin(), idx.end());
  }
  return order;
}

BlockSchedule dyadic_partition(std::uint32_t j, int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  const int level = dyadic_level(j);
  if (level < 0) {
    throw std::invalid_argument("J must be of the form 2^{L+1}-1");
  }
  return BlockSchedule::build_dyadic(std::vector<int>(static_cast<std::size_t>(d), level),
                      SobolevParams(d, 1.0, 1.0));
}

BlockSchedule anisotropic_partition(std::uint32_t j, const SobolevParams& beta,
                                    const SobolevParams& delta) {
  check_same_anisotropy(beta, delta);
  const double b = beta.harmonic_mean();
  std::vector<int> levels;
  for (int m = 0; m < beta.dim(); ++m) {
    const double jm = std::pow(static_cast<double>(j), b / beta.smoothness[m]);
    const int level = static_cast<int>(std::floor(std::log2(jm + 1.0))) - 1;
    levels.push_back(level < 0 ? 0 : level);
  }
  return BlockSchedule::build_dyadic(levels, delta);
}

BlockSchedule single_block_schedule(std::uint32_t j, int d, double alpha,
                                    const SobolevParams& delta) {
  if (j < 1 || d < 1) throw std::invalid_argument("invalid block bounds");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  BlockSchedule schedule;
  Block block;
  block.label.assign(static_cast<std::size_t>(d), 0);
  block.lo.assign(static_cast<std::size_t>(d), 1);
  block.hi.assign(static_cast<std::size_t>(d), j);
  block.size = 1;
  for (int m = 0; m < d; ++m) block.size *= j;
  block.budget = alpha;
  block.offset = 0;
  schedule.d_ = d;
  schedule.j_axis_.assign(static_cast<std::size_t>(d), j);
  schedule.total_ = block.size;
  schedule.blocks_.push_back(std::move(block));
  schedule.alpha_ = alpha;
  schedule.delta_ = delta;
  return schedule;
}

double allocation_normalizer(const BlockSchedule& schedule,
                             const SobolevParams& delta) {
  double s = 0.0;
  for (const auto& block : schedule.blocks()) {
    s += allocation_weight(block, delta, schedule.dim());
  }
  return s;
}

BlockSchedule allocate_budget(BlockSchedule schedule, double alpha,
                              const SobolevParams& delta) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  if (delta.dim() != schedule.dim()) {
    throw std::invalid_argument("allocate_budget: dimension mismatch");
  }
  const double s = allocation_normalizer(schedule, delta);
  for (auto& block : schedule.blocks_) {
    block.budget =
        alpha * allocation_weight(block, delta, schedule.dim()) / s;
  }
  schedule.alpha_ = alpha;
  schedule.delta_ = delta;
  return schedule;
}

SigmaTerms sigma_terms(const BlockSchedule& schedule, std::uint64_t n) {
  if (!schedule.allocated()) {
    throw std::invalid_argument("sigma_terms: budgets not allocated");
  }
  const int d = schedule.dim();
  SigmaTerms terms;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  for (const auto& block : schedule.blocks()) {
    // d_l^{1-delta/d} generalizes to prod_m 2^{l_m (1-delta_m/d)}, the square
    // of the allocation weight.
    const double w = allocation_weight(block, schedule.discriminator(), d);
    const double sigma = w * w / (sqrt_n * block.budget);
    terms.per_block.push_back(sigma);
    terms.total += sigma;
  }
  const double s = allocation_normalizer(schedule, schedule.discriminator());
  terms.closed_form =
      s * s / std::sqrt(static_cast<double>(n) * schedule.total_budget() *
                        schedule.total_budget());
  return terms;
}

TheoreticalChoice theoretical_j(std::uint64_t n, double alpha,
                                const SobolevParams& beta,
                                const SobolevParams& delta) {
  const double budget = static_cast<double>(n) * alpha * alpha;
  if (!(budget > 1.0)) {
    throw std::invalid_argument("theoretical_j requires n alpha^2 > 1");
  }
  const int d = beta.dim();
  const double b = beta.harmonic_mean();
  const double dl = delta.harmonic_mean();
  TheoreticalChoice choice;
  if (dl < d) {
    choice.regime = RateRegime::kSub;
    choice.target = std::pow(budget, 1.0 / (2.0 * b + 2.0 * d));
  } else if (dl > d) {
    choice.regime = RateRegime::kSuper;
    choice.target = std::pow(budget, 1.0 / (2.0 * b + 2.0 * dl));
  } else {
    choice.regime = RateRegime::kCritical;
    const double corrected =
        budget / std::pow(std::log(budget), 4.0 * static_cast<double>(d));
    choice.target =
        std::pow(std::max(corrected, 1.0), 1.0 / (2.0 * b + 2.0 * dl));
  }
  choice.j = round_down_dyadic(choice.target);
  return choice;
}

TheoreticalChoice theoretical_j_global(std::uint64_t n, double alpha,
                                       const SobolevParams& beta,
                                       const SobolevParams& delta) {
  const double budget = static_cast<double>(n) * alpha * alpha;
  if (!(budget > 1.0)) {
    throw std::invalid_argument("theoretical_j_global requires n alpha^2 > 1");
  }
  const int d = beta.dim();
  const double b = beta.harmonic_mean();
  const double dl = delta.harmonic_mean();
  TheoreticalChoice choice;
  if (dl < 0.5 * d) {
    choice.regime = RateRegime::kSub;
    choice.target = std::pow(budget, 1.0 / (2.0 * b + 2.0 * d));
  } else if (dl > 0.5 * d) {
    choice.regime = RateRegime::kSuper;
    choice.target = std::pow(budget, 1.0 / (2.0 * b + 2.0 * dl + d));
  } else {
    choice.regime = RateRegime::kCritical;
    const double corrected =
        budget / std::pow(std::log(budget), static_cast<double>(d));
    choice.target = std::pow(std::max(corrected, 1.0),
                             1.0 / (2.0 * b + 2.0 * dl + d));
  }
  choice.j = static_cast<std::uint32_t>(
      std::max(1.0, std::floor(choice.target)));
  return choice;
}

const char* regime_name(RateRegime regime) {
  switch (regime) {
    case RateRegime::kSub:
      return "sub";
    case RateRegime::kCritical:
      return "critical";
    case RateRegime::kSuper:
      return "super";
  }
  return "unknown";
}

std::string BlockSchedule::to_json() const {
  nlohmann::json out;
  out["d"] = d_;
  out["j_axis"] = j_axis_;
  out["alpha"] = alpha_;
  out["delta"] = delta_.smoothness;
  out["blocks"] = nlohmann::json::array();
  for (const auto& block : blocks_) {
    out["blocks"].push_back({{"l", block.label},
                             {"lo", block.lo},
                             {"hi", block.hi},
                             {"size", block.size},
                             {"budget", block.budget}});
  }
  return out.dump();
}

BlockSchedule BlockSchedule::from_json(const std::string& text) {
  const auto in = nlohmann::json::parse(text);
  BlockSchedule schedule;
  schedule.d_ = in.at("d").get<int>();
  schedule.j_axis_ = in.at("j_axis").get<std::vector<std::uint32_t>>();
  schedule.alpha_ = in.at("alpha").get<double>();
  schedule.delta_ = SobolevParams(in.at("delta").get<std::vector<double>>(),
                                  1.0);
  std::uint64_t offset = 0;
  for (const auto& b : in.at("blocks")) {
    Block block;
    block.label = b.at("l").get<std::vector<std::uint32_t>>();
    block.lo = b.at("lo").get<std::vector<std::uint32_t>>();
    block.hi = b.at("hi").get<std::vector<std::uint32_t>>();
    block.size = b.at("size").get<std::uint64_t>();
    block.budget = b.at("budget").get<double>();
    block.offset = offset;
    offset += block.size;
    schedule.blocks_.push_back(std::move(block));
  }
  schedule.total_ = offset;
  return schedule;
}

std::string BlockSchedule::summary() const {
  std::ostringstream out;
  out << "block  size  budget\n";
  for (const auto& block : blocks_) {
    out << "(";
    for (std::size_t m = 0; m < block.label.size(); ++m) {
      out << (m ? "," : "") << block.label[m];
    }
    out << ")  " << block.size << "  " << block.budget << "\n";
  }
  return out.str();
}

}  // namespace ldpdens
