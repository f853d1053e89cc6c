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

#ifndef LDPDENS_SCHEDULE_HPP_
#define LDPDENS_SCHEDULE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ldpdens/fourier.hpp"

namespace ldpdens {

// One block of the partition of prod_m {1,...,J_m}: the index product
// prod_m {lo_m, ..., hi_m}. For dyadic blocks with label l,
// lo_m = 2^{l_m} and hi_m = 2^{l_m+1}-1.
struct Block {
  std::vector<std::uint32_t> label;  // l = (l_1,...,l_d)
  std::vector<std::uint32_t> lo;
  std::vector<std::uint32_t> hi;
  std::uint64_t size = 0;       // d_l = prod (hi_m - lo_m + 1)
  double budget = 0.0;          // alpha_l (0 until allocated)
  std::uint64_t offset = 0;     // first position in the flat coefficient order

  // Enumerates the block's multi-indices in lexicographic order.
  std::vector<MultiIndex> indices() const;
};

// A partition of the index set prod_m {1,...,J_m} into blocks together with
// per-block privacy budgets. Blocks are ordered lexicographically by label;
// the flat coefficient order used by records concatenates the blocks,
// listing each block's indices lexicographically.
class BlockSchedule {
 public:
  int dim() const { return d_; }
  const std::vector<std::uint32_t>& per_axis_bound() const { return j_axis_; }
  // Per-axis J (identical axes in the isotropic case).
  std::uint32_t bound() const { return j_axis_.front(); }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::uint64_t coefficient_count() const { return total_; }
  double total_budget() const { return alpha_; }
  bool allocated() const { return alpha_ > 0; }
  const SobolevParams& discriminator() const { return delta_; }

  // Flat coefficient order (block-major, lexicographic inside each block).
  std::vector<MultiIndex> coefficient_order() const;

  std::string to_json() const;
  static BlockSchedule from_json(const std::string& text);

  // Human-readable block table (label, size, budget), one block per line.
  std::string summary() const;

  friend BlockSchedule dyadic_partition(std::uint32_t j, int d);
  friend BlockSchedule anisotropic_partition(std::uint32_t j,
                                             const SobolevParams& beta,
                                             const SobolevParams& delta);
  friend BlockSchedule single_block_schedule(std::uint32_t j, int d,
                                             double alpha,
                                             const SobolevParams& delta);
  friend BlockSchedule allocate_budget(BlockSchedule schedule, double alpha,
                                       const SobolevParams& delta);

 private:
  static BlockSchedule build_dyadic(const std::vector<int>& levels,
                                    const SobolevParams& delta_hint);

  int d_ = 0;
  std::vector<std::uint32_t> j_axis_;
  std::vector<Block> blocks_;
  std::uint64_t total_ = 0;
  double alpha_ = 0.0;   // 0 = budgets not allocated yet
  SobolevParams delta_;  // discriminator parameters used for the allocation
};

// Dyadic partition of {1,...,J}^d where J = 2^{L+1}-1. Budgets are unset.
// Throws std::invalid_argument if J+1 is not a power of two.
BlockSchedule dyadic_partition(std::uint32_t j, int d);

// Anisotropic partition: per-axis levels L_m = floor(log2(J^{beta/beta_m}+1))-1
// and J_m = 2^{L_m+1}-1, requiring beta and delta to share the same
// anisotropy (beta/beta_m = delta/delta_m for every m, harmonic means).
BlockSchedule anisotropic_partition(std::uint32_t j, const SobolevParams& beta,
                                    const SobolevParams& delta);

// Degenerate schedule with one block covering {1,...,J}^d carrying the whole
// budget. This is the comparator mechanism's layout, not a dyadic partition.
BlockSchedule single_block_schedule(std::uint32_t j, int d, double alpha,
                                    const SobolevParams& delta);

// Distributes alpha across blocks in proportion to
// prod_m 2^{l_m (1 - delta_m/d)/2} (the variance-minimizing split; in the
// isotropic case this is d_l^{(1-delta/d)/2} / S_{d,delta}(J)).
BlockSchedule allocate_budget(BlockSchedule schedule, double alpha,
                              const SobolevParams& delta);

// Normalization S_{d,delta}(J) = sum_l prod_m 2^{l_m (1 - delta_m/d)/2}.
double allocation_normalizer(const BlockSchedule& schedule,
                             const SobolevParams& delta);

struct SigmaTerms {
  std::vector<double> per_block;  // sigma_l = d_l^{1-delta/d} / (sqrt(n) alpha_l)
  double total = 0.0;             // Sigma_J
  double closed_form = 0.0;       // S_{d,delta}(J)^2 / sqrt(n alpha^2)
};

// Per-block variance scales and their sum; requires allocated budgets.
SigmaTerms sigma_terms(const BlockSchedule& schedule, std::uint64_t n);

enum class RateRegime { kSub, kCritical, kSuper };

struct TheoreticalChoice {
  std::uint32_t j = 1;  // dyadic value 2^{L+1}-1
  double target = 0.0;  // real-valued optimum before rounding
  RateRegime regime = RateRegime::kSub;
};

// Rate-optimal truncation for the block mechanism: the real target is
//   (n a^2)^{1/(2b+2d)}                      if delta < d,
//   (n a^2 / log(n a^2)^{4d})^{1/(2b+2dlt)}  if delta = d,
//   (n a^2)^{1/(2b+2delta)}                  if delta > d,
// rounded down to the dyadic grid 2^{L+1}-1 (never below 1). Anisotropic
// parameters enter through their harmonic means. Requires n alpha^2 > 1.
TheoreticalChoice theoretical_j(std::uint64_t n, double alpha,
                                const SobolevParams& beta,
                                const SobolevParams& delta);

// Rate-optimal truncation for the single-block comparator mechanism
// (threshold at delta = d/2; no dyadic constraint, plain floor).
TheoreticalChoice theoretical_j_global(std::uint64_t n, double alpha,
                                       const SobolevParams& beta,
                                       const SobolevParams& delta);

const char* regime_name(RateRegime regime);

}  // namespace ldpdens

#endif  // LDPDENS_SCHEDULE_HPP_
