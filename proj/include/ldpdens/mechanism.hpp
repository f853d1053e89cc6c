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

#ifndef LDPDENS_MECHANISM_HPP_
#define LDPDENS_MECHANISM_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ldpdens/fourier.hpp"
#include "ldpdens/rng.hpp"
#include "ldpdens/schedule.hpp"

namespace ldpdens {

// Largest block the sampler accepts; the restricted-count tables grow
// linearly in the block size.
inline constexpr std::uint64_t kMaxBlockSize = 1ULL << 20;

// Combinatorial normalizer: 1/Gamma_k = 2^{-(k-1)} C(k-1, floor((k-1)/2)).
// Computed through the stable ratio recurrence, exact for small k and
// accurate to a few ulps per step in general. Gamma_k <= 2 sqrt(k).
double gamma_k(std::uint64_t k);

// Hyperplane-avoidance probability: 1 for odd k, 1 - 2^{-k} C(k, k/2) for
// even k.
double p_k(std::uint64_t k);

// xi_A = A (e^A + 1) / (e^A - 1).
double xi_bound(double a_max);

// Everything the channel needs for one block of size k at budget a:
// output magnitude B_k(a) = B0 (e^a+1)/(e^a-1) Gamma_k, the half-space
// selection probability pi_a = e^a/(1+e^a), the hyperplane probability p_k,
// and the cumulative distribution of the agreement count on {z : <z,v> > 0}
// (proportional to C(k, m) for m > k/2).
struct ChannelParams {
  std::uint64_t k = 0;
  double budget = 0.0;
  double b0 = 0.0;
  double gamma = 0.0;
  double magnitude = 0.0;  // B_k(a)
  double pi = 0.0;
  double p = 0.0;
  std::vector<double> agree_cdf;  // cumulative over m = floor(k/2)+1 .. k

  static ChannelParams make(std::uint64_t k, double budget, double b0);
};

// Deterministic magnitude bound |Z_j| <= 2 xi_A B0 sqrt(k)/a, valid for
// budgets a in (0, a_max].
double magnitude_bound(std::uint64_t k, double budget, double a_max, int d);

// Per-record private views in the schedule's flat coefficient order; every
// coordinate of block l has magnitude exactly B_{d_l}(alpha_l).
struct PrivatizedRecord {
  std::vector<double> z;
};

// Applies the coordinate block mechanism for a fixed schedule. Holds scratch
// buffers, so one instance must not be shared across threads; instances are
// cheap to create per worker. Records are reproducible independently of
// execution order: record i of a run keyed by `dataset_key` always consumes
// the stream derive_key(derive_key(dataset_key, i), block_ordinal).
class Privatizer {
 public:
  explicit Privatizer(BlockSchedule schedule);

  const BlockSchedule& schedule() const { return schedule_; }
  const std::vector<ChannelParams>& params() const { return params_; }

  // Privatizes phi-space values directly (one block). phi values must lie in
  // [-B0, B0]. Writes k outputs with |z| = B_k(a).
  void privatize_block(std::span<const double> phi_block,
                       const ChannelParams& params, Xoshiro256& rng,
                       std::span<double> z_out);

  // Evaluates phi_j(x) for all scheduled j and privatizes each block with its
  // own budget. x must be in [0,1]^d and the schedule allocated.
  void privatize_record(std::span<const double> x, std::uint64_t dataset_key,
                        std::uint64_t record_index, std::span<double> z_out);

  // Convenience wrapper returning an owned record.
  PrivatizedRecord privatize_record(std::span<const double> x,
                                    std::uint64_t dataset_key,
                                    std::uint64_t record_index);

  // Basis values for all scheduled coefficients at x (flat order).
  void eval_phi(std::span<const double> x, std::span<double> phi_out);

 private:
  BlockSchedule schedule_;
  std::vector<ChannelParams> params_;
  std::vector<double> phi_;        // scratch: basis values, flat order
  std::vector<double> axis_vals_;  // scratch: per-axis basis values
  std::vector<std::uint32_t> axis_offsets_;
  std::vector<std::uint32_t> scratch_positions_;
  std::vector<signed char> vsign_;
};

// Exact channel law for one block, enumerating all sign patterns of z.
// Entry b of the result is P(Z = z(b) | X such that phi(X) = phi_block),
// where bit j of b set means z_j = +B_k(a). Requires k <= 10. `pi_override`
// (if positive) replaces pi_a, which is how the negative-control tests
// corrupt the channel.
std::vector<double> channel_pmf(const ChannelParams& params,
                                std::span<const double> phi_block,
                                double pi_override = -1.0);

struct LdpBlockReport {
  std::vector<std::uint32_t> label;
  double budget = 0.0;
  double max_log_ratio = 0.0;
  bool pass = false;
};

struct LdpReport {
  std::vector<LdpBlockReport> blocks;
  double budget_sum = 0.0;
  bool pass = false;
};

// Verifies the privacy guarantee by exact enumeration: for every block
// (all sizes must be <= 10) and every ordered pair of sample points, the
// log-ratio of channel probabilities must stay below alpha_l + 1e-10, and
// the block budgets must sum to the total.
LdpReport verify_ldp(const BlockSchedule& schedule,
                     const std::vector<std::vector<double>>& sample_points);

// Comparator mechanism: all J^d coefficients privatized as one block of
// budget alpha. Identical in law to the block mechanism when J = 1.
class GlobalPrivatizer {
 public:
  GlobalPrivatizer(std::uint32_t j, int d, double alpha,
                   const SobolevParams& delta);

  const BlockSchedule& schedule() const { return schedule_; }

  void privatize_record(std::span<const double> x, std::uint64_t dataset_key,
                        std::uint64_t record_index, std::span<double> z_out) {
    inner_.privatize_record(x, dataset_key, record_index, z_out);
  }

 private:
  BlockSchedule schedule_;
  Privatizer inner_;
};

// Streamed JSON-lines persistence: a header object carrying the schedule and
// the root seed, then one line per record.
void write_dataset_header(std::ostream& out, const BlockSchedule& schedule,
                          std::uint64_t seed, std::uint64_t n);
void write_dataset_record(std::ostream& out, const BlockSchedule& schedule,
                          std::uint64_t record_index,
                          std::span<const double> z);

struct DatasetHeader {
  BlockSchedule schedule;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
};

DatasetHeader read_dataset_header(std::istream& in);
// Returns false at end of stream; otherwise fills `z` (schedule order).
bool read_dataset_record(std::istream& in, const BlockSchedule& schedule,
                         std::uint64_t& record_index, std::vector<double>& z);

}  // namespace ldpdens

#endif  // LDPDENS_MECHANISM_HPP_
