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

#include "ldpdens/mechanism.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace ldpdens {

namespace {

// c_m = C(m, floor(m/2)) / 2^m through the ratio recurrence
// c_m = c_{m-1} * m/(m+1) for odd m, c_m = c_{m-1} for even m.
double central_ratio(std::uint64_t m) {
  double c = 1.0;
  for (std::uint64_t i = 1; i <= m; ++i) {
    if (i % 2 == 1) c *= static_cast<double>(i) / static_cast<double>(i + 1);
  }
  return c;
}

}  // namespace

double gamma_k(std::uint64_t k) {
  if (k < 1) throw std::invalid_argument("gamma_k requires k >= 1");
  return 1.0 / central_ratio(k - 1);
}

double p_k(std::uint64_t k) {
  if (k < 1) throw std::invalid_argument("p_k requires k >= 1");
  if (k % 2 == 1) return 1.0;
  return 1.0 - central_ratio(k);
}

double xi_bound(double a_max) {
  return a_max * (std::exp(a_max) + 1.0) / (std::exp(a_max) - 1.0);
}

double magnitude_bound(std::uint64_t k, double budget, double a_max, int d) {
  return 2.0 * xi_bound(a_max) * basis_bound(d) *
         std::sqrt(static_cast<double>(k)) / budget;
}

ChannelParams ChannelParams::make(std::uint64_t k, double budget, double b0) {
  if (k < 1 || k > kMaxBlockSize) {
    throw std::invalid_argument("block size out of supported range");
  }
  if (!(budget > 0)) throw std::invalid_argument("block budget must be > 0");
  ChannelParams params;
  params.k = k;
  params.budget = budget;
  params.b0 = b0;
  params.gamma = gamma_k(k);
  params.magnitude = b0 * (std::exp(budget) + 1.0) /
                     (std::exp(budget) - 1.0) * params.gamma;
  params.pi = std::exp(budget) / (1.0 + std::exp(budget));
  params.p = p_k(k);
  // Agreement-count distribution on the > 0 half-space: proportional to
  // C(k, m) for m = floor(k/2)+1, ..., k. Built from the ratio
  // C(k, m+1)/C(k, m) = (k-m)/(m+1); all factors <= 1, so no overflow.
  const std::uint64_t m0 = k / 2 + 1;
  std::vector<double> weights;
  weights.reserve(k - m0 + 1);
  double w = 1.0;
  weights.push_back(w);
  for (std::uint64_t m = m0; m < k; ++m) {
    w *= static_cast<double>(k - m) / static_cast<double>(m + 1);
    weights.push_back(w);
  }
  double total = 0.0;
  for (double v : weights) total += v;
  params.agree_cdf.resize(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i] / total;
    params.agree_cdf[i] = acc;
  }
  params.agree_cdf.back() = 1.0;
  return params;
}

Privatizer::Privatizer(BlockSchedule schedule) : schedule_(std::move(schedule)) {
  if (!schedule_.allocated()) {
    throw std::invalid_argument("Privatizer requires an allocated schedule");
  }
  const double b0 = basis_bound(schedule_.dim());
  std::uint64_t max_block = 0;
  for (const auto& block : schedule_.blocks()) {
    params_.push_back(ChannelParams::make(block.size, block.budget, b0));
    max_block = std::max(max_block, block.size);
  }
  phi_.resize(schedule_.coefficient_count());
  std::uint32_t offset = 0;
  for (auto j : schedule_.per_axis_bound()) {
    axis_offsets_.push_back(offset);
    offset += j;
  }
  axis_vals_.resize(offset);
  scratch_positions_.resize(max_block);
  vsign_.resize(max_block);
}

void Privatizer::eval_phi(std::span<const double> x,
                          std::span<double> phi_out) {
  const int d = schedule_.dim();
  if (static_cast<int>(x.size()) != d) {
    throw std::invalid_argument("eval_phi: dimension mismatch");
  }
  const auto& j_axis = schedule_.per_axis_bound();
  for (int m = 0; m < d; ++m) {
    if (x[m] < 0.0 || x[m] > 1.0) {
      throw std::invalid_argument("point outside [0,1]^d");
    }
    eval_basis_axis(j_axis[m], x[m],
                    std::span<double>(axis_vals_.data() + axis_offsets_[m],
                                      j_axis[m]));
  }
  std::size_t pos = 0;
  for (const auto& block : schedule_.blocks()) {
    // Lexicographic walk over the block's index product, multiplying the
    // cached per-axis values.
    std::vector<std::uint32_t> j(block.lo.begin(), block.lo.end());
    for (;;) {
      double prod = 1.0;
      for (int m = 0; m < d; ++m) {
        prod *= axis_vals_[axis_offsets_[m] + j[m] - 1];
      }
      phi_out[pos++] = prod;
      int axis = d - 1;
      while (axis >= 0 && j[axis] == block.hi[axis]) {
        j[axis] = block.lo[axis];
        --axis;
      }
      if (axis < 0) break;
      ++j[axis];
    }
  }
}

void Privatizer::privatize_block(std::span<const double> phi_block,
                                 const ChannelParams& params, Xoshiro256& rng,
                                 std::span<double> z_out) {
  const std::uint64_t k = params.k;
  if (phi_block.size() != k || z_out.size() != k) {
    throw std::invalid_argument("privatize_block: size mismatch");
  }
  if (scratch_positions_.size() < k) {
    scratch_positions_.resize(k);
    vsign_.resize(k);
  }
  const double b0 = params.b0;
  for (std::uint64_t j = 0; j < k; ++j) {
    if (std::abs(phi_block[j]) > b0 * (1.0 + 1e-12)) {
      throw std::invalid_argument("privatize_block: |phi| exceeds B0");
    }
    // Step (a): V~_j = +-B0 with P(+B0) = 1/2 + phi_j/(2 B0).
    vsign_[j] = rng.bernoulli(0.5 + phi_block[j] / (2.0 * b0)) ? 1 : -1;
  }
  // Steps (b)-(c): pick the half-space (or hyperplane) and the number of
  // coordinates agreeing with V~, then place the agreements uniformly.
  std::uint64_t agreements;
  if (params.p >= 1.0 || rng.bernoulli(params.p)) {
    const std::uint64_t m =
        k / 2 + 1 +
        static_cast<std::uint64_t>(
            std::upper_bound(params.agree_cdf.begin(), params.agree_cdf.end(),
                             rng.uniform()) -
            params.agree_cdf.begin());
    agreements = rng.bernoulli(params.pi) ? m : k - m;
  } else {
    agreements = k / 2;  // <z, v~> = 0, only reachable for even k
  }
  for (std::uint64_t j = 0; j < k; ++j) {
    scratch_positions_[j] = static_cast<std::uint32_t>(j);
    z_out[j] = -static_cast<double>(vsign_[j]) * params.magnitude;
  }
  // Partial Fisher-Yates: the first `agreements` entries form a uniform
  // subset of {0,...,k-1}.
  for (std::uint64_t i = 0; i < agreements; ++i) {
    const std::uint64_t pick = i + rng.below(k - i);
    std::swap(scratch_positions_[i], scratch_positions_[pick]);
    z_out[scratch_positions_[i]] = -z_out[scratch_positions_[i]];
  }
}

void Privatizer::privatize_record(std::span<const double> x,
                                  std::uint64_t dataset_key,
                                  std::uint64_t record_index,
                                  std::span<double> z_out) {
  if (z_out.size() != schedule_.coefficient_count()) {
    throw std::invalid_argument("privatize_record: output size mismatch");
  }
  eval_phi(x, phi_);
  const std::uint64_t record_key = derive_key(dataset_key, record_index);
  const auto& blocks = schedule_.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Xoshiro256 rng(derive_key(record_key, b));
    const auto offset = blocks[b].offset;
    const auto size = blocks[b].size;
    privatize_block(std::span<const double>(phi_.data() + offset, size),
                    params_[b], rng,
                    z_out.subspan(offset, size));
  }
}

PrivatizedRecord Privatizer::privatize_record(std::span<const double> x,
                                              std::uint64_t dataset_key,
                                              std::uint64_t record_index) {
  PrivatizedRecord record;
  record.z.resize(schedule_.coefficient_count());
  privatize_record(x, dataset_key, record_index, record.z);
  return record;
}

std::vector<double> channel_pmf(const ChannelParams& params,
                                std::span<const double> phi_block,
                                double pi_override) {
  const std::uint64_t k = params.k;
  if (k > 10) throw std::invalid_argument("channel_pmf: k too large");
  if (phi_block.size() != k) {
    throw std::invalid_argument("channel_pmf: size mismatch");
  }
  const double pi = pi_override > 0 ? pi_override : params.pi;
  const std::uint64_t states = 1ULL << k;
  const double p_plus = pi / static_cast<double>(states / 2);
  const double p_minus = (1.0 - pi) / static_cast<double>(states / 2);
  const double p_zero = 1.0 / static_cast<double>(states);
  std::vector<double> pmf(states, 0.0);
  for (std::uint64_t v = 0; v < states; ++v) {
    // P(V~ = v | x): independent coordinates.
    double pv = 1.0;
    for (std::uint64_t j = 0; j < k; ++j) {
      const double p_pos = 0.5 + phi_block[j] / (2.0 * params.b0);
      pv *= (v >> j) & 1 ? p_pos : 1.0 - p_pos;
    }
    for (std::uint64_t z = 0; z < states; ++z) {
      const int disagreements = std::popcount(z ^ v);
      const int dot = static_cast<int>(k) - 2 * disagreements;
      const double pzv = dot > 0 ? p_plus : (dot < 0 ? p_minus : p_zero);
      pmf[z] += pzv * pv;
    }
  }
  return pmf;
}

LdpReport verify_ldp(const BlockSchedule& schedule,
                     const std::vector<std::vector<double>>& sample_points) {
  if (!schedule.allocated()) {
    throw std::invalid_argument("verify_ldp: budgets not allocated");
  }
  for (const auto& block : schedule.blocks()) {
    if (block.size > 10) {
      throw std::invalid_argument("verify_ldp: block too large to enumerate");
    }
  }
  Privatizer privatizer(schedule);
  const auto total = schedule.coefficient_count();
  std::vector<std::vector<double>> phis;
  for (const auto& x : sample_points) {
    std::vector<double> phi(total);
    privatizer.eval_phi(x, phi);
    phis.push_back(std::move(phi));
  }
  LdpReport report;
  report.pass = true;
  const auto& blocks = schedule.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    LdpBlockReport block_report;
    block_report.label = blocks[b].label;
    block_report.budget = blocks[b].budget;
    std::vector<std::vector<double>> pmfs;
    for (const auto& phi : phis) {
      pmfs.push_back(channel_pmf(
          privatizer.params()[b],
          std::span<const double>(phi.data() + blocks[b].offset,
                                  blocks[b].size)));
    }
    double worst = 0.0;
    for (const auto& pmf_a : pmfs) {
      for (const auto& pmf_b : pmfs) {
        for (std::size_t z = 0; z < pmf_a.size(); ++z) {
          worst = std::max(worst, std::log(pmf_a[z] / pmf_b[z]));
        }
      }
    }
    block_report.max_log_ratio = worst;
    block_report.pass = worst <= blocks[b].budget + 1e-10;
    report.pass = report.pass && block_report.pass;
    report.blocks.push_back(std::move(block_report));
    report.budget_sum += blocks[b].budget;
  }
  report.pass =
      report.pass && report.budget_sum <= schedule.total_budget() + 1e-12;
  return report;
}

GlobalPrivatizer::GlobalPrivatizer(std::uint32_t j, int d, double alpha,
                                   const SobolevParams& delta)
    : schedule_(single_block_schedule(j, d, alpha, delta)),
      inner_(schedule_) {}

void write_dataset_header(std::ostream& out, const BlockSchedule& schedule,
                          std::uint64_t seed, std::uint64_t n) {
  nlohmann::json header;
  header["format"] = "ldpdens.private.v1";
  header["schedule"] = nlohmann::json::parse(schedule.to_json());
  header["seed"] = seed;
  header["n"] = n;
  out << header.dump() << "\n";
}

void write_dataset_record(std::ostream& out, const BlockSchedule& schedule,
                          std::uint64_t record_index,
                          std::span<const double> z) {
  nlohmann::json line;
  line["i"] = record_index;
  auto blocks = nlohmann::json::array();
  for (const auto& block : schedule.blocks()) {
    std::vector<double> values(z.begin() + block.offset,
                               z.begin() + block.offset + block.size);
    blocks.push_back({{"l", block.label}, {"z", values}});
  }
  line["blocks"] = std::move(blocks);
  out << line.dump() << "\n";
}

DatasetHeader read_dataset_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("dataset: missing header line");
  }
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", "") != "ldpdens.private.v1") {
    throw std::runtime_error("dataset: unknown format");
  }
  DatasetHeader out;
  out.schedule = BlockSchedule::from_json(header.at("schedule").dump());
  out.seed = header.at("seed").get<std::uint64_t>();
  out.n = header.at("n").get<std::uint64_t>();
  return out;
}

bool read_dataset_record(std::istream& in, const BlockSchedule& schedule,
                         std::uint64_t& record_index, std::vector<double>& z) {
  std::string line;
  if (!std::getline(in, line) || line.empty()) return false;
  const auto parsed = nlohmann::json::parse(line);
  record_index = parsed.at("i").get<std::uint64_t>();
  z.assign(schedule.coefficient_count(), 0.0);
  const auto& blocks_json = parsed.at("blocks");
  const auto& blocks = schedule.blocks();
  if (blocks_json.size() != blocks.size()) {
    throw std::runtime_error("dataset: record/schedule block mismatch");
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto values = blocks_json[b].at("z").get<std::vector<double>>();
    if (values.size() != blocks[b].size) {
      throw std::runtime_error("dataset: block size mismatch");
    }
    std::copy(values.begin(), values.end(), z.begin() + blocks[b].offset);
  }
  return true;
}

}  // namespace ldpdens
