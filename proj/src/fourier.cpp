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

#include "ldpdens/fourier.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace ldpdens {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
}  // namespace

SobolevParams::SobolevParams(std::vector<double> s, double r)
    : smoothness(std::move(s)), radius(r) {
  if (smoothness.empty()) throw std::invalid_argument("empty smoothness");
  for (double v : smoothness) {
    if (!(v > 0)) throw std::invalid_argument("smoothness must be positive");
  }
  if (!(radius > 0)) throw std::invalid_argument("radius must be positive");
}

SobolevParams::SobolevParams(int d, double s, double r)
    : SobolevParams(std::vector<double>(static_cast<std::size_t>(d), s), r) {}

double SobolevParams::harmonic_mean() const {
  double inv = 0.0;
  for (double v : smoothness) inv += 1.0 / v;
  return static_cast<double>(smoothness.size()) / inv;
}

bool SobolevParams::isotropic(double tol) const {
  for (double v : smoothness) {
    if (std::abs(v - smoothness.front()) > tol) return false;
  }
  return true;
}

double eval_basis_1d(std::uint32_t j, double t) {
  if (j == 0) throw std::invalid_argument("basis index must be >= 1");
  if (j == 1) return 1.0;
  const double k = static_cast<double>(j / 2);
  if (j % 2 == 0) return kSqrt2 * std::cos(kTwoPi * k * t);
  return kSqrt2 * std::sin(kTwoPi * k * t);
}

double eval_basis(const MultiIndex& j, std::span<const double> x) {
  if (j.size() != x.size() || j.empty()) {
    throw std::invalid_argument("eval_basis: dimension mismatch");
  }
  double prod = 1.0;
  for (std::size_t m = 0; m < j.size(); ++m) {
    prod *= eval_basis_1d(j[m], x[m]);
  }
  return prod;
}

void eval_basis_axis(std::uint32_t j_max, double t, std::span<double> out) {
  if (out.size() < j_max) {
    throw std::invalid_argument("eval_basis_axis: output too small");
  }
  if (j_max == 0) return;
  out[0] = 1.0;
  const double step_c = std::cos(kTwoPi * t);
  const double step_s = std::sin(kTwoPi * t);
  double c = 1.0, s = 0.0;  // cos/sin of 2*pi*k*t, currently k = 0
  for (std::uint32_t k = 1; 2 * k <= j_max + 1; ++k) {
    if (k % 32 == 1 && k > 1) {
      // Refresh the rotation to keep the recurrence at machine precision.
      c = std::cos(kTwoPi * k * t);
      s = std::sin(kTwoPi * k * t);
    } else {
      const double c_next = c * step_c - s * step_s;
      const double s_next = s * step_c + c * step_s;
      c = c_next;
      s = s_next;
    }
    if (2 * k <= j_max) out[2 * k - 1] = kSqrt2 * c;
    if (2 * k + 1 <= j_max) out[2 * k] = kSqrt2 * s;
  }
}

double basis_bound(int d) {
  return std::pow(2.0, 0.5 * static_cast<double>(d));
}

double sobolev_weight(const MultiIndex& j, const SobolevParams& params) {
  if (static_cast<int>(j.size()) != params.dim()) {
    throw std::invalid_argument("sobolev_weight: dimension mismatch");
  }
  double w = 0.0;
  for (std::size_t m = 0; m < j.size(); ++m) {
    w += std::pow(static_cast<double>(j[m]), 2.0 * params.smoothness[m]);
  }
  return w;
}

double CoefficientTable::at(const MultiIndex& j) const {
  auto it = entries_.find(j);
  return it == entries_.end() ? 0.0 : it->second;
}

void CoefficientTable::set(const MultiIndex& j, double theta) {
  if (static_cast<int>(j.size()) != d_) {
    throw std::invalid_argument("CoefficientTable::set: dimension mismatch");
  }
  for (auto c : j) {
    if (c == 0) throw std::invalid_argument("index coordinates must be >= 1");
  }
  entries_[j] = theta;
}

void CoefficientTable::add(const MultiIndex& j, double delta) {
  set(j, at(j) + delta);
}

std::vector<std::uint32_t> CoefficientTable::support_bound() const {
  std::vector<std::uint32_t> bound(static_cast<std::size_t>(d_), 0);
  for (const auto& [j, theta] : entries_) {
    for (std::size_t m = 0; m < j.size(); ++m) {
      if (j[m] > bound[m]) bound[m] = j[m];
    }
  }
  return bound;
}

CoefficientTable CoefficientTable::minus(const CoefficientTable& other) const {
  if (other.d_ != d_) {
    throw std::invalid_argument("CoefficientTable::minus: dimension mismatch");
  }
  CoefficientTable diff(d_);
  diff.entries_ = entries_;
  for (const auto& [j, theta] : other.entries_) {
    auto [it, inserted] = diff.entries_.try_emplace(j, -theta);
    if (!inserted) it->second -= theta;
  }
  return diff;
}

CoefficientTable CoefficientTable::truncated(std::uint32_t bound) const {
  CoefficientTable head(d_);
  for (const auto& [j, theta] : entries_) {
    bool keep = true;
    for (auto c : j) keep = keep && (c <= bound);
    if (keep) head.entries_.emplace(j, theta);
  }
  return head;
}

std::string CoefficientTable::to_json() const {
  nlohmann::json out;
  out["d"] = d_;
  out["entries"] = nlohmann::json::array();
  for (const auto& [j, theta] : entries_) {
    out["entries"].push_back({{"j", j}, {"theta", theta}});
  }
  return out.dump();
}

CoefficientTable CoefficientTable::from_json(const std::string& text) {
  const auto in = nlohmann::json::parse(text);
  CoefficientTable table(in.at("d").get<int>());
  for (const auto& entry : in.at("entries")) {
    table.set(entry.at("j").get<MultiIndex>(),
              entry.at("theta").get<double>());
  }
  return table;
}

double adversarial_distance(const CoefficientTable& diff,
                            const SobolevParams& discriminator) {
  if (discriminator.radius != 1.0) {
    throw std::invalid_argument(
        "adversarial_distance: discriminator radius must be 1");
  }
  if (!diff.empty() && diff.dim() != discriminator.dim()) {
    throw std::invalid_argument("adversarial_distance: dimension mismatch");
  }
  double sum = 0.0;
  for (const auto& [j, theta] : diff.entries()) {
    sum += theta * theta / sobolev_weight(j, discriminator);
  }
  return std::sqrt(sum);
}

double eval_density(const CoefficientTable& coeffs,
                    std::span<const double> x) {
  if (!coeffs.empty() && coeffs.dim() != static_cast<int>(x.size())) {
    throw std::invalid_argument("eval_density: dimension mismatch");
  }
  double value = 0.0;
  for (const auto& [j, theta] : coeffs.entries()) {
    value += theta * eval_basis(j, x);
  }
  return value;
}

double sobolev_norm_sq(const CoefficientTable& coeffs,
                       const SobolevParams& params) {
  double sum = 0.0;
  for (const auto& [j, theta] : coeffs.entries()) {
    sum += sobolev_weight(j, params) * theta * theta;
  }
  return sum;
}

}  // namespace ldpdens
