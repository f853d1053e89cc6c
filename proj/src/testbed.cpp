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

#include "ldpdens/testbed.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "json.hpp"
#include "ldpdens/quadrature.hpp"

namespace ldpdens {

namespace {

// exp(-1/(1-u^2)) on (-1,1), 0 outside.
double core_bump(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

// Polynomials P_k with h^{(k)}(u) = P_k(u) h(u) / (1-u^2)^{2k} for
// h = core_bump, generated by
//   P_{k+1} = (1-u^2)^2 P_k' + 4 k u (1-u^2) P_k - 2 u P_k.
class DerivativePolys {
 public:
  static const std::vector<double>& get(int k) {
    static DerivativePolys instance;
    if (k < 0 || k > 8) {
      throw std::invalid_argument("psi_derivative supports orders 0..8");
    }
    return instance.polys_[static_cast<std::size_t>(k)];
  }

 private:
  DerivativePolys() {
    polys_.push_back({1.0});
    for (int k = 0; k < 8; ++k) {
      const auto& p = polys_.back();
      const std::size_t deg = p.size() - 1;
      std::vector<double> next(deg + 4, 0.0);
      // (1-u^2)^2 P' = P' - 2u^2 P' + u^4 P'
      for (std::size_t i = 1; i <= deg; ++i) {
        const double c = p[i] * static_cast<double>(i);
        next[i - 1] += c;
        next[i + 1] -= 2.0 * c;
        next[i + 3] += c;
      }
      // 4 k u (1-u^2) P = 4k u P - 4k u^3 P
      for (std::size_t i = 0; i <= deg; ++i) {
        next[i + 1] += 4.0 * k * p[i];
        next[i + 3] -= 4.0 * k * p[i];
      }
      // -2u P
      for (std::size_t i = 0; i <= deg; ++i) {
        next[i + 1] -= 2.0 * p[i];
      }
      while (next.size() > 1 && next.back() == 0.0) next.pop_back();
      polys_.push_back(std::move(next));
    }
  }

  std::vector<std::vector<double>> polys_;
};

double poly_eval(const std::vector<double>& coeffs, double u) {
  double value = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) {
    value = value * u + coeffs[i];
  }
  return value;
}

// h^{(k)}(u) for the core bump.
double core_bump_derivative(int k, double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const auto& p = DerivativePolys::get(k);
  const double denom = std::pow(1.0 - u * u, 2.0 * k);
  return poly_eval(p, u) * core_bump(u) / denom;
}

double cell_width(std::uint32_t grid) {
  return 1.0 / static_cast<double>(grid);
}

}  // namespace

double psi(double t) {
  if (t > 0.0 && t < 0.5) return core_bump(4.0 * t - 1.0);
  if (t > 0.5 && t < 1.0) return -core_bump(4.0 * t - 3.0);
  return 0.0;
}

double psi_derivative(int k, double t) {
  if (k == 0) return psi(t);
  const double scale = std::pow(4.0, k);
  if (t > 0.0 && t < 0.5) return scale * core_bump_derivative(k, 4.0 * t - 1.0);
  if (t > 0.5 && t < 1.0) {
    return -scale * core_bump_derivative(k, 4.0 * t - 3.0);
  }
  return 0.0;
}

const PsiMoments& psi_moments() {
  static const PsiMoments moments = [] {
    PsiMoments m;
    // Substitution u = 4t - 1 maps each half onto (-1, 1); both halves
    // contribute equally in absolute value.
    m.l1 = 0.5 * integrate([](double u) { return core_bump(u); }, -1.0, 1.0);
    m.l2_sq = 0.5 * integrate(
                        [](double u) {
                          const double h = core_bump(u);
                          return h * h;
                        },
                        -1.0, 1.0);
    m.sup = std::exp(-1.0);
    m.deriv_l2_sq[0] = m.l2_sq;
    for (int k = 1; k <= 4; ++k) {
      m.deriv_l2_sq[k] =
          2.0 * integrate(
                    [k](double t) {
                      const double v = psi_derivative(k, t);
                      return v * v;
                    },
                    0.0, 0.5, 1e-11);
    }
    return m;
  }();
  return moments;
}

double bump_g(std::span<const std::uint32_t> cell, std::uint32_t grid,
              std::span<const double> x) {
  if (cell.size() != x.size()) {
    throw std::invalid_argument("bump_g: dimension mismatch");
  }
  const double j = static_cast<double>(grid);
  double prod = 1.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    prod *= psi(j * (x[m] - (static_cast<double>(cell[m]) - 1.0) / j));
    if (prod == 0.0) return 0.0;
  }
  return prod;
}

FamilyConstants family_constants(int beta, int delta, double r, int d) {
  if (beta < 1 || delta < 1) {
    throw std::invalid_argument(
        "family_constants: integer beta, delta >= 1 required");
  }
  if (!(r * r > static_cast<double>(d))) {
    throw std::invalid_argument("family_constants requires R^2 > d");
  }
  const auto& m = psi_moments();
  const auto deriv_sq = [&](int k) {
    if (k <= 4) return m.deriv_l2_sq[k];
    return 2.0 * integrate(
                     [k](double t) {
                       const double v = psi_derivative(k, t);
                       return v * v;
                     },
                     0.0, 0.5, 1e-10);
  };
  const double l2_pow = std::pow(m.l2_sq, d - 1);  // ||psi||_2^{2(d-1)}
  FamilyConstants out;
  const double gamma_sq =
      std::min(std::pow(m.sup, -2.0 * d),
               (r * r - d) / (d * l2_pow * (m.l2_sq + deriv_sq(beta))));
  const double eta_sq = 1.0 / (d * l2_pow * (m.l2_sq + deriv_sq(delta)));
  out.gamma = std::sqrt(gamma_sq);
  out.eta = std::sqrt(eta_sq);
  return out;
}

std::uint64_t BumpFamilySpec::cell_count() const {
  std::uint64_t count = 1;
  for (int m = 0; m < d; ++m) count *= grid;
  return count;
}

BumpFamilySpec BumpFamilySpec::make(int d, std::uint32_t grid, int beta,
                                    double r, std::vector<std::uint8_t> nu) {
  BumpFamilySpec spec;
  spec.d = d;
  spec.grid = grid;
  spec.beta = beta;
  spec.nu = std::move(nu);
  if (spec.nu.size() != spec.cell_count()) {
    throw std::invalid_argument("BumpFamilySpec: nu size mismatch");
  }
  // delta only matters for eta, which the density scale does not use.
  spec.gamma_n = family_constants(beta, beta, r, d).gamma;
  return spec;
}

BumpFamilySpec BumpFamilySpec::dense(int d, std::uint32_t grid, int beta,
                                     double r) {
  BumpFamilySpec seed;
  seed.d = d;
  seed.grid = grid;
  std::vector<std::uint8_t> nu(seed.cell_count(), 1);
  return make(d, grid, beta, r, std::move(nu));
}

BumpFamilySpec BumpFamilySpec::uniform(int d) {
  BumpFamilySpec spec;
  spec.d = d;
  spec.grid = 1;
  spec.beta = 1;
  spec.nu.assign(1, 0);
  spec.gamma_n = 0.0;
  return spec;
}

double BumpFamilySpec::density(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != d) {
    throw std::invalid_argument("density: dimension mismatch");
  }
  if (gamma_n == 0.0) return 1.0;
  // x lies in exactly one cell; only that bump can contribute.
  std::uint64_t flat = 0;
  double prod = 1.0;
  const double j = static_cast<double>(grid);
  for (int m = 0; m < d; ++m) {
    auto cell = static_cast<std::uint32_t>(x[m] * j);
    if (cell >= grid) cell = grid - 1;
    flat = flat * grid + cell;
    prod *= psi(j * x[m] - static_cast<double>(cell));
  }
  if (!nu[flat]) return 1.0;
  return 1.0 + gamma_n / std::pow(j, beta) * prod;
}

double BumpFamilySpec::envelope() const {
  const auto& m = psi_moments();
  return 1.0 +
         gamma_n * std::pow(m.sup, d) / std::pow(static_cast<double>(grid),
                                                 beta);
}

std::string BumpFamilySpec::to_json() const {
  nlohmann::json out;
  out["d"] = d;
  out["grid"] = grid;
  out["beta"] = beta;
  out["nu"] = nu;
  out["gamma_n"] = gamma_n;
  const auto& m = psi_moments();
  out["psi_norms"] = {{"l1", m.l1},
                      {"l2_sq", m.l2_sq},
                      {"sup", m.sup},
                      {"tolerance", 1e-8}};
  return out.dump();
}

BumpFamilySpec BumpFamilySpec::from_json(const std::string& text) {
  const auto in = nlohmann::json::parse(text);
  BumpFamilySpec spec;
  spec.d = in.at("d").get<int>();
  spec.grid = in.at("grid").get<std::uint32_t>();
  spec.beta = in.at("beta").get<int>();
  spec.nu = in.at("nu").get<std::vector<std::uint8_t>>();
  spec.gamma_n = in.at("gamma_n").get<double>();
  if (spec.nu.size() != spec.cell_count()) {
    throw std::invalid_argument("BumpFamilySpec: nu size mismatch");
  }
  return spec;
}

void sample_point(const BumpFamilySpec& spec, Xoshiro256& rng,
                  std::span<double> x_out) {
  const double m = spec.envelope();
  for (;;) {
    for (int i = 0; i < spec.d; ++i) x_out[i] = rng.uniform();
    if (spec.gamma_n == 0.0) return;
    const double u = rng.uniform();
    if (u * m <= spec.density(std::span<const double>(x_out.data(),
                                                      x_out.size()))) {
      return;
    }
  }
}

std::vector<std::vector<double>> sample_density(const BumpFamilySpec& spec,
                                                std::uint64_t n,
                                                Xoshiro256& rng) {
  std::vector<std::vector<double>> points(n, std::vector<double>(spec.d));
  for (auto& x : points) sample_point(spec, rng, x);
  return points;
}

CoefficientTable true_coefficients(const BumpFamilySpec& spec,
                                   std::uint32_t j_max) {
  CoefficientTable table(spec.d);
  MultiIndex ones(static_cast<std::size_t>(spec.d), 1);
  table.set(ones, 1.0);
  if (spec.gamma_n == 0.0) return table;

  // Per-axis integrals int_0^1 psi(y) phi_j((y + c - 1)/J) dy / J for basis
  // index j and cell coordinate c; the d-dimensional coefficient of one bump
  // factorizes into these.
  const double j_grid = static_cast<double>(spec.grid);
  std::vector<std::vector<double>> axis_integral(
      spec.grid, std::vector<double>(j_max));
  for (std::uint32_t c = 1; c <= spec.grid; ++c) {
    // Basis index 1 is the constant function and int psi = 0, exactly.
    axis_integral[c - 1][0] = 0.0;
    for (std::uint32_t j = 2; j <= j_max; ++j) {
      axis_integral[c - 1][j - 1] =
          integrate(
              [&](double y) {
                return psi(y) *
                       eval_basis_1d(j, (y + static_cast<double>(c) - 1.0) /
                                            j_grid);
              },
              0.0, 1.0, 1e-12) /
          j_grid;
    }
  }

  const double scale = spec.gamma_n / std::pow(j_grid, spec.beta);
  // Walk the active cells; accumulate each Fourier index.
  std::vector<std::uint32_t> cell(static_cast<std::size_t>(spec.d), 1);
  std::uint64_t flat = 0;
  std::vector<double> accum(static_cast<std::size_t>(std::pow(
                                static_cast<double>(j_max), spec.d)),
                            0.0);
  for (;;) {
    if (spec.nu[flat]) {
      // Tensor product over Fourier indices.
      MultiIndex j(static_cast<std::size_t>(spec.d), 1);
      std::size_t pos = 0;
      for (;;) {
        double prod = 1.0;
        for (int m = 0; m < spec.d; ++m) {
          prod *= axis_integral[cell[m] - 1][j[m] - 1];
        }
        accum[pos++] += prod;
        int axis = spec.d - 1;
        while (axis >= 0 && j[axis] == j_max) {
          j[axis] = 1;
          --axis;
        }
        if (axis < 0) break;
        ++j[axis];
      }
    }
    int axis = spec.d - 1;
    while (axis >= 0 && cell[axis] == spec.grid) {
      cell[axis] = 1;
      --axis;
    }
    if (axis < 0) break;
    ++cell[axis];
    flat = 0;
    for (int m = 0; m < spec.d; ++m) {
      flat = flat * spec.grid + (cell[m] - 1);
    }
  }

  MultiIndex j(static_cast<std::size_t>(spec.d), 1);
  std::size_t pos = 0;
  for (;;) {
    const double value = scale * accum[pos++];
    if (value != 0.0) table.add(j, value);
    int axis = spec.d - 1;
    while (axis >= 0 && j[axis] == j_max) {
      j[axis] = 1;
      --axis;
    }
    if (axis < 0) break;
    ++j[axis];
  }
  return table;
}

MembershipReport sobolev_membership_check(const BumpFamilySpec& spec,
                                          int beta, double r) {
  const auto& m = psi_moments();
  const double deriv_sq =
      beta <= 4 ? m.deriv_l2_sq[beta]
                : 2.0 * integrate(
                            [beta](double t) {
                              const double v = psi_derivative(beta, t);
                              return v * v;
                            },
                            0.0, 0.5, 1e-10);
  std::uint64_t active = 0;
  for (auto v : spec.nu) active += v;
  const double j_grid = static_cast<double>(spec.grid);
  const double amp_sq = spec.gamma_n * spec.gamma_n /
                        std::pow(j_grid, 2.0 * spec.beta);
  const double cells = static_cast<double>(active) /
                       std::pow(j_grid, spec.d);
  // Disjoint supports: int f^2 = 1 + amp^2 sum_j int G_j^2, and the cross
  // term vanishes because int G_j = 0.
  MembershipReport report;
  report.c1_sq = 1.0 + amp_sq * cells * std::pow(m.l2_sq, spec.d);
  report.c2_sq = amp_sq * cells * std::pow(j_grid, 2.0 * beta) * deriv_sq *
                 std::pow(m.l2_sq, spec.d - 1);
  report.margin = r * r - spec.d * (report.c1_sq + report.c2_sq);
  report.member = report.margin >= -1e-12 * r * r;
  return report;
}

MembershipReport sobolev_membership_check(
    const std::function<double(std::span<const double>)>& f,
    const std::function<double(int axis, std::span<const double>)>& f_deriv,
    int d, int beta, double r) {
  if (d < 1 || d > 2) {
    throw std::invalid_argument("handle membership check supports d <= 2");
  }
  const auto integrate_2d = [&](auto&& g) {
    if (d == 1) {
      return integrate([&](double t) { return g(std::span<const double>(&t, 1)); },
                       0.0, 1.0, 1e-10);
    }
    return integrate(
        [&](double t0) {
          return integrate(
              [&](double t1) {
                const double pt[2] = {t0, t1};
                return g(std::span<const double>(pt, 2));
              },
              0.0, 1.0, 1e-10);
        },
        0.0, 1.0, 1e-9);
  };
  MembershipReport report;
  report.c1_sq = integrate_2d([&](std::span<const double> x) {
    const double v = f(x);
    return v * v;
  });
  report.c2_sq = 0.0;
  for (int axis = 0; axis < d; ++axis) {
    const double val = integrate_2d([&](std::span<const double> x) {
      const double v = f_deriv(axis, x);
      return v * v;
    });
    report.c2_sq = std::max(report.c2_sq, val);
  }
  (void)beta;
  report.margin = r * r - d * (report.c1_sq + report.c2_sq);
  report.member = report.margin >= -1e-12 * r * r;
  return report;
}

MembershipReport discriminator_membership_check(int d, std::uint32_t grid,
                                                int delta, double eta) {
  const auto& m = psi_moments();
  const double deriv_sq =
      delta <= 4 ? m.deriv_l2_sq[delta]
                 : 2.0 * integrate(
                             [delta](double t) {
                               const double v = psi_derivative(delta, t);
                               return v * v;
                             },
                             0.0, 0.5, 1e-10);
  const double j_grid = static_cast<double>(grid);
  // Worst case |lambda_j| = 1 on every cell.
  const double amp_sq = eta * eta / std::pow(j_grid, 2.0 * delta);
  MembershipReport report;
  report.c1_sq = amp_sq * std::pow(m.l2_sq, d);
  report.c2_sq = amp_sq * std::pow(j_grid, 2.0 * delta) * deriv_sq *
                 std::pow(m.l2_sq, d - 1);
  report.margin = 1.0 - d * (report.c1_sq + report.c2_sq);
  report.member = report.margin >= -1e-12;
  return report;
}

}  // namespace ldpdens
