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

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails. Criteria 4-6 and 8 are
// statistical: they run seeded Monte Carlo sweeps and compare fitted rate
// exponents and paired risks at fixed tolerances.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "ldpdens/adaptive.hpp"
#include "ldpdens/estimator.hpp"
#include "ldpdens/fourier.hpp"
#include "ldpdens/harness.hpp"
#include "ldpdens/mechanism.hpp"
#include "ldpdens/quadrature.hpp"
#include "ldpdens/schedule.hpp"
#include "ldpdens/testbed.hpp"

using namespace ldpdens;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail, double seconds) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": "
            << name << " — " << detail << " (" << seconds << " s)"
            << std::endl;
  if (!pass) ++g_failures;
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

BlockSchedule allocated(std::uint32_t j, int d, double alpha, double delta) {
  return allocate_budget(dyadic_partition(j, d), alpha,
                         SobolevParams(d, delta, 1.0));
}

// ---------------------------------------------------------------------------
// 1. Exact privacy by channel enumeration, plus the corrupted-pi control.
void criterion1() {
  Timer timer;
  const double b0 = std::sqrt(2.0);
  double worst_excess = -1e300;
  bool pass = true;
  Xoshiro256 rng(0xC1);
  for (std::uint64_t k : {1ull, 2ull, 4ull, 8ull}) {
    const double budget = 0.1 + 0.15 * static_cast<double>(k);
    const auto params = ChannelParams::make(k, budget, b0);
    for (int pair = 0; pair < 50; ++pair) {
      std::vector<double> phi_a(k), phi_b(k);
      for (auto& v : phi_a) v = b0 * (2.0 * rng.uniform() - 1.0);
      for (auto& v : phi_b) v = b0 * (2.0 * rng.uniform() - 1.0);
      const auto pmf_a = channel_pmf(params, phi_a);
      const auto pmf_b = channel_pmf(params, phi_b);
      for (std::size_t z = 0; z < pmf_a.size(); ++z) {
        const double excess = std::log(pmf_a[z] / pmf_b[z]) - budget;
        worst_excess = std::max(worst_excess, excess);
        pass = pass && excess <= 1e-10;
      }
    }
  }
  // Negative control: pi inflated to e^{2a}/(1+e^{2a}) must violate.
  const double a = 0.5;
  const auto params = ChannelParams::make(2, a, b0);
  const double corrupted = std::exp(2 * a) / (1 + std::exp(2 * a));
  std::vector<double> hi = {b0, b0}, lo = {-b0, -b0};
  const auto pmf_hi = channel_pmf(params, hi, corrupted);
  const auto pmf_lo = channel_pmf(params, lo, corrupted);
  double control = 0.0;
  for (std::size_t z = 0; z < pmf_hi.size(); ++z) {
    control = std::max(control, std::log(pmf_hi[z] / pmf_lo[z]));
  }
  const bool control_fails = control > a + 1e-10;
  pass = pass && control_fails;
  std::ostringstream detail;
  detail << "max log-ratio excess " << worst_excess
         << "; corrupted-pi control excess " << control - a;
  report(1, "exact LDP on enumerable blocks", pass, detail.str(),
         timer.seconds());
}

// ---------------------------------------------------------------------------
// 2. Conditional unbiasedness and the deterministic magnitude cap.
void criterion2() {
  Timer timer;
  const auto schedule = allocated(15, 1, 1.0, 1.0);  // block sizes 1,2,4,8
  Privatizer privatizer(schedule);
  const std::vector<double> x = {0.3};
  std::vector<double> phi(schedule.coefficient_count());
  privatizer.eval_phi(x, phi);
  const std::uint64_t draws = 1000000;
  std::vector<double> mean(phi.size(), 0.0);
  std::vector<double> z(phi.size());
  bool magnitude_ok = true;
  std::vector<double> caps(schedule.blocks().size());
  for (std::size_t b = 0; b < schedule.blocks().size(); ++b) {
    caps[b] = magnitude_bound(schedule.blocks()[b].size,
                              schedule.blocks()[b].budget, 1.0, 1);
  }
  for (std::uint64_t i = 0; i < draws; ++i) {
    privatizer.privatize_record(x, 0xC2, i, z);
    for (std::size_t c = 0; c < z.size(); ++c) mean[c] += z[c];
    for (std::size_t b = 0; b < schedule.blocks().size(); ++b) {
      const auto& block = schedule.blocks()[b];
      for (std::uint64_t c = 0; c < block.size; ++c) {
        magnitude_ok =
            magnitude_ok && std::abs(z[block.offset + c]) <= caps[b];
      }
    }
  }
  bool mean_ok = true;
  double worst_t = 0.0;
  for (std::size_t b = 0; b < schedule.blocks().size(); ++b) {
    const auto& block = schedule.blocks()[b];
    const double tolerance = 4.0 * caps[b] / 1000.0;  // 4 sd over 1e6 draws
    for (std::uint64_t c = 0; c < block.size; ++c) {
      const std::size_t idx = block.offset + c;
      mean[idx] /= static_cast<double>(draws);
      const double deviation = std::abs(mean[idx] - phi[idx]);
      worst_t = std::max(worst_t, 4.0 * deviation / tolerance);
      mean_ok = mean_ok && deviation <= tolerance;
    }
  }
  std::ostringstream detail;
  detail << "worst |mean-phi| z-score " << worst_t << " (cap 4); magnitudes "
         << (magnitude_ok ? "all" : "NOT all") << " within bound";
  report(2, "unbiasedness and magnitude cap at 1e6 draws",
         mean_ok && magnitude_ok, detail.str(), timer.seconds());
}

// ---------------------------------------------------------------------------
// 3. Variance-bound dominance over a 12-configuration grid.
void criterion3() {
  Timer timer;
  bool pass = true;
  double worst_ratio = 0.0;
  const int replications = 200;
  std::ostringstream grid_log;
  for (int d : {1, 2}) {
    for (double ratio : {0.5, 1.0, 2.0}) {
      for (std::uint64_t n : {1000ull, 10000ull}) {
        const double delta = ratio * d;
        const SobolevParams beta_p(d, 1.0, 1.0);
        const SobolevParams delta_p(d, delta, 1.0);
        const auto choice = theoretical_j(n, 1.0, beta_p, delta_p);
        const auto schedule = allocated(choice.j, d, 1.0, delta);
        const double bound = variance_bound(schedule, n, 1.0);
        CoefficientTable truth(d);
        truth.set(MultiIndex(static_cast<std::size_t>(d), 1), 1.0);
        double mean_risk = 0.0;
        std::vector<double> x(static_cast<std::size_t>(d));
        std::vector<double> z(schedule.coefficient_count());
        for (int rep = 0; rep < replications; ++rep) {
          Privatizer privatizer(schedule);
          Aggregator agg(schedule);
          const std::uint64_t key =
              derive_key(derive_key(0xC3, d * 1000 + static_cast<int>(10 * ratio)),
                         derive_key(n, rep));
          Xoshiro256 sample_rng(derive_key(key, 1));
          for (std::uint64_t i = 0; i < n; ++i) {
            for (auto& v : x) v = sample_rng.uniform();
            privatizer.privatize_record(x, key, i, z);
            agg.consume(z);
          }
          mean_risk += projection_error(agg.finish(), truth, delta_p);
        }
        mean_risk /= replications;
        worst_ratio = std::max(worst_ratio, mean_risk / bound);
        pass = pass && mean_risk <= bound;
      }
    }
  }
  std::ostringstream detail;
  detail << "max empirical/bound ratio " << worst_ratio << " over 12 configs";
  report(3, "variance-bound dominance (Monte Carlo vs tau Sigma_J)", pass,
         detail.str(), timer.seconds());
}

// ---------------------------------------------------------------------------
// 4. Sub-critical rate recovery: d=1, beta=1, delta=0.5.
void criterion4() {
  Timer timer;
  ExperimentSpec spec;
  // Hard two-shell truth: spectral spikes just above the dyadic truncations,
  // the worst-case-style instance for the sub-critical regime (the paper's
  // lower-bound families concentrate spectral mass the same way).
  spec.truth.kind = "coefficient";
  spec.truth.spikes = {{{4}, 0.55}, {{8}, 0.15}};
  spec.d = 1;
  spec.beta = 1.0;
  spec.delta = 0.5;
  spec.radius = 2.7;  // covers the spike mass: 1 + 16*0.3025 + 64*0.0225
  spec.a_max = 1.0;
  spec.alpha = 1.0;
  for (int p = 10; p <= 18; ++p) spec.n_grid.push_back(1ull << p);
  spec.replications = 100;
  spec.seed = 0xC4;
  const auto result = run(spec);
  const auto fit = fit_rate(result);
  const double target = -0.375;
  const bool pass = std::abs(fit.slope - target) <= 0.08;
  std::ostringstream detail;
  detail << "fitted slope " << fit.slope << " (se " << fit.slope_se
         << ") vs " << target << " +- 0.08";
  report(4, "rate recovery, sub-critical", pass, detail.str(),
         timer.seconds());
}

// ---------------------------------------------------------------------------
// 5. Super-critical rate recovery: d=1, beta=1, delta=2.
RunResult criterion5() {
  Timer timer;
  ExperimentSpec spec;
  spec.truth.kind = "uniform";  // zero-bias instance; the variance term
                                // carries the (n a^2)^{-1/2} rate
  spec.d = 1;
  spec.beta = 1.0;
  spec.delta = 2.0;
  spec.radius = std::sqrt(2.0);
  spec.a_max = 1.0;
  spec.alpha = 1.0;
  for (int p = 10; p <= 18; ++p) spec.n_grid.push_back(1ull << p);
  spec.replications = 100;
  spec.seed = 0xC5;
  const auto result = run(spec);
  const auto fit = fit_rate(result);
  const double target = -0.5;
  const bool pass = std::abs(fit.slope - target) <= 0.08;
  std::ostringstream detail;
  detail << "fitted slope " << fit.slope << " (se " << fit.slope_se
         << ") vs " << target << " +- 0.08";
  report(5, "rate recovery, super-critical", pass, detail.str(),
         timer.seconds());
  return result;
}

// ---------------------------------------------------------------------------
// 6. Block vs comparator separation in the super-critical regime.
void criterion6(const RunResult& block_result) {
  Timer timer;
  ExperimentSpec spec = block_result.spec;
  spec.mechanism = "global";
  spec.seed = 0xC5;  // paired truths and sample streams
  const auto global_result = run(spec);
  const auto fit = fit_rate(global_result);
  const double target = -3.0 / 7.0;
  const bool slope_ok = std::abs(fit.slope - target) <= 0.08;
  bool separation_ok = true;
  std::ostringstream sep_log;
  for (std::size_t i = 0; i < global_result.per_n.size(); ++i) {
    const auto& b = block_result.per_n[i];
    const auto& g = global_result.per_n[i];
    if (b.n < (1ull << 14)) continue;
    const double se =
        std::sqrt(b.se_mid * b.se_mid + g.se_mid * g.se_mid);
    const double z = (g.mean_mid - b.mean_mid) / se;
    sep_log << " n=2^" << static_cast<int>(std::log2(double(b.n))) << " z="
            << z;
    separation_ok = separation_ok && z > 2.0;
  }
  std::ostringstream detail;
  detail << "comparator slope " << fit.slope << " vs " << target
         << " +- 0.08; separation z-scores:" << sep_log.str();
  report(6, "block vs global separation", slope_ok && separation_ok,
         detail.str(), timer.seconds());
}

// ---------------------------------------------------------------------------
// 7. Concentration: the deviation bound is never beaten by more than 3 SE.
void criterion7() {
  Timer timer;
  const auto schedule = allocated(7, 1, 1.0, 1.0);
  const auto truth = BumpFamilySpec::dense(1, 2, 1, std::sqrt(2.0));
  const auto report_data =
      concentration_check(schedule, 1000, 1.0, 1.0, truth, 2000, 0xC7);
  std::ostringstream detail;
  detail << "exceedance(empirical vs bound):";
  for (const auto& point : report_data.points) {
    detail << " t=" << point.t << ": " << point.empirical << "/"
           << point.bound;
  }
  report(7, "concentration tail bound", report_data.pass, detail.str(),
         timer.seconds());
}

// ---------------------------------------------------------------------------
// 8. Adaptive oracle factor and the adaptive rate exponent.
void criterion8() {
  Timer timer;
  const std::uint64_t n_star = 1ull << 14;
  bool oracle_ok = true;
  std::ostringstream oracle_log;
  const char* names[3] = {"dense", "sparse", "uniform"};
  for (int mode = 0; mode < 3; ++mode) {
    ExperimentSpec spec;
    spec.truth.kind = mode == 2 ? "uniform" : "bump";
    spec.truth.pattern = mode == 1 ? "sparse" : "dense";
    spec.truth.grid = 2;
    spec.d = 1;
    spec.beta = 1.0;
    spec.delta = 2.0;
    spec.radius = std::sqrt(2.0);
    spec.a_max = 1.0;
    spec.alpha = 1.0;
    spec.n_grid = {n_star};
    spec.selector = "adaptive";
    spec.replications = 20;
    spec.seed = 0xC80 + mode;
    const auto result = run(spec);
    const auto& g = result.per_n[0];
    double best_fixed = 1e300;
    for (const auto& [j, risk] : g.model_mean_mid) {
      best_fixed = std::min(best_fixed, risk);
    }
    const double factor = g.mean_mid / best_fixed;
    oracle_log << " " << names[mode] << ": factor " << factor;
    oracle_ok = oracle_ok && factor <= 3.0;
  }

  // Adaptive rate exponent on the dense truth over a budget grid.
  ExperimentSpec sweep;
  sweep.truth.kind = "bump";
  sweep.truth.pattern = "dense";
  sweep.truth.grid = 2;
  sweep.d = 1;
  sweep.beta = 1.0;
  sweep.delta = 2.0;
  sweep.radius = std::sqrt(2.0);
  sweep.a_max = 1.0;
  sweep.alpha = 1.0;
  for (int p = 9; p <= 14; ++p) sweep.n_grid.push_back(1ull << p);
  sweep.selector = "adaptive";
  sweep.replications = 20;
  sweep.seed = 0xC84;
  const auto sweep_result = run(sweep);
  const auto fit = fit_rate_log_corrected(sweep_result);
  const bool slope_ok = std::abs(fit.slope - fit.theoretical) <= 0.1;

  std::ostringstream detail;
  detail << "oracle factors (cap 3):" << oracle_log.str()
         << "; log-corrected slope " << fit.slope << " vs "
         << fit.theoretical << " +- 0.1";
  report(8, "adaptive oracle and rate", oracle_ok && slope_ok, detail.str(),
         timer.seconds());
}

// ---------------------------------------------------------------------------
// 9. Deterministic property suite (no Monte Carlo).
void criterion9() {
  Timer timer;
  bool pass = true;
  std::ostringstream detail;

  // Gamma table and growth cap.
  pass = pass && gamma_k(1) == 1.0 && gamma_k(2) == 2.0;
  for (std::uint64_t k = 1; k <= 64; ++k) {
    pass = pass && gamma_k(k) <= 2.0 * std::sqrt(static_cast<double>(k));
  }

  // Partition exactness and budget conservation.
  for (std::uint32_t j : {1u, 3u, 7u, 15u}) {
    for (int d = 1; d <= (j <= 7 ? 3 : 2); ++d) {
      const auto schedule = allocated(j, d, 0.7, 1.4);
      std::set<MultiIndex> seen;
      double budget = 0.0;
      for (const auto& block : schedule.blocks()) {
        budget += block.budget;
        for (const auto& index : block.indices()) {
          pass = pass && seen.insert(index).second;
        }
      }
      std::uint64_t expected = 1;
      for (int m = 0; m < d; ++m) expected *= j;
      pass = pass && seen.size() == expected;
      pass = pass && std::abs(budget - 0.7) <= 1e-12;
    }
  }

  // Closed-form adversarial distance vs the dual oracle at 1e-12.
  {
    Xoshiro256 rng(0xC9);
    const SobolevParams delta(2, 1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      CoefficientTable diff(2);
      CoefficientTable maximizer(2);
      for (std::uint32_t a = 1; a <= 3; ++a) {
        for (std::uint32_t b = 1; b <= 3; ++b) {
          const double value = 2.0 * rng.uniform() - 1.0;
          diff.set({a, b}, value);
          maximizer.set({a, b}, value / sobolev_weight({a, b}, delta));
        }
      }
      const double closed = adversarial_distance(diff, delta);
      const double norm = std::sqrt(sobolev_norm_sq(maximizer, delta));
      double attained = 0.0;
      for (const auto& [j, theta] : diff.entries()) {
        attained += theta * maximizer.at(j) / norm;
      }
      pass = pass && std::abs(attained - closed) <= 1e-12;
    }
  }

  // Sigma closed-form identity.
  for (std::uint32_t j : {1u, 3u, 7u, 15u}) {
    for (double delta : {0.5, 1.0, 2.0, 3.0}) {
      const auto schedule = allocated(j, 1, 0.9, delta);
      const auto terms = sigma_terms(schedule, 5000);
      pass = pass &&
             std::abs(terms.total - terms.closed_form) <=
                 1e-10 * std::max(1.0, terms.total);
    }
  }

  // Model collection cardinality formula.
  for (double budget : {2.0, 7.0, 100.0, 1024.0, 99999.0}) {
    const auto n = static_cast<std::uint64_t>(budget);
    const auto collection = model_collection(n, 1.0);
    const auto expected = static_cast<std::size_t>(
        std::floor(std::log2(1.0 + static_cast<double>(n))));
    pass = pass && collection.js.size() == expected;
  }

  // Bump moment identities by quadrature: p in {1,2}, J in {1,2,4}, d=1
  // plus one two-dimensional check (see unit tests for the rest).
  const auto& m = psi_moments();
  for (std::uint32_t grid : {1u, 2u, 4u}) {
    const std::vector<std::uint32_t> cell = {1};
    const double hi = 1.0 / grid;
    const double l1 = integrate(
        [&](double t) {
          return std::abs(bump_g(cell, grid, std::span<const double>(&t, 1)));
        },
        0.0, hi, 1e-12);
    const double l2 = integrate(
        [&](double t) {
          const double g = bump_g(cell, grid, std::span<const double>(&t, 1));
          return g * g;
        },
        0.0, hi, 1e-12);
    const double zero = integrate(
        [&](double t) {
          return bump_g(cell, grid, std::span<const double>(&t, 1));
        },
        0.0, hi, 1e-12);
    pass = pass && std::abs(l1 - m.l1 / grid) <= 1e-7;
    pass = pass && std::abs(l2 - m.l2_sq / grid) <= 1e-7;
    pass = pass && std::abs(zero) <= 1e-8;
  }

  detail << "gamma table, partitions, dual oracle, Sigma identity, model "
            "cardinality, bump moments";
  report(9, "deterministic property suite", pass, detail.str(),
         timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const auto want = [&](int id) { return only.empty() || only.count(id); };

  if (want(1)) criterion1();
  if (want(2)) criterion2();
  if (want(3)) criterion3();
  if (want(4)) criterion4();
  RunResult block5;
  if (want(5) || want(6)) block5 = criterion5();
  if (want(6)) criterion6(block5);
  if (want(7)) criterion7();
  if (want(8)) criterion8();
  if (want(9)) criterion9();

  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                : std::to_string(g_failures) +
                                      " CRITERIA FAILED")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
