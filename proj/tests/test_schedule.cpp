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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "doctest.h"
#include "ldpdens/rng.hpp"
#include "ldpdens/schedule.hpp"

using namespace ldpdens;

TEST_CASE("dyadic partition shapes") {
  const auto single = dyadic_partition(1, 1);
  CHECK(single.blocks().size() == 1);
  CHECK(single.blocks()[0].size == 1);

  const auto two = dyadic_partition(3, 1);
  REQUIRE(two.blocks().size() == 2);
  CHECK(two.blocks()[0].size == 1);
  CHECK(two.blocks()[1].size == 2);
  CHECK(two.blocks()[1].lo[0] == 2);
  CHECK(two.blocks()[1].hi[0] == 3);

  const auto grid = dyadic_partition(3, 2);
  REQUIRE(grid.blocks().size() == 4);
  std::multiset<std::uint64_t> sizes;
  std::uint64_t total = 0;
  for (const auto& block : grid.blocks()) {
    sizes.insert(block.size);
    total += block.size;
  }
  CHECK(sizes == std::multiset<std::uint64_t>({1, 2, 2, 4}));
  CHECK(total == 9);

  CHECK_THROWS_AS(dyadic_partition(4, 1), std::invalid_argument);
  CHECK_THROWS_AS(dyadic_partition(0, 1), std::invalid_argument);
}

TEST_CASE("partition exactness up to J=15, d=3") {
  for (std::uint32_t j : {1u, 3u, 7u, 15u}) {
    for (int d = 1; d <= 3; ++d) {
      if (d == 3 && j > 7) continue;  // 15^3 covered below for d <= 2 speed
      const auto schedule = dyadic_partition(j, d);
      std::set<MultiIndex> seen;
      for (const auto& block : schedule.blocks()) {
        for (const auto& index : block.indices()) {
          CHECK(seen.insert(index).second);  // disjoint
          for (auto c : index) {
            CHECK(c >= 1);
            CHECK(c <= j);
          }
        }
      }
      std::uint64_t expect = 1;
      for (int m = 0; m < d; ++m) expect *= j;
      CHECK(seen.size() == expect);  // exhaustive
    }
  }
  const auto big = dyadic_partition(15, 3);
  std::uint64_t total = 0;
  for (const auto& block : big.blocks()) total += block.size;
  CHECK(total == 15ULL * 15 * 15);
}

TEST_CASE("exactly one odd block") {
  for (std::uint32_t j : {1u, 3u, 7u, 15u}) {
    for (int d = 1; d <= 3; ++d) {
      const auto schedule = dyadic_partition(j, d);
      int odd = 0;
      for (const auto& block : schedule.blocks()) {
        if (block.size % 2 == 1) {
          ++odd;
          for (auto l : block.label) CHECK(l == 0);
        }
      }
      CHECK(odd == 1);
    }
  }
}

TEST_CASE("budget allocation") {
  SUBCASE("uniform split at delta = d") {
    for (int d = 1; d <= 2; ++d) {
      const auto schedule = allocate_budget(
          dyadic_partition(7, d), 0.8, SobolevParams(d, static_cast<double>(d), 1.0));
      const double expect = 0.8 / std::pow(3.0, d);
      for (const auto& block : schedule.blocks()) {
        CHECK(block.budget == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
  SUBCASE("single block takes everything") {
    const auto schedule =
        allocate_budget(dyadic_partition(1, 2), 0.3, SobolevParams(2, 1.0, 1.0));
    CHECK(schedule.blocks()[0].budget == doctest::Approx(0.3));
  }
  SUBCASE("worked example d=1 J=3 delta=3") {
    const auto schedule =
        allocate_budget(dyadic_partition(3, 1), 1.0, SobolevParams(1, 3.0, 1.0));
    CHECK(schedule.blocks()[0].budget == doctest::Approx(2.0 / 3.0));
    CHECK(schedule.blocks()[1].budget == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("budget conservation and monotone direction") {
  Xoshiro256 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(2));
    const std::uint32_t j = (1u << (1 + rng.below(3))) - 1;
    const double delta_over_d =
        (trial % 2 == 0) ? 0.3 + rng.uniform() * 0.6 : 1.2 + rng.uniform();
    const double delta = delta_over_d * d;
    const double alpha = 0.1 + rng.uniform() * 2.0;
    const auto schedule = allocate_budget(dyadic_partition(j, d), alpha,
                                          SobolevParams(d, delta, 1.0));
    double sum = 0.0;
    for (const auto& block : schedule.blocks()) {
      CHECK(block.budget > 0.0);
      sum += block.budget;
    }
    CHECK(sum == doctest::Approx(alpha).epsilon(1e-12));

    // delta < d: budgets nondecreasing in block size; delta > d: reversed.
    for (const auto& a : schedule.blocks()) {
      for (const auto& b : schedule.blocks()) {
        if (a.size < b.size) {
          if (delta < d) CHECK(a.budget <= b.budget + 1e-15);
          if (delta > d) CHECK(a.budget >= b.budget - 1e-15);
        }
      }
    }
  }
}

TEST_CASE("normalizer factorizes over axes") {
  for (int d = 1; d <= 3; ++d) {
    for (std::uint32_t j : {1u, 3u, 7u}) {
      for (double delta : {0.5 * d, 1.0 * d, 2.5 * d}) {
        const SobolevParams params(d, delta, 1.0);
        const auto schedule = dyadic_partition(j, d);
        const double direct = allocation_normalizer(schedule, params);
        const int levels = static_cast<int>(std::log2(j + 1));
        double axis = 0.0;
        for (int l = 0; l < levels; ++l) {
          axis += std::exp2(l * (1.0 - delta / d) / 2.0);
        }
        CHECK(direct == doctest::Approx(std::pow(axis, d)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("sigma terms and the closed-form identity") {
  SUBCASE("single block") {
    const auto schedule =
        allocate_budget(dyadic_partition(1, 1), 1.0, SobolevParams(1, 1.0, 1.0));
    const auto terms = sigma_terms(schedule, 100);
    CHECK(terms.total == doctest::Approx(0.1));
    CHECK(terms.closed_form == doctest::Approx(0.1));
  }
  SUBCASE("worked example d=1 J=3 delta=1 n=400") {
    const auto schedule =
        allocate_budget(dyadic_partition(3, 1), 1.0, SobolevParams(1, 1.0, 1.0));
    const auto terms = sigma_terms(schedule, 400);
    CHECK(terms.total == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(terms.closed_form == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("identity holds for random configurations") {
    Xoshiro256 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
      const int d = 1 + static_cast<int>(rng.below(2));
      const std::uint32_t j = (1u << (1 + rng.below(4))) - 1;
      const double delta = (0.25 + rng.uniform() * 3.0) * d;
      const double alpha = 0.2 + rng.uniform();
      const auto n = 100 + rng.below(100000);
      const auto schedule = allocate_budget(dyadic_partition(j, d), alpha,
                                            SobolevParams(d, delta, 1.0));
      const auto terms = sigma_terms(schedule, n);
      CHECK(terms.total ==
            doctest::Approx(terms.closed_form).epsilon(1e-10));
    }
  }
  SUBCASE("unallocated schedule is rejected") {
    CHECK_THROWS_AS(sigma_terms(dyadic_partition(3, 1), 100),
                    std::invalid_argument);
  }
}

TEST_CASE("anisotropic partition") {
  SUBCASE("isotropic reduction") {
    const SobolevParams iso2(2, 1.0, 1.0);
    const auto aniso = anisotropic_partition(3, iso2, iso2);
    const auto dyadic = dyadic_partition(3, 2);
    REQUIRE(aniso.blocks().size() == dyadic.blocks().size());
    for (std::size_t b = 0; b < aniso.blocks().size(); ++b) {
      CHECK(aniso.blocks()[b].size == dyadic.blocks()[b].size);
      CHECK(aniso.blocks()[b].lo == dyadic.blocks()[b].lo);
    }
  }
  SUBCASE("floor formulas for mixed smoothness") {
    const SobolevParams beta({1.0, 2.0}, 1.0);
    const SobolevParams delta({0.5, 1.0}, 1.0);  // same anisotropy
    const auto schedule = anisotropic_partition(7, beta, delta);
    // beta harmonic mean = 4/3; exponents 4/3 and 2/3.
    const int l0 = static_cast<int>(
                       std::floor(std::log2(std::pow(7.0, 4.0 / 3.0) + 1))) -
                   1;
    const int l1 = static_cast<int>(
                       std::floor(std::log2(std::pow(7.0, 2.0 / 3.0) + 1))) -
                   1;
    CHECK(schedule.per_axis_bound()[0] == (1u << (l0 + 1)) - 1);
    CHECK(schedule.per_axis_bound()[1] == (1u << (l1 + 1)) - 1);
    // The floor formula rounds down to the dyadic grid, giving the order
    // sandwich J^{b/b_m}/3 <= J_m <= J^{b/b_m} (and equality on dyadic
    // targets, which is what the isotropic reduction needs).
    CHECK(schedule.per_axis_bound()[0] >= std::pow(7.0, 4.0 / 3.0) / 3 - 1e-9);
    CHECK(schedule.per_axis_bound()[0] <= std::pow(7.0, 4.0 / 3.0) + 1e-9);
    CHECK(schedule.per_axis_bound()[1] >= std::pow(7.0, 2.0 / 3.0) / 3 - 1e-9);
    CHECK(schedule.per_axis_bound()[1] <= std::pow(7.0, 2.0 / 3.0) + 1e-9);
  }
  SUBCASE("single block per axis at J=1") {
    const SobolevParams beta(2, 2.0, 1.0);
    const auto schedule = anisotropic_partition(1, beta, beta);
    CHECK(schedule.blocks().size() == 1);
  }
  SUBCASE("anisotropy mismatch rejected") {
    const SobolevParams beta({1.0, 2.0}, 1.0);
    const SobolevParams delta({1.0, 1.0}, 1.0);
    CHECK_THROWS_AS(anisotropic_partition(7, beta, delta),
                    std::invalid_argument);
  }
}

TEST_CASE("anisotropic budget identity") {
  const SobolevParams beta({1.0, 2.0}, 1.0);
  const SobolevParams delta({0.75, 1.5}, 1.0);
  auto schedule = anisotropic_partition(7, beta, delta);
  schedule = allocate_budget(schedule, 0.7, delta);
  double sum = 0.0;
  for (const auto& block : schedule.blocks()) sum += block.budget;
  CHECK(sum == doctest::Approx(0.7).epsilon(1e-12));
  const auto terms = sigma_terms(schedule, 5000);
  CHECK(terms.total == doctest::Approx(terms.closed_form).epsilon(1e-10));
}

TEST_CASE("theoretical truncation choice") {
  const SobolevParams beta1(1, 1.0, 1.0);
  SUBCASE("super-critical example") {
    const auto choice = theoretical_j(256, 1.0, beta1, SobolevParams(1, 2.0, 1.0));
    CHECK(choice.regime == RateRegime::kSuper);
    CHECK(choice.target == doctest::Approx(std::pow(256.0, 1.0 / 6.0)));
    CHECK(choice.j == 1);
  }
  SUBCASE("sub-critical example") {
    const auto choice =
        theoretical_j(4096, 1.0, beta1, SobolevParams(1, 0.5, 1.0));
    CHECK(choice.regime == RateRegime::kSub);
    CHECK(choice.target == doctest::Approx(8.0));
    CHECK(choice.j == 7);
  }
  SUBCASE("critical classification") {
    const auto choice =
        theoretical_j(4096, 1.0, beta1, SobolevParams(1, 1.0, 1.0));
    CHECK(choice.regime == RateRegime::kCritical);
  }
  SUBCASE("rejects tiny budgets") {
    CHECK_THROWS_AS(theoretical_j(1, 0.5, beta1, beta1),
                    std::invalid_argument);
  }
  SUBCASE("comparator threshold sits at d/2") {
    const auto low =
        theoretical_j_global(4096, 1.0, beta1, SobolevParams(1, 0.25, 1.0));
    CHECK(low.regime == RateRegime::kSub);
    const auto high =
        theoretical_j_global(4096, 1.0, beta1, SobolevParams(1, 2.0, 1.0));
    CHECK(high.regime == RateRegime::kSuper);
    CHECK(high.target == doctest::Approx(std::pow(4096.0, 1.0 / 7.0)));
    const auto mid =
        theoretical_j_global(4096, 1.0, beta1, SobolevParams(1, 0.5, 1.0));
    CHECK(mid.regime == RateRegime::kCritical);
  }
}

TEST_CASE("schedule json round trip") {
  const auto schedule =
      allocate_budget(dyadic_partition(7, 2), 0.9, SobolevParams(2, 1.5, 1.0));
  const auto restored = BlockSchedule::from_json(schedule.to_json());
  CHECK(restored.dim() == schedule.dim());
  CHECK(restored.coefficient_count() == schedule.coefficient_count());
  CHECK(restored.total_budget() == schedule.total_budget());
  REQUIRE(restored.blocks().size() == schedule.blocks().size());
  for (std::size_t b = 0; b < restored.blocks().size(); ++b) {
    CHECK(restored.blocks()[b].budget == schedule.blocks()[b].budget);
    CHECK(restored.blocks()[b].lo == schedule.blocks()[b].lo);
    CHECK(restored.blocks()[b].hi == schedule.blocks()[b].hi);
  }
  CHECK(schedule.summary().find("budget") != std::string::npos);
}
