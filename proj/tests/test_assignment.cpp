#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "gedkit/assignment.hpp"

using namespace gedkit;

namespace {

// Oracle: minimum over all n! permutations.
double min_assignment_bruteforce(const std::vector<double>& cost, int n) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost[static_cast<std::size_t>(i) * n + perm[i]];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<double> random_matrix(int n, std::mt19937_64& rng, bool with_inf_blocks) {
  std::uniform_real_distribution<double> val(0.0, 9.0);
  std::uniform_int_distribution<int> coin(0, 4);
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (auto& c : cost) c = val(rng);
  if (with_inf_blocks) {
    // Mimic the GED matrix: scattered large cells, keep the diagonal feasible.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && coin(rng) == 0) cost[static_cast<std::size_t>(i) * n + j] = 1e9;
  }
  return cost;
}

void check_valid_permutation(const AssignmentResult& r, int n) {
  REQUIRE(static_cast<int>(r.row_to_col.size()) == n);
  std::vector<char> used(n, 0);
  for (int c : r.row_to_col) {
    REQUIRE(c >= 0);
    REQUIRE(c < n);
    REQUIRE(!used[c]);
    used[c] = 1;
  }
}

}  // namespace

TEST_CASE("both solvers match the brute-force optimum") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> size(1, 6);
    const int n = size(rng);
    auto cost = random_matrix(n, rng, trial % 3 == 0);
    const double best = min_assignment_bruteforce(cost, n);
    auto h = solve_assignment_hungarian(cost, n);
    auto j = solve_assignment_jv(cost, n);
    check_valid_permutation(h, n);
    check_valid_permutation(j, n);
    CHECK(h.cost == doctest::Approx(best).epsilon(1e-9));
    CHECK(j.cost == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("solvers agree on larger matrices") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 120; ++trial) {
    std::uniform_int_distribution<int> size(1, 14);
    const int n = size(rng);
    auto cost = random_matrix(n, rng, trial % 2 == 0);
    auto h = solve_assignment_hungarian(cost, n);
    auto j = solve_assignment_jv(cost, n);
    CHECK(h.cost == doctest::Approx(j.cost).epsilon(1e-9));
  }
}

TEST_CASE("duplicate costs are handled") {
  // All-equal matrix: any permutation is optimal.
  std::vector<double> cost(16, 3.0);
  CHECK(solve_assignment_hungarian(cost, 4).cost == doctest::Approx(12.0));
  CHECK(solve_assignment_jv(cost, 4).cost == doctest::Approx(12.0));
}

TEST_CASE("empty and single-cell problems") {
  CHECK(solve_assignment_hungarian({}, 0).cost == 0.0);
  CHECK(solve_assignment_jv({}, 0).cost == 0.0);
  CHECK(solve_assignment_hungarian({5.0}, 1).cost == 5.0);
  CHECK(solve_assignment_jv({5.0}, 1).cost == 5.0);
}

TEST_CASE("deterministic output") {
  std::mt19937_64 rng(99);
  auto cost = random_matrix(8, rng, true);
  auto a = solve_assignment_jv(cost, 8);
  auto b = solve_assignment_jv(cost, 8);
  CHECK(a.row_to_col == b.row_to_col);
}

TEST_CASE("bad input") {
  CHECK_THROWS_AS(solve_assignment_hungarian({1.0, 2.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(solve_assignment_jv({1.0, 2.0, 3.0}, 2), std::invalid_argument);
}
