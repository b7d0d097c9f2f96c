#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fleetgame/expectation.hpp"
#include "support.hpp"

using namespace fleetgame;
namespace ft = fleetgame::testing;

namespace {

DelayTable random_table(std::mt19937_64& rng, int terminals) {
  std::uniform_real_distribution<double> u(0.0, 50.0);
  DelayTable t{1, terminals, std::vector<double>(std::size_t{1} << terminals, 0.0),
               std::vector<double>(std::size_t{1} << terminals, 0.0)};
  for (std::size_t s = 1; s < t.delay.size(); ++s) t.delay[s] = u(rng);
  return t;
}

}  // namespace

TEST_CASE("delay table of the fixture") {
  const Scenario s = load_scenario(ft::table1_fixture());
  const DelayTable t = build_delay_table(1, s);
  CHECK(t.delay.size() == 8);
  CHECK(t[0] == 0.0);
  CHECK(t[0b001] == doctest::Approx(2.400).epsilon(1e-12));
  CHECK(t[0b010] == doctest::Approx(8.625).epsilon(1e-12));
  CHECK(t[0b100] == doctest::Approx(9.450).epsilon(1e-12));
  CHECK(t[0b111] == doctest::Approx(25.275).epsilon(1e-12));
  CHECK(t.cost[0b111] == doctest::Approx(0.982 * 16.85).epsilon(1e-12));

  const DelayTable fixed = build_fixed_order_table(1, s);
  CHECK(fixed[0b111] == doctest::Approx(31.5).epsilon(1e-12));
}

TEST_CASE("delay table with one terminal") {
  Scenario s;
  s.terminals = {{1, Point{0, 2}}};
  s.carriers = {{1, Point{0, 0}, 0.0, {Vehicle{1, 0}}, std::nullopt}};
  s.cost = CostParams{1, 0, 40, 5};
  const DelayTable t = build_delay_table(1, s);
  CHECK(t.delay.size() == 2);
  CHECK(t[1] == doctest::Approx(6.0));
}

TEST_CASE("naive expectation examples") {
  const Scenario s = load_scenario(ft::table1_fixture());
  const DelayTable t = build_delay_table(1, s);
  const std::vector<double> uniform(3, 1.0 / 3.0);
  CHECK(expected_delay_naive(0, uniform, t, 5.0) == 0.0);
  CHECK(expected_delay_naive(1, uniform, t, 5.0) == doctest::Approx(11.825).epsilon(1e-12));
  const std::vector<double> only_first = {1.0, 0.0, 0.0};
  CHECK(expected_delay_naive(2, only_first, t, 5.0) == doctest::Approx(10.0 + 2.4).epsilon(1e-12));

  CHECK_THROWS_AS(expected_delay_naive(15, uniform, t, 5.0), ValidationError);
  CHECK_THROWS_AS(expected_delay_naive(-1, uniform, t, 5.0), ValidationError);
  CHECK_THROWS_AS(expected_delay_naive(1, std::vector<double>{1.0}, t, 5.0), ValidationError);
}

TEST_CASE("visited-set distribution") {
  auto n0 = visited_set_distribution(0, std::vector<double>{0.2, 0.3, 0.5});
  CHECK(n0[0] == 1.0);
  CHECK(std::accumulate(n0.begin() + 1, n0.end(), 0.0) == 0.0);

  auto n1 = visited_set_distribution(1, std::vector<double>(3, 1.0 / 3.0));
  for (unsigned s : {1u, 2u, 4u}) CHECK(n1[s] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  for (unsigned s : {0u, 3u, 5u, 6u, 7u}) CHECK(std::abs(n1[s]) < 1e-15);

  auto n2 = visited_set_distribution(2, std::vector<double>{0.5, 0.5});
  CHECK(n2[0b01] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(n2[0b10] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(n2[0b11] == doctest::Approx(0.5).epsilon(1e-15));

  // a zero-probability terminal is never visited
  auto zero = visited_set_distribution(6, std::vector<double>{0.3, 0.0, 0.7});
  for (unsigned s = 0; s < 8; ++s) {
    if (s & 0b010) CHECK(zero[s] == 0.0);
  }
}

TEST_CASE("visited-set distribution sums to one") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int terminals = 1 + trial % 10;
    const auto p = ft::random_probs(rng, terminals, true);
    const int n = static_cast<int>(rng() % 60);
    const auto dist = visited_set_distribution(n, p);
    CHECK(std::abs(std::accumulate(dist.begin(), dist.end(), 0.0) - 1.0) <= 1e-12);
    CHECK((dist[0] == 1.0) == (n == 0));
  }
}

TEST_CASE("fast expectation equals enumeration") {
  std::mt19937_64 rng(31);
  for (int terminals = 1; terminals <= 4; ++terminals) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto p = ft::random_probs(rng, terminals, trial % 3 == 0);
      const DelayTable t = random_table(rng, terminals);
      for (int n = 0; n <= 8; ++n) {
        CHECK(std::abs(expected_delay(n, p, t, 5.0) - expected_delay_naive(n, p, t, 5.0)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("single draw expectation") {
  std::mt19937_64 rng(4);
  const auto p = ft::random_probs(rng, 4, false);
  const DelayTable t = random_table(rng, 4);
  double direct = 3.0;
  for (int j = 0; j < 4; ++j) direct += p[j] * t[1u << j];
  CHECK(expected_delay(1, p, t, 3.0) == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("expected delay grows by at least one unloading time per customer on metric instances") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario s = ft::random_euclidean_scenario(rng, 5, {{Vehicle{100, 0}}});
    const auto p = ft::random_probs(rng, 5, true);
    const DelayTable t = build_delay_table(1, s);
    double previous = expected_delay(0, p, t, 5.0);
    for (int n = 1; n <= 20; ++n) {
      const double current = expected_delay(n, p, t, 5.0);
      CHECK(current >= previous + 5.0 - 1e-9);
      previous = current;
    }
  }
}

TEST_CASE("relabelling terminals leaves the expectation unchanged") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int terminals = 4;
    const auto p = ft::random_probs(rng, terminals, false);
    const DelayTable t = random_table(rng, terminals);
    std::vector<int> perm = {0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<double> p2(terminals);
    for (int j = 0; j < terminals; ++j) p2[perm[j]] = p[j];
    DelayTable t2 = t;
    for (unsigned s = 0; s < 16; ++s) {
      unsigned image = 0;
      for (int j = 0; j < terminals; ++j) {
        if (s & (1u << j)) image |= 1u << perm[j];
      }
      t2.delay[image] = t.delay[s];
    }
    for (int n = 0; n <= 10; ++n) {
      CHECK(expected_delay(n, p2, t2, 2.0) == doctest::Approx(expected_delay(n, p, t, 2.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("subset labels and ordering") {
  CHECK(subset_label(0b101) == "1-3");
  std::vector<std::string> labels;
  for (TerminalMask s : subsets_by_size(3)) labels.push_back(subset_label(s));
  CHECK(labels == std::vector<std::string>{"1", "2", "3", "1-2", "1-3", "2-3", "1-2-3"});
  CHECK(subsets_by_size(4).size() == 15);
  auto four = subsets_by_size(4);
  CHECK(subset_label(four[4]) == "1-2");
  CHECK(subset_label(four[9]) == "3-4");
  CHECK(subset_label(four[10]) == "1-2-3");
}
