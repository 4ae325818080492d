#include <doctest.h>

#include <cmath>
#include <random>

#include "mmviad/error.hpp"
#include "mmviad/interval_set.hpp"
#include "mmviad/json_io.hpp"
#include "oracles.hpp"

using namespace mmviad;

TEST_SUITE("intervals") {
  TEST_CASE("normalization sorts and merges overlapping or touching intervals") {
    const auto s = IntervalSet::normalized({{1.2, 1.5}, {0.0, 0.4}, {0.3, 0.6}, {1.5, 1.8}});
    REQUIRE(s.size() == 2);
    CHECK(s[0] == Interval{0.0, 0.6});
    CHECK(s[1] == Interval{1.2, 1.8});
    CHECK(s.total_length() == doctest::Approx(1.2));
  }

  TEST_CASE("invalid intervals are rejected") {
    CHECK_THROWS_AS(IntervalSet::normalized({{1.0, 0.5}}), DataError);
    CHECK_THROWS_AS(IntervalSet::normalized({{0.5, 0.5}}), DataError);
    CHECK_THROWS_AS(IntervalSet::normalized({{-0.1, 0.5}}), DataError);
    CHECK_THROWS_AS(IntervalSet::normalized({{0.5, 2.01}}), DataError);
    CHECK_THROWS_AS(IntervalSet::normalized({{0.0, std::nan("")}}), DataError);
    CHECK_NOTHROW(IntervalSet::normalized({{0.0, 2.0}}));
  }

  TEST_CASE("pairwise IoU") {
    CHECK(interval_iou({0.5, 1.5}, {1.0, 2.0}) == doctest::Approx(1.0 / 3.0));
    CHECK(interval_iou({0.0, 0.5}, {1.0, 2.0}) == 0.0);
    CHECK(interval_iou({0.2, 1.8}, {0.2, 1.8}) == 1.0);
  }

  TEST_CASE("set intersection and union lengths against the grid oracle") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::uniform_int_distribution<int> count(1, 4);
    for (int trial = 0; trial < 200; ++trial) {
      auto random_set = [&] {
        std::vector<Interval> v;
        for (int k = count(rng); k > 0; --k) {
          double a = u(rng), b = u(rng);
          if (a > b) std::swap(a, b);
          if (b - a > 1e-3) v.push_back({a, b});
        }
        if (v.empty()) v.push_back({0.1, 0.2});
        return IntervalSet::normalized(v);
      };
      const auto a = random_set();
      const auto b = random_set();
      const auto ga = oracle::rasterize(a.intervals());
      const auto gb = oracle::rasterize(b.intervals());
      long inter = 0, uni = 0;
      for (std::size_t k = 0; k < ga.size(); ++k) {
        inter += ga[k] && gb[k];
        uni += ga[k] || gb[k];
      }
      // Each of at most 8 boundaries can shift the grid count by half a bin.
      CHECK(std::abs(intersection_length(a, b) - inter / 1000.0) <= 4e-3);
      CHECK(std::abs(union_length(a, b) - uni / 1000.0) <= 4e-3);
    }
  }

  TEST_CASE("json round trip") {
    const auto s = IntervalSet::normalized({{0.1, 0.4}, {1.0, 2.0}});
    CHECK(intervals_from_json(intervals_to_json(s)) == s);
    CHECK(intervals_from_json(nlohmann::json::array()).empty());
    CHECK_THROWS_AS(intervals_from_json(nlohmann::json::parse("[[0.1]]")), DataError);
    CHECK_THROWS_AS(intervals_from_json(nlohmann::json::parse("[[0.5, 2.5]]")), DataError);
    CHECK_THROWS_AS(intervals_from_json(nlohmann::json::parse("\"x\"")), DataError);
  }
}
