#include <doctest.h>

#include <cmath>
#include <random>

#include "mmviad/error.hpp"
#include "mmviad/reward.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mmviad;

namespace {

IntervalSet set(std::vector<Interval> v) { return IntervalSet::normalized(std::move(v)); }

GroundTruthBundle gt_abnormal() {
  GroundTruthBundle g;
  g.y_ano = 'A';
  g.y_def = 'C';
  g.y_obj = 'B';
  g.gt_intervals = set({{1.0, 2.0}});
  return g;
}

AnswerBlock answers(std::optional<char> q1, std::optional<char> q2, std::optional<char> q3) {
  AnswerBlock a;
  a.q1 = q1;
  a.q2 = q2;
  a.q3 = q3;
  return a;
}

}  // namespace

TEST_SUITE("reward") {
  TEST_CASE("format reward") {
    const auto ok = parse(fixture::structured_response('A', 'C', 'B', "[1,2]"), Grammar::kStructured);
    CHECK(reward_format(ok) == 1);
    const auto dup = parse(fixture::structured_response('A', 'C', 'B', "[1,2]") + "<answer><q1>A</q1></answer>",
                           Grammar::kStructured);
    CHECK(reward_format(dup) == 0);
    auto text = fixture::structured_response('A', 'C', 'B', "[1,2]");
    text.erase(text.find("</think>"), 8);
    CHECK(reward_format(parse(text, Grammar::kStructured)) == 0);
  }

  TEST_CASE("answer reward counts q1 and q3") {
    const auto g = gt_abnormal();
    CHECK(reward_answer(answers('A', 'F', 'B'), g) == 2);
    CHECK(reward_answer(answers('B', 'C', 'B'), g) == 1);
    CHECK(reward_answer(answers('A', 'C', std::nullopt), g) == 1);
  }

  TEST_CASE("semantic gate") {
    const auto g = gt_abnormal();
    RewardConfig cfg;
    CHECK(reward_semantic_gated(answers('A', 'C', 'B'), g, cfg) == 1);
    CHECK(reward_semantic_gated(answers('B', 'C', 'B'), g, cfg) == 0);
    CHECK(reward_semantic_gated(answers('A', 'D', 'B'), g, cfg) == 0);
    cfg.semantic_gate_enabled = false;
    CHECK(reward_semantic_gated(answers('B', 'C', 'B'), g, cfg) == 1);
  }

  TEST_CASE("iou_max fixtures") {
    CHECK(iou_max(set({{0.5, 1.5}}), set({{1.0, 2.0}})) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(iou_max(set({{0.2, 1.8}}), set({{0.2, 1.8}})) == 1.0);
    CHECK(iou_max(set({{0.0, 0.2}, {1.0, 2.0}}), set({{0.9, 1.9}})) == doctest::Approx(0.9 / 1.1).epsilon(1e-12));
    CHECK_THROWS_AS(iou_max(IntervalSet{}, set({{0.1, 0.2}})), ContractError);
    CHECK(oracle::grid_iou_max(set({{0.5, 1.5}}), set({{1.0, 2.0}})) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
  }

  TEST_CASE("visibility reward cases") {
    const RewardConfig cfg;
    CHECK(reward_visibility({}, {}, cfg) == 1.0);
    CHECK(reward_visibility({}, set({{0.1, 0.5}}), cfg) == -0.3);
    CHECK(reward_visibility(set({{0.1, 0.5}}), {}, cfg) == -0.3);
    const double third = reward_visibility(set({{0.5, 1.5}}), set({{1.0, 2.0}}), cfg);
    CHECK(std::abs(third - (0.3 + 0.7 / 3.0)) < 1e-9);
    const double penalty =
        reward_visibility(set({{0.0, 0.3}, {0.5, 0.8}, {1.2, 1.5}}), set({{0.0, 0.3}}), cfg);
    CHECK(std::abs(penalty - (0.3 + 0.7 * std::exp(-1.0))) < 1e-9);
    CHECK(std::abs(penalty - 0.5575) < 5e-5);
  }

  TEST_CASE("flat IoU mode") {
    RewardConfig cfg;
    cfg.flat_iou_mode = true;
    CHECK(reward_visibility({}, {}, cfg) == 1.0);
    CHECK(reward_visibility({}, set({{0.1, 0.5}}), cfg) == 0.0);
    CHECK(reward_visibility(set({{0.5, 1.5}}), set({{1.0, 2.0}}), cfg) == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("composite reward of perfect responses is 5") {
    const auto abnormal = fixture::clip("p1", "vase2", DefectType::kBulge, {{0.4, 1.6}});
    const auto normal = fixture::clip("p2", "cup0", DefectType::kNone);
    for (const auto& c : {abnormal, normal}) {
      const auto resp = parse(fixture::perfect_response(c), Grammar::kStructured);
      const auto b = reward_total(resp, ground_truth_for(c), RewardConfig{});
      CHECK(b.r_fmt == 1);
      CHECK(b.r_ans == 2);
      CHECK(b.r_sg == 1);
      CHECK(b.r_vis == 1.0);
      CHECK(b.total == 5.0);
    }
  }

  TEST_CASE("garbage input gets the minimal reward") {
    const auto c = fixture::clip("g", "vase2", DefectType::kBulge, {{0.4, 1.6}});
    const auto b = reward_total(parse("%%%garbage", Grammar::kStructured), ground_truth_for(c), RewardConfig{});
    CHECK(b.r_fmt == 0);
    CHECK(b.r_ans == 0);
    CHECK(b.r_sg == 0);
    CHECK(b.r_vis == -0.3);
    CHECK(b.vis_case == VisibilityCase::kMissed);
    CHECK(b.total == -0.3);
  }

  TEST_CASE("strict extraction ignores answers of malformed responses") {
    const auto c = fixture::clip("s", "vase2", DefectType::kBulge, {{0.4, 1.6}});
    const auto resp = parse("junk " + fixture::perfect_response(c), Grammar::kStructured);
    RewardConfig cfg;
    CHECK(reward_total(resp, ground_truth_for(c), cfg).r_ans == 2);
    cfg.answer_extraction = AnswerExtraction::kStrict;
    CHECK(reward_total(resp, ground_truth_for(c), cfg).r_ans == 0);
  }

  TEST_CASE("weights scale components") {
    const auto c = fixture::clip("w", "vase2", DefectType::kBulge, {{0.4, 1.6}});
    RewardConfig cfg;
    cfg.weights = {0.5, 1.0, 2.0, 0.0};
    const auto b = reward_total(parse(fixture::perfect_response(c), Grammar::kStructured), ground_truth_for(c), cfg);
    CHECK(b.total == doctest::Approx(0.5 + 2 + 2));
  }

  TEST_CASE("config validation") {
    RewardConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.alpha_pen = 0.2;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
    cfg = RewardConfig{};
    cfg.lambda = -1;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
  }

  TEST_CASE("group advantages") {
    const std::vector<double> r = {1, 2, 3};
    const auto a = group_advantages(r);
    CHECK(a[0] == doctest::Approx(-1.224744871391589).epsilon(1e-12));
    CHECK(a[1] == 0.0);
    CHECK(a[2] == doctest::Approx(1.224744871391589).epsilon(1e-12));
    const std::vector<double> c = {0.7, 0.7, 0.7, 0.7};
    for (double x : group_advantages(c)) CHECK(x == 0.0);
    CHECK_THROWS_AS(group_advantages(std::vector<double>{}), ContractError);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(2.0, 1.5);
    for (int g = 0; g < 50; ++g) {
      std::vector<double> xs(2 + g);
      for (auto& x : xs) x = n(rng);
      const auto adv = group_advantages(xs);
      double sum = 0;
      for (double x : adv) sum += x;
      CHECK(std::abs(sum) < 1e-9);
      const auto [m, sd] = oracle::mean_and_std(xs);
      for (std::size_t i = 0; i < xs.size(); ++i) CHECK(adv[i] == doctest::Approx((xs[i] - m) / sd).epsilon(1e-9));
    }
  }
}
