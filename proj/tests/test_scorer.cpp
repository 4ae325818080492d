#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "mmviad/error.hpp"
#include "mmviad/scorer.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mmviad;

namespace {

IntervalSet set(std::vector<Interval> v) { return IntervalSet::normalized(std::move(v)); }

PredictionRecord perfect(const ClipRecord& c) {
  const auto qa = generate_qa(c);
  PredictionRecord p;
  p.clip_id = c.clip_id;
  p.answers.q1 = qa[0].gt_letter;
  p.answers.q2 = qa[1].gt_letter;
  p.answers.q3 = qa[2].gt_letter;
  p.answers.q4 = c.gt_intervals;
  return p;
}

}  // namespace

TEST_SUITE("scorer") {
  TEST_CASE("avg identity and display rounding") {
    CHECK(average_of_tasks(60.7, 37.6, 49.6, 81.9) == doctest::Approx(57.45));
    CHECK(format_1dp(average_of_tasks(60.7, 37.6, 49.6, 81.9)) == "57.5");
    CHECK(format_1dp(average_of_tasks(91.2, 77.8, 82.3, 93.7)) == "86.3");
    CHECK(round_half_up_1dp(81.075) == doctest::Approx(81.1));
    CHECK(round_half_up_1dp(45.04) == doctest::Approx(45.0));
    CHECK(format_1dp(100.0) == "100.0");
  }

  TEST_CASE("set-IoU localization") {
    CHECK(loc_iou({}, {}) == 1.0);
    CHECK(loc_iou({}, set({{0, 1}})) == 0.0);
    CHECK(loc_iou(set({{0, 1}}), {}) == 0.0);
    CHECK(loc_iou(set({{0.0, 1.0}}), set({{0.0, 2.0}})) == doctest::Approx(0.5));
    const auto pred = set({{0.0, 0.5}, {1.5, 2.0}});
    const auto gt = set({{0.0, 2.0}});
    CHECK(loc_iou(pred, gt) == doctest::Approx(0.5));
    CHECK(oracle::grid_set_iou(pred, gt) == doctest::Approx(0.5));
    CHECK(loc_iou(pred, gt, LocMetric::kMaxIou) == doctest::Approx(0.25));
  }

  TEST_CASE("perfect predictions score 100 everywhere") {
    const auto clips = fixture::synthetic_clips(40);
    std::vector<PredictionRecord> preds;
    for (const auto& c : clips) preds.push_back(perfect(c));
    const auto r = score(preds, clips, std::nullopt);
    CHECK(r.detect_acc == 100.0);
    CHECK(r.defect_acc == 100.0);
    CHECK(r.loc_miou == 100.0);
    CHECK(r.object_acc == 100.0);
    CHECK(r.avg == 100.0);
    CHECK(r.n_scored == 40);
    CHECK(r.n_missing == 0);
    CHECK_FALSE(r.per_category.empty());
  }

  TEST_CASE("missing predictions count as wrong") {
    const auto clips = fixture::synthetic_clips(10);
    std::vector<PredictionRecord> preds;
    for (int i = 0; i < 5; ++i) preds.push_back(perfect(clips[i]));
    const auto r = score(preds, clips, std::nullopt);
    CHECK(r.detect_acc == 50.0);
    CHECK(r.loc_miou == 50.0);
    CHECK(r.n_missing == 5);
  }

  TEST_CASE("split selection and normal-clip policy") {
    auto clips = fixture::synthetic_clips(12);
    for (int i = 0; i < 6; ++i) clips[i].splits = {SplitTag::kStandardTrain};
    std::vector<PredictionRecord> preds;
    for (const auto& c : clips) {
      auto p = perfect(c);
      if (c.anomaly_status == AnomalyStatus::kNormal) p.answers.q4 = set({{0.0, 0.1}});
      preds.push_back(p);
    }
    const auto test = score(preds, clips, SplitTag::kStandardTest);
    CHECK(test.n_scored == 6);
    CHECK(test.loc_miou < 100.0);
    ScoreOptions opts;
    opts.normal_policy = NormalClipPolicy::kExcludeNormal;
    CHECK(score(preds, clips, SplitTag::kStandardTest, opts).loc_miou == 100.0);
  }

  TEST_CASE("unknown and duplicate clips are rejected") {
    const auto clips = fixture::synthetic_clips(3);
    auto p = perfect(clips[0]);
    p.clip_id = "nope";
    CHECK_THROWS_AS(score({p}, clips, std::nullopt), DataError);
    CHECK_THROWS_AS(score({perfect(clips[0]), perfect(clips[0])}, clips, std::nullopt), DataError);
  }

  TEST_CASE("predictions load from fields or raw responses") {
    const auto c = fixture::clip("r1", "vase0", DefectType::kCrack, {{0.2, 0.9}});
    std::stringstream in;
    in << nlohmann::json{{"clip_id", "r1"}, {"response", fixture::perfect_response(c)}}.dump() << "\n\n";
    in << nlohmann::json{{"clip_id", "r2"}, {"q1", "A"}, {"q2", "b"}, {"q3", "C"}, {"q4", "[[0.1,0.3]]"}}.dump() << "\n";
    const auto preds = load_predictions(in);
    REQUIRE(preds.size() == 2);
    CHECK(preds[0].answers.q4 == c.gt_intervals);
    CHECK(preds[1].answers.q2 == 'B');
    std::stringstream bad("{\"clip_id\": 1}\n");
    CHECK_THROWS_AS(load_predictions(bad), SchemaError);
  }

  TEST_CASE("report table") {
    ScoreReport r;
    r.detect_acc = 60.7;
    r.defect_acc = 37.6;
    r.loc_miou = 49.6;
    r.object_acc = 81.9;
    r.avg = average_of_tasks(60.7, 37.6, 49.6, 81.9);
    const auto table = report_table({{"model", r}});
    CHECK(table.find("57.5") != std::string::npos);
    CHECK(table.find("Detect.") != std::string::npos);
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);
    CHECK_THROWS_AS(report_table({}), ContractError);
    CHECK(report_json({{"model", r}})["models"]["model"]["display"]["avg"] == "57.5");
  }
}
