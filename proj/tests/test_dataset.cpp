#include <doctest.h>

#include <set>
#include <sstream>

#include "mmviad/dataset.hpp"
#include "mmviad/error.hpp"
#include "support.hpp"

using namespace mmviad;
using nlohmann::json;

namespace {

Manifest load(const json& doc) {
  std::istringstream in(doc.dump());
  return load_manifest(in);
}

json clip_json(const std::string& id, const std::string& category, const std::string& status,
               const std::string& defect, json intervals, json split = "standard_test") {
  return {{"clip_id", id},         {"object_category", category}, {"anomaly_status", status},
          {"defect_type", defect}, {"split", split},              {"gt_intervals", intervals}};
}

// One clip per published per-category count, alternating normal/abnormal.
std::vector<ClipRecord> standard_population() {
  std::vector<ClipRecord> out;
  int n = 0;
  for (const auto& c : Taxonomy::instance().categories()) {
    for (int k = 0; k < c.standard_train + c.standard_test; ++k, ++n) {
      const auto split = k < c.standard_train ? SplitTag::kStandardTrain : SplitTag::kStandardTest;
      const auto defect = n % 3 == 0 ? DefectType::kNone : DefectType::kHole;
      std::vector<Interval> iv;
      if (defect != DefectType::kNone) iv.push_back({0.5, 1.5});
      out.push_back(fixture::clip(std::string(c.category) + "_" + std::to_string(k), std::string(c.category),
                                  defect, iv, {split}));
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("taxonomy has 48 categories in 17 groups") {
    const auto& t = Taxonomy::instance();
    CHECK(t.categories().size() == 48);
    CHECK(t.groups().size() == 17);
    CHECK(t.group_of("vase7") == "vase");
    CHECK_THROWS_AS(t.group_of("teapot0"), TaxonomyError);
    CHECK_THROWS_AS(parse_defect_type("dent"), TaxonomyError);
  }

  TEST_CASE("abnormal clip yields four instances with the defect answer") {
    const auto c = fixture::clip("c1", "vase0", DefectType::kHole, {{0.5, 1.5}});
    const auto qa = generate_qa(c);
    REQUIRE(qa.size() == 4);
    CHECK(qa[0].gt_letter == 'A');
    REQUIRE(qa[1].options.size() == 7);
    const auto& hole = qa[1].options[static_cast<std::size_t>(*qa[1].gt_letter - 'A')];
    CHECK(hole.label == "hole");
    CHECK(qa[2].options.size() == 4);
    CHECK(qa[2].options[static_cast<std::size_t>(*qa[2].gt_letter - 'A')].label == "vase0");
    CHECK_FALSE(qa[3].gt_letter.has_value());
    CHECK(qa[3].gt_intervals == c.gt_intervals);
  }

  TEST_CASE("normal clip answers no, no defect, empty interval") {
    const auto c = fixture::clip("n1", "cup1", DefectType::kNone);
    const auto qa = generate_qa(c);
    CHECK(qa[0].gt_letter == 'B');
    CHECK(qa[1].options[static_cast<std::size_t>(*qa[1].gt_letter - 'A')].label == std::string(kNoDefectLabel));
    CHECK(qa[3].gt_intervals.empty());
  }

  TEST_CASE("option orders are deterministic and seed dependent") {
    const auto c = fixture::clip("det", "bowl3", DefectType::kCrack, {{0.0, 1.0}});
    CHECK(qa_to_json(generate_qa(c)[1]).dump() == qa_to_json(generate_qa(c)[1]).dump());
    CHECK(qa_to_json(generate_qa(c)[2]).dump() == qa_to_json(generate_qa(c)[2]).dump());
    // Across many seeds the shuffle must produce more than one order.
    std::set<std::string> orders;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      orders.insert(qa_to_json(generate_qa(c, {4, seed})[1]).dump());
    }
    CHECK(orders.size() > 1);
  }

  TEST_CASE("object distractors are distinct taxonomy categories") {
    const auto c = fixture::clip("obj", "tap1", DefectType::kNone);
    const auto qa = generate_qa(c, {8, 3});
    std::set<std::string> labels;
    for (const auto& o : qa[2].options) {
      CHECK(Taxonomy::instance().has_category(o.label));
      labels.insert(o.label);
    }
    CHECK(labels.size() == 8);
    CHECK_THROWS_AS(generate_qa(c, {1, 0}), ContractError);
    CHECK_THROWS_AS(generate_qa(c, {49, 0}), ContractError);
  }

  TEST_CASE("manifest loading validates the clip invariants") {
    json doc = {{"protocol", "standard"},
                {"clips",
                 {clip_json("a", "vase0", "abnormal", "crack", {{0.2, 0.9}}),
                  clip_json("b", "cup0", "normal", "none", json::array(), {"standard_train", "unseen_test"})}}};
    const auto m = load(doc);
    REQUIRE(m.clips.size() == 2);
    CHECK(m.clips[0].semantic_group == "vase");
    CHECK(m.clips[1].split_for(Protocol::kUnseen) == SplitTag::kUnseenTest);

    SUBCASE("interval end past 2.0 names the clip") {
      doc["clips"][0]["gt_intervals"] = {{0.5, 2.2}};
      try {
        load(doc);
        FAIL("expected rejection");
      } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("clip a") != std::string::npos);
      }
    }
    SUBCASE("normal clip with a defect type") {
      doc["clips"][1]["defect_type"] = "bulge";
      CHECK_THROWS_AS(load(doc), SchemaError);
    }
    SUBCASE("normal clip with intervals") {
      doc["clips"][1]["gt_intervals"] = {{0.1, 0.2}};
      CHECK_THROWS_AS(load(doc), SchemaError);
    }
    SUBCASE("unknown category") {
      doc["clips"][0]["object_category"] = "kettle0";
      CHECK_THROWS_AS(load(doc), TaxonomyError);
    }
    SUBCASE("unknown defect") {
      doc["clips"][0]["defect_type"] = "dent";
      CHECK_THROWS_AS(load(doc), TaxonomyError);
    }
    SUBCASE("duplicate id") {
      doc["clips"][1]["clip_id"] = "a";
      CHECK_THROWS_AS(load(doc), SchemaError);
    }
    SUBCASE("two tags for one protocol") {
      doc["clips"][0]["split"] = {"standard_train", "standard_test"};
      CHECK_THROWS_AS(load(doc), SchemaError);
    }
    SUBCASE("abnormal without interval is a warning") {
      doc["clips"][0]["gt_intervals"] = json::array();
      const auto w = load(doc);
      CHECK(w.warnings.size() == 1);
    }
    SUBCASE("category shared by unseen train and test") {
      doc["clips"].push_back(clip_json("c", "cup0", "normal", "none", json::array(), "unseen_train"));
      CHECK_THROWS_AS(load(doc), SchemaError);
    }
    SUBCASE("malformed JSON") {
      std::istringstream in("{\"protocol\": ");
      CHECK_THROWS_AS(load_manifest(in), SchemaError);
    }
  }

  TEST_CASE("manifest JSON round trip") {
    auto m = fixture::manifest(fixture::synthetic_clips(30));
    m.clips[1].verified = true;
    m.clips[2].frame_root = "frames/x";
    const auto text = manifest_to_json(m).dump();
    std::istringstream in(text);
    CHECK(manifest_to_json(load_manifest(in)).dump() == text);
  }

  TEST_CASE("standard split counts reproduce the published 2913/1101") {
    const auto clips = standard_population();
    const auto r = validate_counts(clips, Protocol::kStandard);
    CHECK(r.train_clips == 2913);
    CHECK(r.test_clips == 1101);
    CHECK(r.total_clips == 4014);
    CHECK(r.total_qa_pairs == 4 * 4014);
    CHECK(r.train_categories == 48);
    CHECK(r.test_categories == 48);
    // 4014 differs from the headline 4023 and must be surfaced.
    bool flagged = false;
    for (const auto& w : r.warnings) flagged |= w.find("4023") != std::string::npos;
    CHECK(flagged);
  }

  TEST_CASE("published totals give 16092 QA pairs") {
    PublishedCounts p;
    CHECK(4 * p.total_clips == p.total_qa_pairs);
    CHECK(p.normal_clips + p.abnormal_clips == p.total_clips);
  }

  TEST_CASE("unseen protocol covers 36 train and 12 disjoint test categories") {
    std::vector<ClipRecord> clips;
    const auto& cats = Taxonomy::instance().categories();
    for (std::size_t i = 0; i < cats.size(); ++i) {
      const auto tag = i % 4 == 3 ? SplitTag::kUnseenTest : SplitTag::kUnseenTrain;
      clips.push_back(fixture::clip("u" + std::to_string(i), std::string(cats[i].category), DefectType::kNone, {}, {tag}));
    }
    const auto r = validate_counts(clips, Protocol::kUnseen);
    CHECK(r.train_categories == 36);
    CHECK(r.test_categories == 12);
    CHECK(r.shared_categories == 0);
  }
}
