#include "mmviad/taxonomy.hpp"

#include <algorithm>

#include "mmviad/error.hpp"

namespace mmviad {

namespace {

struct GroupRow {
  std::string_view group;
  std::vector<std::string_view> categories;
  int train;
  int test;
};

// Per-group clip totals; distributed over the group's categories below.
const std::vector<GroupRow>& group_rows() {
  static const std::vector<GroupRow> rows = {
      {"ashtray", {"ashtray0"}, 54, 18},
      {"bottle", {"bottle0", "bottle1", "bottle3"}, 183, 69},
      {"bowl", {"bowl0", "bowl1", "bowl2", "bowl3", "bowl4", "bowl5"}, 378, 129},
      {"bucket", {"bucket0", "bucket1"}, 132, 54},
      {"cabinet", {"cabinet0"}, 75, 15},
      {"cap", {"cap0", "cap1", "cap2", "cap3", "cap4", "cap5"}, 360, 144},
      {"chair", {"chair0"}, 66, 24},
      {"cup", {"cup0", "cup1", "cup2"}, 162, 54},
      {"desk", {"desk0"}, 63, 21},
      {"eraser", {"eraser0"}, 54, 18},
      {"headset", {"headset0", "headset1"}, 108, 36},
      {"helmet", {"helmet0", "helmet1", "helmet2", "helmet3"}, 252, 108},
      {"jar", {"jar0"}, 54, 18},
      {"microphone", {"microphone0", "microphone1"}, 111, 39},
      {"shelf", {"shelf0"}, 66, 30},
      {"tap", {"tap0", "tap1"}, 126, 54},
      {"vase",
       {"vase0", "vase1", "vase2", "vase3", "vase4", "vase5", "vase6", "vase7", "vase8", "vase9",
        "vase10"},
       669,
       270},
  };
  return rows;
}

}  // namespace

std::string_view to_string(DefectType d) {
  switch (d) {
    case DefectType::kCrack: return "crack";
    case DefectType::kScratch: return "scratch";
    case DefectType::kConcavity: return "concavity";
    case DefectType::kBulge: return "bulge";
    case DefectType::kBroken: return "broken";
    case DefectType::kHole: return "hole";
    case DefectType::kNone: return "none";
  }
  return "none";
}

DefectType parse_defect_type(std::string_view name) {
  for (auto d : kStructuralDefects) {
    if (to_string(d) == name) return d;
  }
  if (name == "none") return DefectType::kNone;
  throw TaxonomyError("unknown defect_type '" + std::string(name) + "'");
}

const Taxonomy& Taxonomy::instance() {
  static const Taxonomy taxonomy;
  return taxonomy;
}

Taxonomy::Taxonomy() {
  for (const auto& row : group_rows()) {
    groups_.push_back(row.group);
    // The published table gives clip counts per group only; spread them
    // evenly over the member categories so the per-group sums are exact.
    const int n = static_cast<int>(row.categories.size());
    for (int i = 0; i < n; ++i) {
      CategoryInfo info;
      info.category = row.categories[i];
      info.group = row.group;
      info.standard_train = row.train / n + (i < row.train % n ? 1 : 0);
      info.standard_test = row.test / n + (i < row.test % n ? 1 : 0);
      categories_.push_back(info);
    }
  }
}

const CategoryInfo* Taxonomy::find(std::string_view category) const {
  auto it = std::find_if(categories_.begin(), categories_.end(),
                         [&](const CategoryInfo& c) { return c.category == category; });
  return it == categories_.end() ? nullptr : &*it;
}

bool Taxonomy::has_category(std::string_view category) const { return find(category) != nullptr; }

std::string_view Taxonomy::group_of(std::string_view category) const {
  const auto* info = find(category);
  if (info == nullptr) {
    throw TaxonomyError("unknown object_category '" + std::string(category) + "'");
  }
  return info->group;
}

}  // namespace mmviad
