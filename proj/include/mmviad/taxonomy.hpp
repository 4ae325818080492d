#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmviad {

enum class DefectType { kCrack, kScratch, kConcavity, kBulge, kBroken, kHole, kNone };

inline constexpr std::array<DefectType, 6> kStructuralDefects = {
    DefectType::kCrack, DefectType::kScratch, DefectType::kConcavity,
    DefectType::kBulge, DefectType::kBroken,  DefectType::kHole};

std::string_view to_string(DefectType d);
// Throws TaxonomyError on an unknown name.
DefectType parse_defect_type(std::string_view name);

struct CategoryInfo {
  std::string_view category;
  std::string_view group;
  // Clip counts per category in the released standard split.
  int standard_train = 0;
  int standard_test = 0;
};

/// Fixed object taxonomy: 48 fine-grained categories in 17 semantic groups.
class Taxonomy {
 public:
  static const Taxonomy& instance();

  const std::vector<CategoryInfo>& categories() const { return categories_; }
  const std::vector<std::string_view>& groups() const { return groups_; }

  bool has_category(std::string_view category) const;
  // Throws TaxonomyError on an unknown category.
  std::string_view group_of(std::string_view category) const;
  const CategoryInfo* find(std::string_view category) const;

 private:
  Taxonomy();

  std::vector<CategoryInfo> categories_;
  std::vector<std::string_view> groups_;
};

}  // namespace mmviad
