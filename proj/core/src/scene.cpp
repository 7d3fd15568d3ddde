#include "scenediff/scene.hpp"

#include "scenediff/common.hpp"

namespace scenediff {

CategoryVocab::CategoryVocab(std::vector<std::string> names) : names_(std::move(names)) {
  for (int i = 0; i < static_cast<int>(names_.size()); ++i) {
    check(!names_[i].empty(), "vocabulary: empty category name");
    auto [it, inserted] = index_.emplace(names_[i], i);
    (void)it;
    check(inserted, "vocabulary: duplicate category '" + names_[i] + "'");
  }
}

int CategoryVocab::id(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail("unknown category '" + name + "'");
  return it->second;
}

bool CategoryVocab::contains(const std::string& name) const {
  return index_.count(name) != 0;
}

const std::string& CategoryVocab::name(int id) const {
  check(id >= 0 && id < num_real(), "category id out of range");
  return names_[id];
}

}  // namespace scenediff
