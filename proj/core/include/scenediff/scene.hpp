#pragma once

#include <Eigen/Core>
#include <string>
#include <unordered_map>
#include <vector>

namespace scenediff {

// One furniture item. Sizes are half-extents in meters per axis, location is
// the box center in meters, yaw is the rotation about the vertical (+z) axis;
// +y is the front direction at yaw 0.
struct ObjectInstance {
  std::string category;
  Eigen::Vector3d half_size = Eigen::Vector3d::Zero();
  Eigen::Vector3d location = Eigen::Vector3d::Zero();
  double yaw = 0.0;

  double rot_sin() const { return std::sin(yaw); }
  double rot_cos() const { return std::cos(yaw); }
  double base_z() const { return location.z() - half_size.z(); }
  double top_z() const { return location.z() + half_size.z(); }
};

// A room is an unordered set of objects; the vector order carries no meaning
// and downstream computations are permutation-invariant or explicitly padded.
struct Room {
  std::string room_id;
  std::string room_type;
  std::vector<ObjectInstance> objects;

  int size() const { return static_cast<int>(objects.size()); }
};

// A category with target half-extents, the hand-off between stage one and
// retrieval, and between retrieval and stage two.
struct FurnitureItem {
  std::string category;
  Eigen::Vector3d half_size = Eigen::Vector3d::Zero();
};

// Category vocabulary. Real categories keep their given order; one reserved
// "empty" pseudo-class is appended for fixed-length padding, so the one-hot
// width is num_real() + 1.
class CategoryVocab {
 public:
  CategoryVocab() = default;
  explicit CategoryVocab(std::vector<std::string> names);

  int id(const std::string& name) const;  // throws for unknown categories
  bool contains(const std::string& name) const;
  const std::string& name(int id) const;

  int num_real() const { return static_cast<int>(names_.size()); }
  int empty_id() const { return num_real(); }
  int onehot_width() const { return num_real() + 1; }
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const CategoryVocab& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace scenediff
