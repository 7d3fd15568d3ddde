#pragma once

#include <Eigen/Core>
#include <vector>

#include "scenediff/normalization.hpp"
#include "scenediff/scene.hpp"

namespace scenediff {

// Fixed-length padded encoding of a room. Rows are objects, columns are the
// per-object attributes [size(3) | class(k) | location(3) | rotation(2)]
// where k = vocab.onehot_width() (real categories plus the reserved empty
// pseudo-class). All values live in [-1, 1]; one-hots are mapped to {-1, +1}.
// Rows past the object count hold the canonical empty row.
struct SceneTensor {
  Eigen::MatrixXd values;   // n_max x (3 + k + 3 + 2)
  std::vector<bool> mask;   // occupancy per row
  int k = 0;                // one-hot width, including the empty class

  int n_max() const { return static_cast<int>(values.rows()); }
  int cols() const { return 8 + k; }
  int occupied() const;

  // Column layout.
  static constexpr int size_begin() { return 0; }
  int cat_begin() const { return 3; }
  int loc_begin() const { return 3 + k; }
  int rot_begin() const { return 6 + k; }
  static constexpr int size_cols = 3;
  static constexpr int loc_cols = 3;
  static constexpr int rot_cols = 2;
  int sc_cols() const { return 3 + k; }  // stage-one slice
  static constexpr int lr_cols = 5;      // stage-two slice

  // The canonical padding row: empty-class one-hot in [-1,1], zero
  // size/location, unit rotation [sin, cos] = [0, 1].
  static Eigen::RowVectorXd empty_row(int k);
};

SceneTensor encode_scene(const Room& room, const NormalizationStats& stats,
                         const CategoryVocab& vocab, int n_max);

Room decode_scene(const SceneTensor& tensor, const NormalizationStats& stats,
                  const CategoryVocab& vocab, const std::string& room_id = "",
                  const std::string& room_type = "");

}  // namespace scenediff
