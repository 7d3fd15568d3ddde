#include "scenediff/scene_tensor.hpp"

#include <cmath>

#include "scenediff/common.hpp"

namespace scenediff {

int SceneTensor::occupied() const {
  int n = 0;
  for (bool b : mask) n += b ? 1 : 0;
  return n;
}

Eigen::RowVectorXd SceneTensor::empty_row(int k) {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(8 + k);
  row.segment(3, k).setConstant(-1.0);
  row(3 + k - 1) = 1.0;  // empty class is the last one-hot slot
  row(6 + k) = 0.0;      // sin
  row(7 + k) = 1.0;      // cos
  return row;
}

SceneTensor encode_scene(const Room& room, const NormalizationStats& stats,
                         const CategoryVocab& vocab, int n_max) {
  const int n = room.size();
  if (n > n_max)
    fail("encode_scene: room '" + room.room_id + "' has " + std::to_string(n) +
         " objects, exceeding capacity " + std::to_string(n_max));

  SceneTensor t;
  t.k = vocab.onehot_width();
  t.values.resize(n_max, t.cols());
  t.mask.assign(n_max, false);

  const Eigen::RowVectorXd pad = SceneTensor::empty_row(t.k);
  for (int i = 0; i < n_max; ++i) t.values.row(i) = pad;

  for (int i = 0; i < n; ++i) {
    const ObjectInstance& obj = room.objects[i];
    check((obj.half_size.array() > 0.0).all(),
          "encode_scene: non-positive size on object " + std::to_string(i));
    const int cid = vocab.id(obj.category);  // throws, naming unknown classes

    t.values.row(i).segment(0, 3) = stats.normalize_size(obj.half_size).transpose();
    t.values.row(i).segment(t.cat_begin(), t.k).setConstant(-1.0);
    t.values(i, t.cat_begin() + cid) = 1.0;
    t.values.row(i).segment(t.loc_begin(), 3) =
        stats.normalize_location(obj.location).transpose();
    t.values(i, t.rot_begin()) = obj.rot_sin();
    t.values(i, t.rot_begin() + 1) = obj.rot_cos();
    t.mask[i] = true;
  }
  return t;
}

Room decode_scene(const SceneTensor& tensor, const NormalizationStats& stats,
                  const CategoryVocab& vocab, const std::string& room_id,
                  const std::string& room_type) {
  check(tensor.k == vocab.onehot_width(), "decode_scene: tensor/vocab width mismatch");
  check(tensor.values.cols() == tensor.cols(), "decode_scene: tensor column mismatch");
  check(tensor.values.allFinite(), "decode_scene: non-finite values in tensor");

  Room room;
  room.room_id = room_id;
  room.room_type = room_type;

  for (int i = 0; i < tensor.n_max(); ++i) {
    const auto row = tensor.values.row(i);
    int best = 0;
    row.segment(tensor.cat_begin(), tensor.k).maxCoeff(&best);
    if (best == vocab.empty_id()) continue;

    ObjectInstance obj;
    obj.category = vocab.name(best);
    obj.half_size = stats.denormalize_size(row.segment(0, 3).transpose())
                        .cwiseMax(1e-6);  // strictly positive
    obj.location = stats.denormalize_location(row.segment(tensor.loc_begin(), 3).transpose());

    // Generated rotations may drift off the unit circle; renormalize before
    // extracting the angle.
    double s = row(tensor.rot_begin());
    double c = row(tensor.rot_begin() + 1);
    const double norm = std::hypot(s, c);
    if (norm < 1e-9) {
      s = 0.0;
      c = 1.0;
    } else {
      s /= norm;
      c /= norm;
    }
    obj.yaw = std::atan2(s, c);
    room.objects.push_back(std::move(obj));
  }
  return room;
}

}  // namespace scenediff
