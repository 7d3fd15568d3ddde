#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>

#include "scenediff/nn/tensor.hpp"

namespace scenediff {
namespace nn {

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamStore& params);
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  int64_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::map<std::string, Eigen::MatrixXd> m_, v_;
};

}  // namespace nn
}  // namespace scenediff
