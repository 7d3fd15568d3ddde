#include "scenediff/nn/adam.hpp"

#include <cmath>

namespace scenediff {
namespace nn {

void Adam::step(ParamStore& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& [name, p] : params.items()) {
    if (p->grad.size() == 0) continue;
    auto& m = m_[name];
    auto& v = v_[name];
    if (m.size() == 0) {
      m = Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols());
      v = Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols());
    }
    m = beta1_ * m + (1.0 - beta1_) * p->grad;
    v = beta2_ * v + (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
    Eigen::ArrayXXd mhat = m.array() / c1;
    Eigen::ArrayXXd vhat = v.array() / c2;
    p->value.array() -= lr_ * mhat / (vhat.sqrt() + eps_);
  }
}

}  // namespace nn
}  // namespace scenediff
