#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scenediff/rng.hpp"

namespace scenediff {
namespace nn {

// Reverse-mode autodiff over dense double matrices. Batches of set-structured
// examples are stacked along the row axis; ops that care about example
// boundaries take the batch count and infer rows-per-example.

struct Node;
using Tensor = std::shared_ptr<Node>;

struct Node {
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;  // empty until something accumulates into it
  bool requires_grad = false;
  std::vector<Tensor> parents;
  std::function<void(Node&)> backward_fn;

  Eigen::Index rows() const { return value.rows(); }
  Eigen::Index cols() const { return value.cols(); }
  void ensure_grad();
  void accumulate(const Eigen::MatrixXd& g);
};

bool grad_enabled();

struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

Tensor constant(Eigen::MatrixXd v);
Tensor leaf_param(Eigen::MatrixXd v);
// Degrades to a constant when grads are off or no parent needs them.
Tensor make_op(Eigen::MatrixXd value, std::vector<Tensor> parents,
               std::function<void(Node&)> backward_fn);

// Root must be 1x1. Accumulates into every reachable grad-requiring leaf.
void backward(const Tensor& root);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor add_rowvec(const Tensor& x, const Tensor& bias);           // bias 1xC
Tensor add_per_example(const Tensor& x, const Tensor& e, int batch);  // e BxC
Tensor add_constmat(const Tensor& x, const Eigen::MatrixXd& m);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor mul_const(const Tensor& x, const Eigen::MatrixXd& m);
Tensor scale(const Tensor& x, double s);
Tensor square(const Tensor& x);
Tensor silu(const Tensor& x);
Tensor layernorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps = 1e-5);
Tensor slice_cols(const Tensor& x, int begin, int count);
Tensor concat_cols(const std::vector<Tensor>& parts);
// delta +1 reads the previous row, -1 the next; zero at example edges.
Tensor shift_rows(const Tensor& x, int delta, int batch);
Tensor avgpool_rows2(const Tensor& x, int batch);
Tensor upsample_rows2(const Tensor& x, int batch);
Tensor gather_rows(const Tensor& table, const std::vector<int>& ids);
// q (B*nq)xC, k/v (B*nk)xC, C = heads*d. kv_valid flags padded key rows;
// every example needs at least one valid key.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, int batch,
                 int heads, const std::vector<char>* kv_valid = nullptr);
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);

Tensor conv1d_k3(const Tensor& x, const Tensor& w_prev, const Tensor& w_self,
                 const Tensor& w_next, const Tensor& bias, int batch);
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);

class ParamStore {
 public:
  Tensor create(const std::string& name, int rows, int cols, double init_scale,
                Rng& rng);
  Tensor create_fill(const std::string& name, int rows, int cols, double fill);
  Tensor get(const std::string& name) const;
  bool has(const std::string& name) const { return params_.count(name) > 0; }
  const std::map<std::string, Tensor>& items() const { return params_; }
  void set_value(const std::string& name, const Eigen::MatrixXd& v);
  void zero_grad();
  size_t scalar_count() const;

 private:
  std::map<std::string, Tensor> params_;
};

}  // namespace nn
}  // namespace scenediff
