#include "scenediff/nn/tensor.hpp"

#include <cmath>
#include <unordered_set>

#include "scenediff/common.hpp"

namespace scenediff {
namespace nn {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

void Node::ensure_grad() {
  if (grad.size() == 0) grad = Eigen::MatrixXd::Zero(value.rows(), value.cols());
}

void Node::accumulate(const Eigen::MatrixXd& g) {
  check(g.rows() == value.rows() && g.cols() == value.cols(),
        "autodiff: gradient shape mismatch");
  ensure_grad();
  grad += g;
}

Tensor constant(Eigen::MatrixXd v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  return n;
}

Tensor leaf_param(Eigen::MatrixXd v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->requires_grad = true;
  return n;
}

Tensor make_op(Eigen::MatrixXd value, std::vector<Tensor> parents,
               std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  bool need = false;
  if (g_grad_enabled)
    for (const auto& p : parents)
      if (p && p->requires_grad) need = true;
  if (need) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

void backward(const Tensor& root) {
  check(root != nullptr, "backward: null root");
  check(root->value.rows() == 1 && root->value.cols() == 1,
        "backward: root must be a 1x1 scalar");

  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* n;
    size_t next;
  };
  std::vector<Frame> stack;
  stack.push_back({root.get(), 0});
  visited.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.n->parents.size()) {
      Node* p = f.n->parents[f.next++].get();
      if (p && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad(0, 0) = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.size() > 0) n->backward_fn(*n);
  }
}

static void check_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  check(a->rows() == b->rows() && a->cols() == b->cols(),
        std::string(who) + ": shape mismatch");
}

static int rows_per_example(const Tensor& x, int batch, const char* who) {
  check(batch > 0 && x->rows() % batch == 0,
        std::string(who) + ": rows not divisible by batch");
  return static_cast<int>(x->rows()) / batch;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check(a->cols() == b->rows(), "matmul: inner dimension mismatch");
  return make_op(a->value * b->value, {a, b}, [a, b](Node& self) {
    if (a->requires_grad) a->accumulate(self.grad * b->value.transpose());
    if (b->requires_grad) b->accumulate(a->value.transpose() * self.grad);
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  return make_op(a->value + b->value, {a, b}, [a, b](Node& self) {
    if (a->requires_grad) a->accumulate(self.grad);
    if (b->requires_grad) b->accumulate(self.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  return make_op(a->value - b->value, {a, b}, [a, b](Node& self) {
    if (a->requires_grad) a->accumulate(self.grad);
    if (b->requires_grad) b->accumulate(-self.grad);
  });
}

Tensor add_rowvec(const Tensor& x, const Tensor& bias) {
  check(bias->rows() == 1 && bias->cols() == x->cols(),
        "add_rowvec: bias must be 1 x cols");
  Eigen::MatrixXd y = x->value;
  y.rowwise() += bias->value.row(0);
  return make_op(std::move(y), {x, bias}, [x, bias](Node& self) {
    if (x->requires_grad) x->accumulate(self.grad);
    if (bias->requires_grad) bias->accumulate(self.grad.colwise().sum());
  });
}

Tensor add_per_example(const Tensor& x, const Tensor& e, int batch) {
  const int n = rows_per_example(x, batch, "add_per_example");
  check(e->rows() == batch && e->cols() == x->cols(),
        "add_per_example: expected batch x cols");
  Eigen::MatrixXd y = x->value;
  for (int b = 0; b < batch; ++b) y.middleRows(b * n, n).rowwise() += e->value.row(b);
  return make_op(std::move(y), {x, e}, [x, e, batch, n](Node& self) {
    if (x->requires_grad) x->accumulate(self.grad);
    if (e->requires_grad) {
      Eigen::MatrixXd g(batch, e->cols());
      for (int b = 0; b < batch; ++b)
        g.row(b) = self.grad.middleRows(b * n, n).colwise().sum();
      e->accumulate(g);
    }
  });
}

Tensor add_constmat(const Tensor& x, const Eigen::MatrixXd& m) {
  check(x->rows() == m.rows() && x->cols() == m.cols(), "add_constmat: shape mismatch");
  return make_op(x->value + m, {x}, [x](Node& self) {
    if (x->requires_grad) x->accumulate(self.grad);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  return make_op(a->value.cwiseProduct(b->value), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) a->accumulate(self.grad.cwiseProduct(b->value));
    if (b->requires_grad) b->accumulate(self.grad.cwiseProduct(a->value));
  });
}

Tensor mul_const(const Tensor& x, const Eigen::MatrixXd& m) {
  check(x->rows() == m.rows() && x->cols() == m.cols(), "mul_const: shape mismatch");
  return make_op(x->value.cwiseProduct(m), {x}, [x, m](Node& self) {
    if (x->requires_grad) x->accumulate(self.grad.cwiseProduct(m));
  });
}

Tensor scale(const Tensor& x, double s) {
  return make_op(x->value * s, {x}, [x, s](Node& self) {
    if (x->requires_grad) x->accumulate(self.grad * s);
  });
}

Tensor square(const Tensor& x) {
  return make_op(x->value.cwiseProduct(x->value), {x}, [x](Node& self) {
    if (x->requires_grad) x->accumulate(2.0 * self.grad.cwiseProduct(x->value));
  });
}

Tensor silu(const Tensor& x) {
  Eigen::ArrayXXd sig = 1.0 / (1.0 + (-x->value.array()).exp());
  Eigen::MatrixXd y = (x->value.array() * sig).matrix();
  return make_op(std::move(y), {x}, [x](Node& self) {
    if (!x->requires_grad) return;
    Eigen::ArrayXXd s = 1.0 / (1.0 + (-x->value.array()).exp());
    Eigen::ArrayXXd d = s + x->value.array() * s * (1.0 - s);
    x->accumulate((self.grad.array() * d).matrix());
  });
}

Tensor layernorm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const Eigen::Index C = x->cols();
  check(gain->rows() == 1 && gain->cols() == C && bias->rows() == 1 && bias->cols() == C,
        "layernorm: gain/bias must be 1 x cols");
  check(C >= 2, "layernorm: needs at least 2 columns");
  auto xhat = std::make_shared<Eigen::MatrixXd>(x->rows(), C);
  auto inv = std::make_shared<Eigen::VectorXd>(x->rows());
  Eigen::MatrixXd y(x->rows(), C);
  for (Eigen::Index i = 0; i < x->rows(); ++i) {
    const double mu = x->value.row(i).mean();
    Eigen::RowVectorXd c = x->value.row(i).array() - mu;
    const double var = c.squaredNorm() / static_cast<double>(C);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv)(i) = is;
    xhat->row(i) = c * is;
    y.row(i) = xhat->row(i).cwiseProduct(gain->value.row(0)) + bias->value.row(0);
  }
  return make_op(std::move(y), {x, gain, bias}, [x, gain, bias, xhat, inv](Node& self) {
    if (bias->requires_grad) bias->accumulate(self.grad.colwise().sum());
    if (gain->requires_grad)
      gain->accumulate(self.grad.cwiseProduct(*xhat).colwise().sum());
    if (!x->requires_grad) return;
    const Eigen::Index C = x->cols();
    Eigen::MatrixXd gx(x->rows(), C);
    for (Eigen::Index i = 0; i < x->rows(); ++i) {
      Eigen::RowVectorXd gh = self.grad.row(i).cwiseProduct(gain->value.row(0));
      const double m1 = gh.mean();
      const double m2 = gh.cwiseProduct(xhat->row(i)).mean();
      gx.row(i) = (*inv)(i) * (gh.array() - m1 - xhat->row(i).array() * m2).matrix();
    }
    x->accumulate(gx);
  });
}

Tensor slice_cols(const Tensor& x, int begin, int count) {
  check(begin >= 0 && count > 0 && begin + count <= x->cols(),
        "slice_cols: range out of bounds");
  return make_op(x->value.middleCols(begin, count), {x}, [x, begin, count](Node& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    x->grad.middleCols(begin, count) += self.grad;
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  check(!parts.empty(), "concat_cols: empty input");
  const Eigen::Index R = parts[0]->rows();
  Eigen::Index C = 0;
  for (const auto& p : parts) {
    check(p->rows() == R, "concat_cols: row mismatch");
    C += p->cols();
  }
  Eigen::MatrixXd y(R, C);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    y.middleCols(off, p->cols()) = p->value;
    off += p->cols();
  }
  return make_op(std::move(y), parts, [parts](Node& self) {
    Eigen::Index off = 0;
    for (const auto& p : parts) {
      if (p->requires_grad) p->accumulate(self.grad.middleCols(off, p->cols()));
      off += p->cols();
    }
  });
}

static Eigen::MatrixXd shifted(const Eigen::MatrixXd& v, int delta, int batch, int n) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(v.rows(), v.cols());
  for (int b = 0; b < batch; ++b) {
    const int base = b * n;
    for (int i = 0; i < n; ++i) {
      const int src = i - delta;
      if (src >= 0 && src < n) y.row(base + i) = v.row(base + src);
    }
  }
  return y;
}

Tensor shift_rows(const Tensor& x, int delta, int batch) {
  check(delta == 1 || delta == -1, "shift_rows: delta must be +1 or -1");
  const int n = rows_per_example(x, batch, "shift_rows");
  return make_op(shifted(x->value, delta, batch, n), {x},
                 [x, delta, batch, n](Node& self) {
                   if (x->requires_grad)
                     x->accumulate(shifted(self.grad, -delta, batch, n));
                 });
}

Tensor avgpool_rows2(const Tensor& x, int batch) {
  const int n = rows_per_example(x, batch, "avgpool_rows2");
  check(n % 2 == 0, "avgpool_rows2: rows per example must be even");
  const int m = n / 2;
  Eigen::MatrixXd y(static_cast<Eigen::Index>(batch) * m, x->cols());
  for (int b = 0; b < batch; ++b)
    for (int j = 0; j < m; ++j)
      y.row(b * m + j) =
          0.5 * (x->value.row(b * n + 2 * j) + x->value.row(b * n + 2 * j + 1));
  return make_op(std::move(y), {x}, [x, batch, n, m](Node& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (int b = 0; b < batch; ++b)
      for (int j = 0; j < m; ++j) {
        x->grad.row(b * n + 2 * j) += 0.5 * self.grad.row(b * m + j);
        x->grad.row(b * n + 2 * j + 1) += 0.5 * self.grad.row(b * m + j);
      }
  });
}

Tensor upsample_rows2(const Tensor& x, int batch) {
  const int n = rows_per_example(x, batch, "upsample_rows2");
  Eigen::MatrixXd y(x->rows() * 2, x->cols());
  for (int b = 0; b < batch; ++b)
    for (int i = 0; i < n; ++i) {
      y.row(b * 2 * n + 2 * i) = x->value.row(b * n + i);
      y.row(b * 2 * n + 2 * i + 1) = x->value.row(b * n + i);
    }
  return make_op(std::move(y), {x}, [x, batch, n](Node& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (int b = 0; b < batch; ++b)
      for (int i = 0; i < n; ++i)
        x->grad.row(b * n + i) +=
            self.grad.row(b * 2 * n + 2 * i) + self.grad.row(b * 2 * n + 2 * i + 1);
  });
}

Tensor gather_rows(const Tensor& table, const std::vector<int>& ids) {
  Eigen::MatrixXd y(static_cast<Eigen::Index>(ids.size()), table->cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    check(ids[i] >= 0 && ids[i] < table->rows(), "gather_rows: id out of range");
    y.row(static_cast<Eigen::Index>(i)) = table->value.row(ids[i]);
  }
  return make_op(std::move(y), {table}, [table, ids](Node& self) {
    if (!table->requires_grad) return;
    table->ensure_grad();
    for (size_t i = 0; i < ids.size(); ++i)
      table->grad.row(ids[i]) += self.grad.row(static_cast<Eigen::Index>(i));
  });
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, int batch,
                 int heads, const std::vector<char>* kv_valid) {
  const Eigen::Index C = q->cols();
  check(heads >= 1 && C % heads == 0, "attention: cols must divide by heads");
  check(k->cols() == C && v->cols() == C, "attention: q/k/v width mismatch");
  check(k->rows() == v->rows(), "attention: k/v row mismatch");
  const int d = static_cast<int>(C) / heads;
  const int nq = rows_per_example(q, batch, "attention");
  const int nk = rows_per_example(k, batch, "attention");
  auto mask = std::make_shared<std::vector<char>>();
  if (kv_valid) {
    check(static_cast<Eigen::Index>(kv_valid->size()) == k->rows(),
          "attention: kv_valid size mismatch");
    *mask = *kv_valid;
    for (int b = 0; b < batch; ++b) {
      bool any = false;
      for (int j = 0; j < nk; ++j) any = any || (*mask)[b * nk + j];
      check(any, "attention: example with no valid key rows");
    }
  }
  const double sc = 1.0 / std::sqrt(static_cast<double>(d));
  auto attn = std::make_shared<std::vector<Eigen::MatrixXd>>();
  attn->reserve(static_cast<size_t>(batch) * heads);
  Eigen::MatrixXd out(q->rows(), C);
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < heads; ++h) {
      Eigen::MatrixXd S = (q->value.block(b * nq, h * d, nq, d) *
                           k->value.block(b * nk, h * d, nk, d).transpose()) *
                          sc;
      if (!mask->empty())
        for (int j = 0; j < nk; ++j)
          if (!(*mask)[b * nk + j]) S.col(j).array() -= 1e30;
      for (int i = 0; i < nq; ++i) {
        const double mx = S.row(i).maxCoeff();
        S.row(i) = (S.row(i).array() - mx).exp();
        S.row(i) /= S.row(i).sum();
      }
      out.block(b * nq, h * d, nq, d) = S * v->value.block(b * nk, h * d, nk, d);
      attn->push_back(std::move(S));
    }
  }
  return make_op(std::move(out), {q, k, v},
                 [q, k, v, attn, batch, heads, d, nq, nk, sc](Node& self) {
                   const bool gq = q->requires_grad, gk = k->requires_grad,
                              gv = v->requires_grad;
                   if (gq) q->ensure_grad();
                   if (gk) k->ensure_grad();
                   if (gv) v->ensure_grad();
                   for (int b = 0; b < batch; ++b)
                     for (int h = 0; h < heads; ++h) {
                       const Eigen::MatrixXd& A = (*attn)[static_cast<size_t>(b) * heads + h];
                       auto G = self.grad.block(b * nq, h * d, nq, d);
                       auto K = k->value.block(b * nk, h * d, nk, d);
                       auto Q = q->value.block(b * nq, h * d, nq, d);
                       auto V = v->value.block(b * nk, h * d, nk, d);
                       if (gv) v->grad.block(b * nk, h * d, nk, d) += A.transpose() * G;
                       if (!gq && !gk) continue;
                       Eigen::MatrixXd Ga = G * V.transpose();
                       Eigen::VectorXd rs = Ga.cwiseProduct(A).rowwise().sum();
                       Eigen::MatrixXd Gs = A.cwiseProduct(Ga.colwise() - rs);
                       if (gq) q->grad.block(b * nq, h * d, nq, d) += Gs * K * sc;
                       if (gk)
                         k->grad.block(b * nk, h * d, nk, d) += Gs.transpose() * Q * sc;
                     }
                 });
}

Tensor sum_all(const Tensor& x) {
  Eigen::MatrixXd y(1, 1);
  y(0, 0) = x->value.sum();
  return make_op(std::move(y), {x}, [x](Node& self) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    x->grad.array() += self.grad(0, 0);
  });
}

Tensor mean_all(const Tensor& x) {
  return scale(sum_all(x), 1.0 / static_cast<double>(x->value.size()));
}

Tensor conv1d_k3(const Tensor& x, const Tensor& w_prev, const Tensor& w_self,
                 const Tensor& w_next, const Tensor& bias, int batch) {
  Tensor y = add(add(matmul(shift_rows(x, 1, batch), w_prev), matmul(x, w_self)),
                 matmul(shift_rows(x, -1, batch), w_next));
  return add_rowvec(y, bias);
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  return add_rowvec(matmul(x, w), b);
}

Tensor ParamStore::create(const std::string& name, int rows, int cols,
                          double init_scale, Rng& rng) {
  check(!has(name), "ParamStore: duplicate parameter '" + name + "'");
  Eigen::MatrixXd v(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) v(i, j) = init_scale == 0.0 ? 0.0 : rng.normal() * init_scale;
  Tensor t = leaf_param(std::move(v));
  params_.emplace(name, t);
  return t;
}

Tensor ParamStore::create_fill(const std::string& name, int rows, int cols, double fill) {
  check(!has(name), "ParamStore: duplicate parameter '" + name + "'");
  Tensor t = leaf_param(Eigen::MatrixXd::Constant(rows, cols, fill));
  params_.emplace(name, t);
  return t;
}

Tensor ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  check(it != params_.end(), "ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

void ParamStore::set_value(const std::string& name, const Eigen::MatrixXd& v) {
  auto it = params_.find(name);
  if (it == params_.end()) {
    params_.emplace(name, leaf_param(v));
    return;
  }
  check(it->second->value.rows() == v.rows() && it->second->value.cols() == v.cols(),
        "ParamStore: shape mismatch loading '" + name + "'");
  it->second->value = v;
}

void ParamStore::zero_grad() {
  for (auto& [name, t] : params_) t->grad.resize(0, 0);
}

size_t ParamStore::scalar_count() const {
  size_t n = 0;
  for (const auto& [name, t] : params_) n += static_cast<size_t>(t->value.size());
  return n;
}

}  // namespace nn
}  // namespace scenediff
