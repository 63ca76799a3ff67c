#include "gedkit/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gedkit {

namespace {

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("tensor shape dimensions must be >= 0");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

[[noreturn]] void shape_error(const char* op, const Tensor& a) {
  std::string s = std::string("shape mismatch in ") + op + ": (";
  for (std::size_t i = 0; i < a.shape().size(); ++i)
    s += (i ? "," : "") + std::to_string(a.shape()[i]);
  throw std::invalid_argument(s + ")");
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error(op, a);
}

std::shared_ptr<TensorNode> new_node(std::vector<int> shape, bool requires_grad) {
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->value.assign(shape_numel(n->shape), 0.0);
  n->requires_grad = requires_grad;
  if (requires_grad) n->grad.assign(n->value.size(), 0.0);
  return n;
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  return Tensor(new_node(std::move(shape), requires_grad));
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<double> data,
                         bool requires_grad) {
  auto n = new_node(std::move(shape), requires_grad);
  if (data.size() != n->value.size())
    throw std::invalid_argument("tensor data length does not match shape");
  n->value = std::move(data);
  return Tensor(n);
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from_data({1}, {v}, requires_grad);
}

double Tensor::item() const {
  if (numel() != 1) throw std::invalid_argument("item() requires a 1-element tensor");
  return node_->value[0];
}

std::vector<double>& Tensor::grad() {
  if (!node_->requires_grad)
    throw std::logic_error("grad() on a tensor without requires_grad");
  return node_->grad;
}

const std::vector<double>& Tensor::grad() const {
  if (!node_->requires_grad)
    throw std::logic_error("grad() on a tensor without requires_grad");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_->requires_grad) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detached_copy() const {
  return from_data(node_->shape, node_->value, false);
}

void Tape::record(std::function<void()> fn) {
  if (enabled_) ops_.push_back(std::move(fn));
}

void Tape::backward(const Tensor& loss) {
  if (loss.numel() != 1)
    throw std::invalid_argument("backward requires a scalar loss");
  if (!enabled_) throw std::logic_error("backward on a disabled tape");
  if (loss.requires_grad()) loss.node()->grad[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

namespace {

bool track(const Tape& t, std::initializer_list<const Tensor*> inputs) {
  if (!t.enabled()) return false;
  for (const Tensor* in : inputs)
    if (in->requires_grad()) return true;
  return false;
}

Tensor out_like(std::vector<int> shape, bool rg) {
  return Tensor::zeros(std::move(shape), rg);
}

}  // namespace

Tensor matmul(Tape& t, const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) shape_error("matmul", a);
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  bool rg = track(t, {&a, &b});
  Tensor c = out_like({m, n}, rg);
  const auto& av = a.value();
  const auto& bv = b.value();
  auto& cv = c.value();
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      double aip = av[i * k + p];
      if (aip == 0.0) continue;
      for (int j = 0; j < n; ++j) cv[i * n + j] += aip * bv[p * n + j];
    }
  if (rg) {
    auto an = a.node(), bn = b.node(), cn = c.node();
    t.record([an, bn, cn, m, k, n] {
      const auto& g = cn->grad;
      if (an->requires_grad) {
        auto& ga = an->grad;
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += g[i * n + j] * bn->value[p * n + j];
            ga[i * k + p] += s;
          }
      }
      if (bn->requires_grad) {
        auto& gb = bn->grad;
        for (int p = 0; p < k; ++p)
          for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) s += an->value[i * k + p] * g[i * n + j];
            gb[p * n + j] += s;
          }
      }
    });
  }
  return c;
}

Tensor matvec(Tape& t, const Tensor& m, const Tensor& v) {
  if (m.rank() != 2 || v.rank() != 1 || m.dim(1) != v.dim(0)) shape_error("matvec", m);
  const int r = m.dim(0), c = m.dim(1);
  bool rg = track(t, {&m, &v});
  Tensor y = out_like({r}, rg);
  const auto& mv = m.value();
  const auto& vv = v.value();
  auto& yv = y.value();
  for (int i = 0; i < r; ++i) {
    double s = 0.0;
    for (int j = 0; j < c; ++j) s += mv[i * c + j] * vv[j];
    yv[i] = s;
  }
  if (rg) {
    auto mn = m.node(), vn = v.node(), yn = y.node();
    t.record([mn, vn, yn, r, c] {
      const auto& g = yn->grad;
      if (mn->requires_grad)
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < c; ++j) mn->grad[i * c + j] += g[i] * vn->value[j];
      if (vn->requires_grad)
        for (int j = 0; j < c; ++j) {
          double s = 0.0;
          for (int i = 0; i < r; ++i) s += mn->value[i * c + j] * g[i];
          vn->grad[j] += s;
        }
    });
  }
  return y;
}

namespace {

template <typename Fwd, typename Bwd>
Tensor elementwise2(Tape& t, const char* name, const Tensor& a, const Tensor& b,
                    Fwd fwd, Bwd bwd) {
  check_same_shape(name, a, b);
  bool rg = track(t, {&a, &b});
  Tensor c = out_like(a.shape(), rg);
  const auto& av = a.value();
  const auto& bv = b.value();
  auto& cv = c.value();
  for (std::size_t i = 0; i < cv.size(); ++i) cv[i] = fwd(av[i], bv[i]);
  if (rg) {
    auto an = a.node(), bn = b.node(), cn = c.node();
    t.record([an, bn, cn, bwd] {
      for (std::size_t i = 0; i < cn->grad.size(); ++i) {
        auto [da, db] = bwd(an->value[i], bn->value[i]);
        if (an->requires_grad) an->grad[i] += cn->grad[i] * da;
        if (bn->requires_grad) bn->grad[i] += cn->grad[i] * db;
      }
    });
  }
  return c;
}

template <typename Fwd, typename Bwd>
Tensor elementwise1(Tape& t, const Tensor& a, Fwd fwd, Bwd bwd) {
  bool rg = track(t, {&a});
  Tensor c = out_like(a.shape(), rg);
  const auto& av = a.value();
  auto& cv = c.value();
  for (std::size_t i = 0; i < cv.size(); ++i) cv[i] = fwd(av[i]);
  if (rg) {
    auto an = a.node(), cn = c.node();
    t.record([an, cn, bwd] {
      for (std::size_t i = 0; i < cn->grad.size(); ++i)
        an->grad[i] += cn->grad[i] * bwd(an->value[i], cn->value[i]);
    });
  }
  return c;
}

}  // namespace

Tensor add(Tape& t, const Tensor& a, const Tensor& b) {
  return elementwise2(t, "add", a, b, [](double x, double y) { return x + y; },
                      [](double, double) { return std::pair{1.0, 1.0}; });
}

Tensor sub(Tape& t, const Tensor& a, const Tensor& b) {
  return elementwise2(t, "sub", a, b, [](double x, double y) { return x - y; },
                      [](double, double) { return std::pair{1.0, -1.0}; });
}

Tensor mul(Tape& t, const Tensor& a, const Tensor& b) {
  return elementwise2(t, "mul", a, b, [](double x, double y) { return x * y; },
                      [](double x, double y) { return std::pair{y, x}; });
}

Tensor scale(Tape& t, const Tensor& a, double s) {
  return elementwise1(t, a, [s](double x) { return s * x; },
                      [s](double, double) { return s; });
}

Tensor add_rowvec(Tape& t, const Tensor& m, const Tensor& v) {
  if (m.rank() != 2 || v.rank() != 1 || m.dim(1) != v.dim(0))
    shape_error("add_rowvec", m);
  const int r = m.dim(0), c = m.dim(1);
  bool rg = track(t, {&m, &v});
  Tensor y = out_like({r, c}, rg);
  const auto& mv = m.value();
  const auto& vv = v.value();
  auto& yv = y.value();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) yv[i * c + j] = mv[i * c + j] + vv[j];
  if (rg) {
    auto mn = m.node(), vn = v.node(), yn = y.node();
    t.record([mn, vn, yn, r, c] {
      if (mn->requires_grad)
        for (std::size_t i = 0; i < yn->grad.size(); ++i) mn->grad[i] += yn->grad[i];
      if (vn->requires_grad)
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < c; ++j) vn->grad[j] += yn->grad[i * c + j];
    });
  }
  return y;
}

Tensor transpose(Tape& t, const Tensor& a) {
  if (a.rank() != 2) shape_error("transpose", a);
  const int r = a.dim(0), c = a.dim(1);
  bool rg = track(t, {&a});
  Tensor y = out_like({c, r}, rg);
  const auto& av = a.value();
  auto& yv = y.value();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) yv[j * r + i] = av[i * c + j];
  if (rg) {
    auto an = a.node(), yn = y.node();
    t.record([an, yn, r, c] {
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) an->grad[i * c + j] += yn->grad[j * r + i];
    });
  }
  return y;
}

Tensor concat(Tape& t, const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1) shape_error("concat", a);
  const int na = a.dim(0), nb = b.dim(0);
  bool rg = track(t, {&a, &b});
  Tensor y = out_like({na + nb}, rg);
  auto& yv = y.value();
  std::copy(a.value().begin(), a.value().end(), yv.begin());
  std::copy(b.value().begin(), b.value().end(), yv.begin() + na);
  if (rg) {
    auto an = a.node(), bn = b.node(), yn = y.node();
    t.record([an, bn, yn, na, nb] {
      if (an->requires_grad)
        for (int i = 0; i < na; ++i) an->grad[i] += yn->grad[i];
      if (bn->requires_grad)
        for (int i = 0; i < nb; ++i) bn->grad[i] += yn->grad[na + i];
    });
  }
  return y;
}

Tensor slice(Tape& t, const Tensor& a, int start, int len) {
  if (a.rank() != 1) shape_error("slice", a);
  if (start < 0 || len < 0 || start + len > a.dim(0))
    throw std::invalid_argument("slice out of range");
  bool rg = track(t, {&a});
  Tensor y = out_like({len}, rg);
  std::copy(a.value().begin() + start, a.value().begin() + start + len,
            y.value().begin());
  if (rg) {
    auto an = a.node(), yn = y.node();
    t.record([an, yn, start, len] {
      for (int i = 0; i < len; ++i) an->grad[start + i] += yn->grad[i];
    });
  }
  return y;
}

Tensor sum(Tape& t, const Tensor& a) {
  bool rg = track(t, {&a});
  Tensor y = out_like({1}, rg);
  y.value()[0] = std::accumulate(a.value().begin(), a.value().end(), 0.0);
  if (rg) {
    auto an = a.node(), yn = y.node();
    t.record([an, yn] {
      for (auto& g : an->grad) g += yn->grad[0];
    });
  }
  return y;
}

Tensor mean(Tape& t, const Tensor& a) {
  if (a.numel() == 0) throw std::invalid_argument("mean of empty tensor");
  const double inv = 1.0 / a.numel();
  bool rg = track(t, {&a});
  Tensor y = out_like({1}, rg);
  y.value()[0] = std::accumulate(a.value().begin(), a.value().end(), 0.0) * inv;
  if (rg) {
    auto an = a.node(), yn = y.node();
    t.record([an, yn, inv] {
      for (auto& g : an->grad) g += yn->grad[0] * inv;
    });
  }
  return y;
}

Tensor sum_rows(Tape& t, const Tensor& m) {
  if (m.rank() != 2) shape_error("sum_rows", m);
  const int r = m.dim(0), c = m.dim(1);
  bool rg = track(t, {&m});
  Tensor y = out_like({c}, rg);
  const auto& mv = m.value();
  auto& yv = y.value();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) yv[j] += mv[i * c + j];
  if (rg) {
    auto mn = m.node(), yn = y.node();
    t.record([mn, yn, r, c] {
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) mn->grad[i * c + j] += yn->grad[j];
    });
  }
  return y;
}

Tensor dot(Tape& t, const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1 || a.dim(0) != b.dim(0)) shape_error("dot", a);
  bool rg = track(t, {&a, &b});
  Tensor y = out_like({1}, rg);
  double s = 0.0;
  for (int i = 0; i < a.dim(0); ++i) s += a.value()[i] * b.value()[i];
  y.value()[0] = s;
  if (rg) {
    auto an = a.node(), bn = b.node(), yn = y.node();
    t.record([an, bn, yn] {
      const double g = yn->grad[0];
      for (std::size_t i = 0; i < an->value.size(); ++i) {
        if (an->requires_grad) an->grad[i] += g * bn->value[i];
        if (bn->requires_grad) bn->grad[i] += g * an->value[i];
      }
    });
  }
  return y;
}

Tensor bilinear(Tape& t, const Tensor& hi, const Tensor& w3, const Tensor& hj) {
  if (hi.rank() != 1 || hj.rank() != 1 || w3.rank() != 3 || w3.dim(0) != hi.dim(0) ||
      w3.dim(1) != hj.dim(0))
    shape_error("bilinear", w3);
  const int d = hi.dim(0), d2 = hj.dim(0), k = w3.dim(2);
  bool rg = track(t, {&hi, &w3, &hj});
  Tensor y = out_like({k}, rg);
  const auto& iv = hi.value();
  const auto& jv = hj.value();
  const auto& wv = w3.value();
  auto& yv = y.value();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d2; ++b) {
      const double hh = iv[a] * jv[b];
      if (hh == 0.0) continue;
      const double* w = &wv[(static_cast<std::size_t>(a) * d2 + b) * k];
      for (int q = 0; q < k; ++q) yv[q] += hh * w[q];
    }
  if (rg) {
    auto in = hi.node(), wn = w3.node(), jn = hj.node(), yn = y.node();
    t.record([in, wn, jn, yn, d, d2, k] {
      const auto& g = yn->grad;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d2; ++b) {
          const std::size_t base = (static_cast<std::size_t>(a) * d2 + b) * k;
          double gw = 0.0;
          for (int q = 0; q < k; ++q) gw += g[q] * wn->value[base + q];
          if (in->requires_grad) in->grad[a] += gw * jn->value[b];
          if (jn->requires_grad) jn->grad[b] += gw * in->value[a];
          if (wn->requires_grad) {
            const double hh = in->value[a] * jn->value[b];
            for (int q = 0; q < k; ++q) wn->grad[base + q] += g[q] * hh;
          }
        }
    });
  }
  return y;
}

Tensor relu(Tape& t, const Tensor& a) {
  return elementwise1(t, a, [](double x) { return x > 0.0 ? x : 0.0; },
                      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(Tape& t, const Tensor& a) {
  return elementwise1(t, a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh_act(Tape& t, const Tensor& a) {
  return elementwise1(t, a, [](double x) { return std::tanh(x); },
                      [](double, double y) { return 1.0 - y * y; });
}

}  // namespace gedkit
