#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace gedkit {

struct TensorNode {
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;  // sized like value when requires_grad
  bool requires_grad = false;
};

// Value handle over a shared node. Scalars are shape {1}. Operations never
// mutate their inputs; gradients accumulate additively across uses.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor from_data(std::vector<int> shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  int dim(int i) const { return node_->shape[i]; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int numel() const { return static_cast<int>(node_->value.size()); }
  double item() const;

  std::vector<double>& value() { return node_->value; }
  const std::vector<double>& value() const { return node_->value; }
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  bool requires_grad() const { return node_->requires_grad; }
  void zero_grad();

  Tensor detached_copy() const;  // fresh node, same values, no grad history

  std::shared_ptr<TensorNode> node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> n) : node_(std::move(n)) {}
  std::shared_ptr<TensorNode> node_;
};

// Dynamic reverse-mode tape: operations append backward closures, backward()
// replays them once in reverse order. A disabled tape records nothing, which
// turns the same op functions into plain inference arithmetic.
class Tape {
 public:
  explicit Tape(bool enabled = true) : enabled_(enabled) {}

  bool enabled() const { return enabled_; }
  void record(std::function<void()> fn);
  void backward(const Tensor& loss);  // loss must be scalar
  void clear() { ops_.clear(); }
  std::size_t size() const { return ops_.size(); }

 private:
  bool enabled_;
  std::vector<std::function<void()>> ops_;
};

// Shape-checked ops; every one is tape-recorded when an input requires grad.
Tensor matmul(Tape& t, const Tensor& a, const Tensor& b);   // (m,k)x(k,n)
Tensor matvec(Tape& t, const Tensor& m, const Tensor& v);   // (r,c)x(c) -> (r)
Tensor add(Tape& t, const Tensor& a, const Tensor& b);      // same shape
Tensor sub(Tape& t, const Tensor& a, const Tensor& b);
Tensor mul(Tape& t, const Tensor& a, const Tensor& b);      // elementwise
Tensor scale(Tape& t, const Tensor& a, double s);
Tensor add_rowvec(Tape& t, const Tensor& m, const Tensor& v);  // (r,c) + (c)
Tensor transpose(Tape& t, const Tensor& a);
Tensor concat(Tape& t, const Tensor& a, const Tensor& b);   // 1-D
Tensor slice(Tape& t, const Tensor& a, int start, int len); // 1-D
Tensor sum(Tape& t, const Tensor& a);                       // -> scalar
Tensor mean(Tape& t, const Tensor& a);                      // -> scalar
Tensor sum_rows(Tape& t, const Tensor& m);                  // (r,c) -> (c)
Tensor dot(Tape& t, const Tensor& a, const Tensor& b);      // 1-D x 1-D -> scalar
// out_k = sum_ab hi[a] * w3[a,b,k] * hj[b]; w3 has shape (d, d, k).
Tensor bilinear(Tape& t, const Tensor& hi, const Tensor& w3, const Tensor& hj);

Tensor relu(Tape& t, const Tensor& a);
Tensor sigmoid(Tape& t, const Tensor& a);
Tensor tanh_act(Tape& t, const Tensor& a);

}  // namespace gedkit
