#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace g2s {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string shape_str(const Matrix& m);

// A trainable (or frozen) tensor plus its gradient accumulator and Adam
// moment buffers. Shapes of grad and moments always equal the value shape.
class Parameter {
 public:
  Parameter(std::string name, Matrix value, bool frozen = false);

  const std::string& name() const { return name_; }
  bool frozen() const { return frozen_; }

  Matrix& value() { return value_; }
  const Matrix& value() const { return value_; }
  Matrix& grad() { return grad_; }
  const Matrix& grad() const { return grad_; }
  Matrix& first_moment() { return m_; }
  Matrix& second_moment() { return v_; }
  std::int64_t& steps() { return steps_; }
  std::int64_t steps() const { return steps_; }

  void zero_grad() { grad_.setZero(); }

 private:
  std::string name_;
  Matrix value_;
  Matrix grad_;
  Matrix m_;
  Matrix v_;
  std::int64_t steps_ = 0;
  bool frozen_ = false;
};

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  double scalar() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// One recording of a computation. Values are computed eagerly; backward()
// replays the recorded vector-Jacobian products in reverse order.
class Tape {
 public:
  using Backward = std::function<void(const Matrix& grad)>;

  Tape() = default;
  // track_grad = false records values only (inference).
  explicit Tape(bool track_grad) : track_grad_(track_grad) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // Bound once per tape; repeated calls return the same Var.
  Var parameter(Parameter& p);
  Var record(Matrix value, std::span<const Var> inputs, Backward backward);

  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  template <class Derived>
  void accumulate(Var v, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[v.id()];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }

  // Seeds d(loss)/d(loss) = 1. Parameter gradients accumulate across calls.
  void backward(Var loss);

  const Matrix& value(int id) const {
    const Node& n = nodes_[id];
    return n.param ? n.param->value() : n.value;
  }
  // Empty matrix when no gradient reached the node.
  const Matrix& grad(Var v) const { return nodes_[v.id()].grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> bound_;
  bool track_grad_ = true;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }

// Primitive operations. All inputs must live on the same tape.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var add_bias(Var m, Var column);  // adds a column vector to every column
Var broadcast_cols(Var column, Index cols);
Var scale(Var a, double c);
Var mul_scalar(Var a, Var s);  // s is 1x1
Var reciprocal(Var s);         // s is 1x1
Var one_minus(Var a);
Var neg(Var a);
Var sigmoid(Var a);
// Gradient passes only where lo <= a <= hi.
Var clamp(Var a, double lo, double hi);
Var tanh(Var a);
Var log(Var a);
// Normalizes every column independently.
Var softmax(Var a);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(Var a, Index begin, Index count);
Var column(Var a, Index j);
Var transpose(Var a);
Var sum(std::span<const Var> terms);
Var mean_cols(Var a);
Var sum_all(Var a);
Var mean(Var a);
Var pick(Var a, Index row, Index col = 0);
// Inverted dropout: survivors are scaled by 1 / (1 - rate).
Var dropout(Var a, double rate, Rng& rng);
// Columns of a parameter table. Frozen tables yield constants.
Var lookup(Tape& tape, Parameter& table, std::span<const int> ids);
// out.col(j) = sum of a.col(k) for k in lists[j].
Var gather_sum(Var a, const std::vector<std::vector<int>>& lists);
// out(index[i]) += v(i) for a column vector v; negative indices are skipped.
Var scatter_rows(Var v, std::span<const int> index, Index out_rows);
Var pad_rows(Var a, Index rows);

}  // namespace g2s
