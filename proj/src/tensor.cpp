#include "g2s/tensor.hpp"

#include <cmath>
#include <sstream>

namespace g2s {

std::string shape_str(const Matrix& m) {
  return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
}

Parameter::Parameter(std::string name, Matrix value, bool frozen)
    : name_(std::move(name)), value_(std::move(value)), frozen_(frozen) {
  grad_ = Matrix::Zero(value_.rows(), value_.cols());
  m_ = Matrix::Zero(value_.rows(), value_.cols());
  v_ = Matrix::Zero(value_.rows(), value_.cols());
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ShapeError("scalar(): value has shape " + shape_str(v));
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::parameter(Parameter& p) {
  if (auto it = bound_.find(&p); it != bound_.end()) return {this, it->second};
  nodes_.push_back(Node{Matrix{}, {}, {}, &p, track_grad_ && !p.frozen()});
  const int id = static_cast<int>(nodes_.size()) - 1;
  bound_.emplace(&p, id);
  return {this, id};
}

Var Tape::record(Matrix value, std::span<const Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& v : inputs) needs = needs || nodes_[v.id()].requires_grad;
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : Backward{}, nullptr, needs});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var loss) {
  if (loss.value().size() != 1)
    throw ShapeError("backward: loss must be scalar, got " + shape_str(loss.value()));
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[loss.id()].requires_grad) return;
  nodes_[loss.id()].grad = Matrix::Ones(1, 1);
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) continue;
    if (n.param) {
      if (!n.param->frozen()) n.param->grad() += n.grad;
    } else if (n.backward) {
      const Matrix g = n.grad;
      n.backward(g);
    }
  }
}

namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) throw std::invalid_argument(std::string(op) + ": inputs on different tapes");
}

void require_same_shape(Var a, Var b, const char* op) {
  require_same_tape(a, b, op);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.value()) + " vs " +
                     shape_str(b.value()));
}

void require_scalar(Var s, const char* op) {
  if (s.value().size() != 1)
    throw ShapeError(std::string(op) + ": expected 1x1, got " + shape_str(s.value()));
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  if (a.cols() != b.rows())
    throw ShapeError("matmul: shape mismatch " + shape_str(a.value()) + " x " + shape_str(b.value()));
  Tape& t = a.tape();
  const Var in[] = {a, b};
  return t.record(a.value() * b.value(), in, [&t, a, b](const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate(a, g * b.value().transpose());
    if (t.requires_grad(b)) t.accumulate(b, a.value().transpose() * g);
  });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tape& t = a.tape();
  const Var in[] = {a, b};
  return t.record(a.value() + b.value(), in, [&t, a, b](const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tape& t = a.tape();
  const Var in[] = {a, b};
  return t.record(a.value() - b.value(), in, [&t, a, b](const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tape& t = a.tape();
  const Var in[] = {a, b};
  return t.record(a.value().cwiseProduct(b.value()), in, [&t, a, b](const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate(a, g.cwiseProduct(b.value()));
    if (t.requires_grad(b)) t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var add_bias(Var m, Var column) {
  require_same_tape(m, column, "add_bias");
  if (column.cols() != 1 || column.rows() != m.rows())
    throw ShapeError("add_bias: shape mismatch " + shape_str(m.value()) + " + " +
                     shape_str(column.value()));
  Tape& t = m.tape();
  const Var in[] = {m, column};
  Matrix out = m.value().colwise() + column.value().col(0);
  return t.record(std::move(out), in, [&t, m, column](const Matrix& g) {
    t.accumulate(m, g);
    if (t.requires_grad(column)) t.accumulate(column, g.rowwise().sum());
  });
}

Var broadcast_cols(Var column, Index cols) {
  if (column.cols() != 1) throw ShapeError("broadcast_cols: expected column, got " + shape_str(column.value()));
  Tape& t = column.tape();
  const Var in[] = {column};
  return t.record(column.value().replicate(1, cols), in,
                  [&t, column](const Matrix& g) { t.accumulate(column, g.rowwise().sum()); });
}

Var scale(Var a, double c) {
  Tape& t = a.tape();
  const Var in[] = {a};
  return t.record(a.value() * c, in, [&t, a, c](const Matrix& g) { t.accumulate(a, g * c); });
}

Var mul_scalar(Var a, Var s) {
  require_same_tape(a, s, "mul_scalar");
  require_scalar(s, "mul_scalar");
  Tape& t = a.tape();
  const Var in[] = {a, s};
  return t.record(a.value() * s.scalar(), in, [&t, a, s](const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate(a, g * s.scalar());
    if (t.requires_grad(s)) t.accumulate(s, Matrix::Constant(1, 1, g.cwiseProduct(a.value()).sum()));
  });
}

Var reciprocal(Var s) {
  require_scalar(s, "reciprocal");
  Tape& t = s.tape();
  const Var in[] = {s};
  const double x = s.scalar();
  return t.record(Matrix::Constant(1, 1, 1.0 / x), in, [&t, s, x](const Matrix& g) {
    t.accumulate(s, Matrix::Constant(1, 1, -g(0, 0) / (x * x)));
  });
}

Var one_minus(Var a) {
  Tape& t = a.tape();
  const Var in[] = {a};
  return t.record((1.0 - a.value().array()).matrix(), in,
                  [&t, a](const Matrix& g) { t.accumulate(a, -g); });
}

Var neg(Var a) {
  Tape& t = a.tape();
  const Var in[] = {a};
  return t.record(-a.value(), in, [&t, a](const Matrix& g) { t.accumulate(a, -g); });
}

Var sigmoid(Var a) {
  Tape& t = a.tape();
  const Var in[] = {a};
  Matrix y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  const int self = static_cast<int>(t.size());
  return t.record(std::move(y), in, [&t, a, self](const Matrix& g) {
    const auto& y = t.value(self).array();
    t.accumulate(a, (g.array() * y * (1.0 - y)).matrix());
  });
}

Var clamp(Var a, double lo, double hi) {
  Tape& t = a.tape();
  const Var in[] = {a};
  Matrix y = a.value().cwiseMax(lo).cwiseMin(hi);
  return t.record(std::move(y), in, [&t, a, lo, hi](const Matrix& g) {
    const auto& x = a.value().array();
    t.accumulate(a, (g.array() * ((x >= lo) && (x <= hi)).cast<double>()).matrix());
  });
}

Var tanh(Var a) {
  Tape& t = a.tape();
  const Var in[] = {a};
  Matrix y = a.value().array().tanh().matrix();
  const int self = static_cast<int>(t.size());
  return t.record(std::move(y), in, [&t, a, self](const Matrix& g) {
    const auto& y = t.value(self).array();
    t.accumulate(a, (g.array() * (1.0 - y.square())).matrix());
  });
}

Var log(Var a) {
  Tape& t = a.tape();
  const Var in[] = {a};
  return t.record(a.value().array().log().matrix(), in, [&t, a](const Matrix& g) {
    t.accumulate(a, (g.array() / a.value().array()).matrix());
  });
}

Var softmax(Var a) {
  Tape& t = a.tape();
  if (a.rows() == 0) throw ShapeError("softmax: empty input");
  Matrix y(a.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    const auto col = a.value().col(j);
    const double mx = col.maxCoeff();
    auto e = (col.array() - mx).exp();
    y.col(j) = (e / e.sum()).matrix();
  }
  const Var in[] = {a};
  const int self = static_cast<int>(t.size());
  return t.record(std::move(y), in, [&t, a, self](const Matrix& g) {
    const Matrix& y = t.value(self);
    Matrix d(y.rows(), y.cols());
    for (Index j = 0; j < y.cols(); ++j) {
      const double dot = g.col(j).dot(y.col(j));
      d.col(j) = (y.col(j).array() * (g.col(j).array() - dot)).matrix();
    }
    t.accumulate(a, d);
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  Tape& t = parts[0].tape();
  const Index cols = parts[0].cols();
  Index rows = 0;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p, "concat_rows");
    if (p.cols() != cols)
      throw ShapeError("concat_rows: column mismatch " + shape_str(parts[0].value()) + " vs " +
                       shape_str(p.value()));
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Index r = 0;
  for (const Var& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<Var> keep(parts.begin(), parts.end());
  return t.record(std::move(out), parts, [&t, keep](const Matrix& g) {
    Index r = 0;
    for (const Var& p : keep) {
      if (t.requires_grad(p)) t.accumulate(p, g.middleRows(r, p.rows()));
      r += p.rows();
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Tape& t = parts[0].tape();
  const Index rows = parts[0].rows();
  Index cols = 0;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p, "concat_cols");
    if (p.rows() != rows)
      throw ShapeError("concat_cols: row mismatch " + shape_str(parts[0].value()) + " vs " +
                       shape_str(p.value()));
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Index c = 0;
  for (const Var& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  std::vector<Var> keep(parts.begin(), parts.end());
  return t.record(std::move(out), parts, [&t, keep](const Matrix& g) {
    Index c = 0;
    for (const Var& p : keep) {
      if (t.requires_grad(p)) t.accumulate(p, g.middleCols(c, p.cols()));
      c += p.cols();
    }
  });
}

Var slice_rows(Var a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows())
    throw ShapeError("slice_rows: rows [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of " + shape_str(a.value()));
  Tape& t = a.tape();
  const Var in[] = {a};
  const Index rows = a.rows(), cols = a.cols();
  return t.record(a.value().middleRows(begin, count), in,
                  [&t, a, begin, count, rows, cols](const Matrix& g) {
                    Matrix d = Matrix::Zero(rows, cols);
                    d.middleRows(begin, count) = g;
                    t.accumulate(a, d);
                  });
}

Var column(Var a, Index j) {
  if (j < 0 || j >= a.cols())
    throw ShapeError("column: index " + std::to_string(j) + " out of " + shape_str(a.value()));
  Tape& t = a.tape();
  const Var in[] = {a};
  const Index rows = a.rows(), cols = a.cols();
  return t.record(a.value().col(j), in, [&t, a, j, rows, cols](const Matrix& g) {
    Matrix d = Matrix::Zero(rows, cols);
    d.col(j) = g.col(0);
    t.accumulate(a, d);
  });
}

Var transpose(Var a) {
  Tape& t = a.tape();
  const Var in[] = {a};
  return t.record(a.value().transpose(), in,
                  [&t, a](const Matrix& g) { t.accumulate(a, g.transpose()); });
}

Var sum(std::span<const Var> terms) {
  if (terms.empty()) throw ShapeError("sum: no inputs");
  Tape& t = terms[0].tape();
  Matrix out = terms[0].value();
  for (std::size_t k = 1; k < terms.size(); ++k) {
    require_same_shape(terms[0], terms[k], "sum");
    out += terms[k].value();
  }
  std::vector<Var> keep(terms.begin(), terms.end());
  return t.record(std::move(out), terms, [&t, keep](const Matrix& g) {
    for (const Var& v : keep) t.accumulate(v, g);
  });
}

Var mean_cols(Var a) {
  if (a.cols() == 0) throw ShapeError("mean_cols: no columns");
  Tape& t = a.tape();
  const Var in[] = {a};
  const Index n = a.cols();
  return t.record(a.value().rowwise().mean(), in, [&t, a, n](const Matrix& g) {
    t.accumulate(a, (g / static_cast<double>(n)).replicate(1, n));
  });
}

Var sum_all(Var a) {
  Tape& t = a.tape();
  const Var in[] = {a};
  const Index r = a.rows(), c = a.cols();
  return t.record(Matrix::Constant(1, 1, a.value().sum()), in, [&t, a, r, c](const Matrix& g) {
    t.accumulate(a, Matrix::Constant(r, c, g(0, 0)));
  });
}

Var mean(Var a) {
  if (a.value().size() == 0) throw ShapeError("mean: empty input");
  return scale(sum_all(a), 1.0 / static_cast<double>(a.value().size()));
}

Var pick(Var a, Index row, Index col) {
  if (row < 0 || row >= a.rows() || col < 0 || col >= a.cols())
    throw ShapeError("pick: (" + std::to_string(row) + ", " + std::to_string(col) + ") out of " +
                     shape_str(a.value()));
  Tape& t = a.tape();
  const Var in[] = {a};
  const Index r = a.rows(), c = a.cols();
  return t.record(Matrix::Constant(1, 1, a.value()(row, col)), in,
                  [&t, a, row, col, r, c](const Matrix& g) {
                    Matrix d = Matrix::Zero(r, c);
                    d(row, col) = g(0, 0);
                    t.accumulate(a, d);
                  });
}

Var dropout(Var a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw std::invalid_argument("dropout: rate must be < 1");
  Tape& t = a.tape();
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix mask(a.rows(), a.cols());
  const double s = 1.0 / (1.0 - rate);
  for (Index i = 0; i < mask.size(); ++i) mask(i) = keep(rng) ? s : 0.0;
  const Var in[] = {a};
  Matrix out = a.value().cwiseProduct(mask);
  return t.record(std::move(out), in,
                  [&t, a, mask = std::move(mask)](const Matrix& g) { t.accumulate(a, g.cwiseProduct(mask)); });
}

Var lookup(Tape& tape, Parameter& table, std::span<const int> ids) {
  const Index dim = table.value().rows();
  Matrix out(dim, static_cast<Index>(ids.size()));
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] < 0 || ids[k] >= table.value().cols())
      throw ShapeError("lookup: id " + std::to_string(ids[k]) + " out of " + table.name() + " " +
                       shape_str(table.value()));
    out.col(static_cast<Index>(k)) = table.value().col(ids[k]);
  }
  if (table.frozen() || !tape.requires_grad(tape.parameter(table))) return tape.constant(std::move(out));
  // A dummy bound input makes the node require a gradient.
  const Var in[] = {tape.parameter(table)};
  std::vector<int> keep(ids.begin(), ids.end());
  Parameter* p = &table;
  return tape.record(std::move(out), in, [p, keep](const Matrix& g) {
    for (std::size_t k = 0; k < keep.size(); ++k) p->grad().col(keep[k]) += g.col(static_cast<Index>(k));
  });
}

Var gather_sum(Var a, const std::vector<std::vector<int>>& lists) {
  Tape& t = a.tape();
  Matrix out = Matrix::Zero(a.rows(), static_cast<Index>(lists.size()));
  for (std::size_t j = 0; j < lists.size(); ++j)
    for (int k : lists[j]) {
      if (k < 0 || k >= a.cols())
        throw ShapeError("gather_sum: index " + std::to_string(k) + " out of " + shape_str(a.value()));
      out.col(static_cast<Index>(j)) += a.value().col(k);
    }
  const Var in[] = {a};
  const Index rows = a.rows(), cols = a.cols();
  return t.record(std::move(out), in, [&t, a, lists, rows, cols](const Matrix& g) {
    Matrix d = Matrix::Zero(rows, cols);
    for (std::size_t j = 0; j < lists.size(); ++j)
      for (int k : lists[j]) d.col(k) += g.col(static_cast<Index>(j));
    t.accumulate(a, d);
  });
}

Var scatter_rows(Var v, std::span<const int> index, Index out_rows) {
  if (v.cols() != 1 || v.rows() != static_cast<Index>(index.size()))
    throw ShapeError("scatter_rows: value " + shape_str(v.value()) + " vs " +
                     std::to_string(index.size()) + " indices");
  Tape& t = v.tape();
  Matrix out = Matrix::Zero(out_rows, 1);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0) continue;
    if (index[i] >= out_rows)
      throw ShapeError("scatter_rows: index " + std::to_string(index[i]) + " >= " + std::to_string(out_rows));
    out(index[i], 0) += v.value()(static_cast<Index>(i), 0);
  }
  const Var in[] = {v};
  std::vector<int> keep(index.begin(), index.end());
  return t.record(std::move(out), in, [&t, v, keep](const Matrix& g) {
    Matrix d = Matrix::Zero(static_cast<Index>(keep.size()), 1);
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (keep[i] >= 0) d(static_cast<Index>(i), 0) = g(keep[i], 0);
    t.accumulate(v, d);
  });
}

Var pad_rows(Var a, Index rows) {
  if (rows < a.rows()) throw ShapeError("pad_rows: cannot shrink " + shape_str(a.value()));
  if (rows == a.rows()) return a;
  Tape& t = a.tape();
  Matrix out = Matrix::Zero(rows, a.cols());
  out.topRows(a.rows()) = a.value();
  const Var in[] = {a};
  const Index keep = a.rows();
  return t.record(std::move(out), in, [&t, a, keep](const Matrix& g) { t.accumulate(a, g.topRows(keep)); });
}

}  // namespace g2s
