#include "g2s/params.hpp"

#include <cmath>

namespace g2s {

Parameter& ParameterStore::add(std::string name, Matrix value, bool frozen) {
  if (find(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(value), frozen));
  return *params_.back();
}

Parameter* ParameterStore::find(std::string_view name) {
  for (auto& p : params_)
    if (p->name() == name) return p.get();
  return nullptr;
}

const Parameter* ParameterStore::find(std::string_view name) const {
  for (const auto& p : params_)
    if (p->name() == name) return p.get();
  return nullptr;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Parameter*> ParameterStore::trainable() {
  std::vector<Parameter*> out;
  for (auto& p : params_)
    if (!p->frozen()) out.push_back(p.get());
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

Matrix uniform(Index rows, Index cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  // Column-major fill keeps the draw order independent of Eigen internals.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

Matrix glorot(Index rows, Index cols, Rng& rng) {
  return uniform(rows, cols, std::sqrt(6.0 / static_cast<double>(rows + cols)), rng);
}

}  // namespace g2s
