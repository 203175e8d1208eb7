#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "g2s/tensor.hpp"

namespace g2s {

// Owns every Parameter of a model, in creation order. Names are unique.
class ParameterStore {
 public:
  Parameter& add(std::string name, Matrix value, bool frozen = false);
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::vector<Parameter*> trainable();

  void zero_grad();
  std::size_t size() const { return params_.size(); }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

// Glorot-uniform initializer.
Matrix glorot(Index rows, Index cols, Rng& rng);
Matrix uniform(Index rows, Index cols, double bound, Rng& rng);

}  // namespace g2s
