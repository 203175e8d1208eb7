#pragma once

#include <span>

#include "g2s/tensor.hpp"

namespace g2s {

struct AdamOptions {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update of every non-frozen parameter from its
// accumulated gradient. Gradients are left untouched.
void adam_step(std::span<Parameter* const> params, const AdamOptions& options);

double global_grad_norm(std::span<Parameter* const> params);

// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

}  // namespace g2s
