#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>

#include "g2s/tensor.hpp"

namespace g2s {

enum class Stencil { central, five_point };

struct GradCheckOptions {
  double epsilon = 1e-5;
  Stencil stencil = Stencil::central;
  // Denominator floor of the relative error; differences between gradients
  // smaller than this are judged on an absolute scale.
  double floor = 1e-8;
  // 0 checks every entry; otherwise at most this many entries per parameter,
  // chosen with a fixed seed.
  int max_entries_per_param = 0;
  std::uint64_t seed = 7;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Index worst_entry = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::map<std::string, double> per_parameter;
  std::size_t entries_checked = 0;
};

// |analytic - numeric| / max(floor, |analytic| + |numeric|)
double relative_error(double analytic, double numeric, double floor = 1e-8);

// Compares reverse-mode gradients of a scalar function against central
// differences. fn must be deterministic and record its result on the tape it
// is given. Parameter gradients are reset before and after.
GradCheckResult finite_diff_check(const std::function<Var(Tape&)>& fn,
                                  std::span<Parameter* const> params,
                                  const GradCheckOptions& options = {});

}  // namespace g2s
