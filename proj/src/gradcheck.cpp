#include "g2s/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace g2s {

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max(floor, std::abs(analytic) + std::abs(numeric));
}

namespace {

double evaluate(const std::function<Var(Tape&)>& fn) {
  Tape tape;
  return fn(tape).scalar();
}

}  // namespace

GradCheckResult finite_diff_check(const std::function<Var(Tape&)>& fn,
                                  std::span<Parameter* const> params,
                                  const GradCheckOptions& options) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var loss = fn(tape);
    tape.backward(loss);
  }
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) {
    analytic.push_back(p->grad());
    p->zero_grad();
  }

  GradCheckResult result;
  Rng rng(options.seed);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    const Index n = p.value().size();
    std::vector<Index> entries(static_cast<std::size_t>(n));
    std::iota(entries.begin(), entries.end(), Index{0});
    if (options.max_entries_per_param > 0 && n > options.max_entries_per_param) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(static_cast<std::size_t>(options.max_entries_per_param));
      std::sort(entries.begin(), entries.end());
    }
    double worst = 0.0;
    for (Index e : entries) {
      double& x = p.value().data()[e];
      const double saved = x;
      const double h = options.epsilon;
      auto at = [&](double offset) {
        x = saved + offset;
        return evaluate(fn);
      };
      double numeric = 0.0;
      if (options.stencil == Stencil::central)
        numeric = (at(h) - at(-h)) / (2.0 * h);
      else
        numeric = (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h);
      x = saved;
      const double err = relative_error(analytic[k].data()[e], numeric, options.floor);
      ++result.entries_checked;
      worst = std::max(worst, err);
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = p.name();
        result.worst_entry = e;
        result.worst_analytic = analytic[k].data()[e];
        result.worst_numeric = numeric;
      }
    }
    result.per_parameter[p.name()] = worst;
  }
  return result;
}

}  // namespace g2s
