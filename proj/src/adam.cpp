#include "g2s/adam.hpp"

#include <cmath>

namespace g2s {

void adam_step(std::span<Parameter* const> params, const AdamOptions& o) {
  for (Parameter* p : params) {
    if (p->frozen()) continue;
    const auto t = static_cast<double>(++p->steps());
    Matrix& m = p->first_moment();
    Matrix& v = p->second_moment();
    const Matrix& g = p->grad();
    m = o.beta1 * m + (1.0 - o.beta1) * g;
    v = o.beta2 * v + (1.0 - o.beta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(o.beta1, t);
    const double c2 = 1.0 - std::pow(o.beta2, t);
    p->value().array() -= o.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + o.epsilon);
  }
}

double global_grad_norm(std::span<Parameter* const> params) {
  double sq = 0.0;
  for (const Parameter* p : params)
    if (!p->frozen()) sq += p->grad().squaredNorm();
  return std::sqrt(sq);
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (Parameter* p : params)
      if (!p->frozen()) p->grad() *= s;
  }
  return norm;
}

}  // namespace g2s
