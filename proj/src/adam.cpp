#include "iagan/adam.hpp"

#include <cmath>

#include "iagan/errors.hpp"

namespace iagan {

AdamState::AdamState(const Shape& shape, AdamConfig config)
    : config_(config), m_(shape), v_(shape) {}

void AdamState::step(Tensor& params, const Tensor& grad, double lr) {
  require_same_shape(params, m_, "adam_step(params)");
  require_same_shape(grad, m_, "adam_step(grad)");
  if (!grad.all_finite()) throw NonFiniteError("adam_step: gradient has non-finite entries");

  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));

  auto p = params.data();
  auto g = grad.data();
  auto m = m_.data();
  auto v = v_.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

}  // namespace iagan
