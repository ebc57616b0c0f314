#pragma once

#include <cstddef>

#include "iagan/tensor.hpp"

namespace iagan {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for one parameter tensor.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const Shape& shape, AdamConfig config = {});

  /// One bias-corrected ADAM update of `params` in place. Throws ShapeError on
  /// mismatched shapes and NonFiniteError if `grad` has NaN/inf entries; in
  /// both cases neither `params` nor the state is modified.
  void step(Tensor& params, const Tensor& grad, double lr);

  std::size_t steps() const noexcept { return t_; }
  const Tensor& first_moment() const noexcept { return m_; }
  const Tensor& second_moment() const noexcept { return v_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  Tensor m_;
  Tensor v_;
  std::size_t t_ = 0;
};

}  // namespace iagan
