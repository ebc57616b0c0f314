#pragma once

#include <span>
#include <string>

#include "iagan/tensor.hpp"

namespace iagan {

/// Declared PSNR when the mean MSE is exactly zero.
inline constexpr double kPsnrCapDb = 100.0;

struct MetricRow {
  std::string image_id;
  std::string method;
  double mse = 0.0;  // [0, 255] pixel scale
  double noise_std = 0.0;
  double m_over_n = 0.0;
};

/// Mean squared difference after scaling [0, 1] images to [0, 255]. No
/// clamping happens here; callers clamp before evaluating reconstructions.
double mse(const Tensor& a, const Tensor& b);

/// 10 log10(255^2 / mean(mses)), i.e. the PSNR of the averaged MSE, capped
/// at kPsnrCapDb when the mean is zero.
double psnr_avg(std::span<const double> mses);

/// Mean of per-image PSNRs. Not the reporting convention; kept for contrast.
double psnr_mean_per_image(std::span<const double> mses);

}  // namespace iagan
