#include "iagan/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "iagan/errors.hpp"

namespace iagan {
namespace {

double psnr_of(double mean_mse) {
  if (mean_mse == 0.0) return kPsnrCapDb;
  return 10.0 * std::log10(255.0 * 255.0 / mean_mse);
}

void require_valid(std::span<const double> mses) {
  if (mses.empty()) throw std::invalid_argument("psnr: empty MSE list");
  for (double v : mses)
    if (!(v >= 0.0)) throw std::invalid_argument("psnr: MSE values must be non-negative");
}

}  // namespace

double mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  if (a.size() == 0) throw ShapeError("mse: empty images");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = 255.0 * (a[i] - b[i]);
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double psnr_avg(std::span<const double> mses) {
  require_valid(mses);
  double s = 0.0;
  for (double v : mses) s += v;
  return psnr_of(s / static_cast<double>(mses.size()));
}

double psnr_mean_per_image(std::span<const double> mses) {
  require_valid(mses);
  double s = 0.0;
  for (double v : mses) s += psnr_of(v);
  return s / static_cast<double>(mses.size());
}

}  // namespace iagan
