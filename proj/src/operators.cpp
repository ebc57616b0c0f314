#include "iagan/operators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "iagan/errors.hpp"
#include "iagan/image_io.hpp"

namespace iagan {

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::dense: return "dense";
    case OperatorKind::dense_gaussian: return "dense_gaussian";
    case OperatorKind::subsampled_fourier: return "subsampled_fourier";
    case OperatorKind::blur_decimate: return "blur_decimate";
    case OperatorKind::uniform_blur: return "uniform_blur";
    case OperatorKind::sampling_mask: return "sampling_mask";
    case OperatorKind::identity: return "identity";
  }
  return "unknown";
}

LinearOperator::LinearOperator(OperatorKind kind, std::size_t m, std::size_t n, std::shared_ptr<const Impl> impl)
    : kind_(kind), m_(m), n_(n), impl_(std::move(impl)) {
  if (m == 0 || n == 0) throw ShapeError("operator dimensions must be positive");
}

void LinearOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != m_) {
    throw ShapeError(fmt::format("apply: operator is {}x{}, got input {} output {}", m_, n_, x.size(), y.size()));
  }
  impl_->apply(x, y);
}

void LinearOperator::apply_adjoint(std::span<const double> u, std::span<double> x) const {
  if (u.size() != m_ || x.size() != n_) {
    throw ShapeError(
        fmt::format("apply_adjoint: operator is {}x{}, got input {} output {}", m_, n_, u.size(), x.size()));
  }
  impl_->apply_adjoint(u, x);
}

Tensor LinearOperator::apply(const Tensor& x) const {
  Tensor y({m_});
  apply(x.data(), y.data());
  return y;
}

Tensor LinearOperator::apply_adjoint(const Tensor& u) const {
  Tensor x({n_});
  apply_adjoint(u.data(), x.data());
  return x;
}

void CgConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("CgConfig: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("CgConfig: max_iter must be at least 1");
}

namespace {

class DenseImpl final : public LinearOperator::Impl {
 public:
  explicit DenseImpl(Tensor a) : a_(std::move(a)) {}

  void apply(std::span<const double> x, std::span<double> y) const override {
    const std::size_t m = a_.dim(0), n = a_.dim(1);
    const double* row = a_.data().data();
    for (std::size_t i = 0; i < m; ++i, row += n) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
      y[i] = s;
    }
  }

  void apply_adjoint(std::span<const double> u, std::span<double> x) const override {
    const std::size_t m = a_.dim(0), n = a_.dim(1);
    std::fill(x.begin(), x.end(), 0.0);
    const double* row = a_.data().data();
    for (std::size_t i = 0; i < m; ++i, row += n) {
      const double ui = u[i];
      for (std::size_t j = 0; j < n; ++j) x[j] += row[j] * ui;
    }
  }

 private:
  Tensor a_;
};

class IdentityImpl final : public LinearOperator::Impl {
 public:
  void apply(std::span<const double> x, std::span<double> y) const override { std::copy(x.begin(), x.end(), y.begin()); }
  void apply_adjoint(std::span<const double> u, std::span<double> x) const override {
    std::copy(u.begin(), u.end(), x.begin());
  }
};

class SamplingImpl final : public LinearOperator::Impl {
 public:
  explicit SamplingImpl(std::vector<std::size_t> idx) : idx_(std::move(idx)) {}

  void apply(std::span<const double> x, std::span<double> y) const override {
    for (std::size_t i = 0; i < idx_.size(); ++i) y[i] = x[idx_[i]];
  }
  void apply_adjoint(std::span<const double> u, std::span<double> x) const override {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t i = 0; i < idx_.size(); ++i) x[idx_[i]] = u[i];
  }

 private:
  std::vector<std::size_t> idx_;
};

// Unitary 2-D DFT evaluated separably with exact-index twiddle tables.
class FourierImpl final : public LinearOperator::Impl {
 public:
  FourierImpl(const std::vector<bool>& mask, std::size_t h, std::size_t w) : h_(h), w_(w) {
    for (std::size_t k = 0; k < mask.size(); ++k)
      if (mask[k]) coeffs_.push_back(k);
    tw_h_ = twiddles(h);
    tw_w_ = twiddles(w);
    scale_ = 1.0 / std::sqrt(static_cast<double>(h * w));
  }

  std::size_t sampled() const { return coeffs_.size(); }

  void apply(std::span<const double> x, std::span<double> y) const override {
    // Row transforms: R[r][v] = sum_c x[r][c] e^{-2 pi i v c / w}
    std::vector<std::complex<double>> rows(h_ * w_);
    for (std::size_t r = 0; r < h_; ++r) {
      for (std::size_t v = 0; v < w_; ++v) {
        std::complex<double> s = 0.0;
        for (std::size_t c = 0; c < w_; ++c) s += x[r * w_ + c] * std::conj(tw_w_[(v * c) % w_]);
        rows[r * w_ + v] = s;
      }
    }
    const std::size_t p = coeffs_.size();
    for (std::size_t i = 0; i < p; ++i) {
      const std::size_t u = coeffs_[i] / w_, v = coeffs_[i] % w_;
      std::complex<double> s = 0.0;
      for (std::size_t r = 0; r < h_; ++r) s += rows[r * w_ + v] * std::conj(tw_h_[(u * r) % h_]);
      s *= scale_;
      y[i] = s.real();
      y[p + i] = s.imag();
    }
  }

  void apply_adjoint(std::span<const double> u_in, std::span<double> x) const override {
    // Zero-filled spectrum, then the inverse unitary DFT, keeping the real part.
    const std::size_t p = coeffs_.size();
    std::vector<std::complex<double>> spec(h_ * w_, 0.0);
    for (std::size_t i = 0; i < p; ++i) spec[coeffs_[i]] = {u_in[i], u_in[p + i]};
    std::vector<std::complex<double>> cols(h_ * w_);
    for (std::size_t v = 0; v < w_; ++v) {
      for (std::size_t r = 0; r < h_; ++r) {
        std::complex<double> s = 0.0;
        for (std::size_t u = 0; u < h_; ++u) s += spec[u * w_ + v] * tw_h_[(u * r) % h_];
        cols[r * w_ + v] = s;
      }
    }
    for (std::size_t r = 0; r < h_; ++r) {
      for (std::size_t c = 0; c < w_; ++c) {
        std::complex<double> s = 0.0;
        for (std::size_t v = 0; v < w_; ++v) s += cols[r * w_ + v] * tw_w_[(v * c) % w_];
        x[r * w_ + c] = scale_ * s.real();
      }
    }
  }

 private:
  static std::vector<std::complex<double>> twiddles(std::size_t n) {
    std::vector<std::complex<double>> t(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      t[k] = {std::cos(a), std::sin(a)};
    }
    t[0] = {1.0, 0.0};
    return t;
  }

  std::size_t h_, w_;
  std::vector<std::size_t> coeffs_;
  std::vector<std::complex<double>> tw_h_, tw_w_;
  double scale_;
};

// Half-sample symmetric reflection: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto len = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t period = 2 * len;
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < len ? i : period - 1 - i);
}

// Strided convolution with reflective boundary:
//   y(i, j) = sum_{a,b} K(a, b) x(reflect(s*i - (a - ca)), reflect(s*j - (b - cb)))
class ConvImpl final : public LinearOperator::Impl {
 public:
  ConvImpl(Tensor kernel, std::size_t stride, std::size_t h, std::size_t w)
      : k_(std::move(kernel)), s_(stride), h_(h), w_(w), oh_(h / stride), ow_(w / stride) {}

  void apply(std::span<const double> x, std::span<double> y) const override {
    visit([&](std::size_t out, std::size_t in, double kv) { y[out] += kv * x[in]; }, y);
  }

  void apply_adjoint(std::span<const double> u, std::span<double> x) const override {
    std::fill(x.begin(), x.end(), 0.0);
    visit([&](std::size_t out, std::size_t in, double kv) { x[in] += kv * u[out]; }, {});
  }

 private:
  template <typename F>
  void visit(const F& f, std::span<double> zero_first) const {
    std::fill(zero_first.begin(), zero_first.end(), 0.0);
    const std::size_t kh = k_.dim(0), kw = k_.dim(1);
    const auto ca = static_cast<std::ptrdiff_t>(kh / 2), cb = static_cast<std::ptrdiff_t>(kw / 2);
    for (std::size_t i = 0; i < oh_; ++i) {
      for (std::size_t j = 0; j < ow_; ++j) {
        const std::size_t out = i * ow_ + j;
        for (std::size_t a = 0; a < kh; ++a) {
          const std::size_t r = reflect(static_cast<std::ptrdiff_t>(s_ * i) - (static_cast<std::ptrdiff_t>(a) - ca), h_);
          for (std::size_t b = 0; b < kw; ++b) {
            const double kv = k_(a, b);
            if (kv == 0.0) continue;
            const std::size_t c =
                reflect(static_cast<std::ptrdiff_t>(s_ * j) - (static_cast<std::ptrdiff_t>(b) - cb), w_);
            f(out, r * w_ + c, kv);
          }
        }
      }
    }
  }

  Tensor k_;
  std::size_t s_, h_, w_, oh_, ow_;
};

void require_image_dims(std::size_t h, std::size_t w, const char* what) {
  if (h == 0 || w == 0) throw ShapeError(fmt::format("{}: image dimensions must be positive", what));
}

}  // namespace

LinearOperator make_dense_operator(Tensor matrix) {
  if (matrix.rank() != 2) throw ShapeError("make_dense_operator: matrix must have rank 2");
  const std::size_t m = matrix.dim(0), n = matrix.dim(1);
  return LinearOperator(OperatorKind::dense, m, n, std::make_shared<DenseImpl>(std::move(matrix)));
}

LinearOperator make_gaussian_operator(RngStream& rng, std::size_t m, std::size_t n, std::size_t max_entries) {
  if (m == 0 || n == 0) throw ShapeError("make_gaussian_operator: m and n must be positive");
  if (m > max_entries / n) {
    throw std::length_error(fmt::format("make_gaussian_operator: {}x{} exceeds the budget of {} entries", m, n,
                                        max_entries));
  }
  Tensor a = sample_gaussian(rng, {m, n}, 0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  return LinearOperator(OperatorKind::dense_gaussian, m, n, std::make_shared<DenseImpl>(std::move(a)));
}

LinearOperator make_identity_operator(std::size_t n) {
  return LinearOperator(OperatorKind::identity, n, n, std::make_shared<IdentityImpl>());
}

LinearOperator make_fourier_operator(const std::vector<bool>& mask, std::size_t h, std::size_t w) {
  require_image_dims(h, w, "make_fourier_operator");
  if (mask.size() != h * w) throw ShapeError("make_fourier_operator: mask size must be h*w");
  auto impl = std::make_shared<FourierImpl>(mask, h, w);
  const std::size_t p = impl->sampled();
  if (p == 0) throw std::invalid_argument("make_fourier_operator: mask is empty");
  return LinearOperator(OperatorKind::subsampled_fourier, 2 * p, h * w, std::move(impl));
}

LinearOperator make_blur_decimate_operator(const Tensor& kernel, std::size_t scale, std::size_t h, std::size_t w) {
  require_image_dims(h, w, "make_blur_decimate_operator");
  if (kernel.rank() != 2 || kernel.dim(0) % 2 == 0 || kernel.dim(1) % 2 == 0) {
    throw ShapeError("make_blur_decimate_operator: kernel must be 2-D with odd dimensions");
  }
  if (scale == 0 || h % scale != 0 || w % scale != 0) {
    throw std::invalid_argument(fmt::format("make_blur_decimate_operator: scale {} does not divide {}x{}", scale, h, w));
  }
  const double sum = std::accumulate(kernel.data().begin(), kernel.data().end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument(fmt::format("make_blur_decimate_operator: kernel sums to {}, expected 1", sum));
  }
  const std::size_t m = (h / scale) * (w / scale);
  return LinearOperator(OperatorKind::blur_decimate, m, h * w, std::make_shared<ConvImpl>(kernel, scale, h, w));
}

LinearOperator make_uniform_blur_operator(std::size_t k, std::size_t h, std::size_t w) {
  require_image_dims(h, w, "make_uniform_blur_operator");
  if (k % 2 == 0) throw std::invalid_argument(fmt::format("make_uniform_blur_operator: k = {} must be odd", k));
  Tensor kernel = Tensor::filled({k, k}, 1.0 / static_cast<double>(k * k));
  return LinearOperator(OperatorKind::uniform_blur, h * w, h * w, std::make_shared<ConvImpl>(std::move(kernel), 1, h, w));
}

LinearOperator make_sampling_operator(const std::vector<std::size_t>& indices, std::size_t n) {
  if (indices.empty()) throw std::invalid_argument("make_sampling_operator: no indices");
  std::vector<bool> seen(n, false);
  for (std::size_t i : indices) {
    if (i >= n) throw std::out_of_range(fmt::format("make_sampling_operator: index {} outside [0, {})", i, n));
    if (seen[i]) throw std::invalid_argument(fmt::format("make_sampling_operator: duplicate index {}", i));
    seen[i] = true;
  }
  return LinearOperator(OperatorKind::sampling_mask, indices.size(), n, std::make_shared<SamplingImpl>(indices));
}

Tensor bicubic_kernel(std::size_t scale) {
  if (scale == 0) throw std::invalid_argument("bicubic_kernel: scale must be positive");
  const auto cubic = [](double t) {
    constexpr double a = -0.5;
    t = std::abs(t);
    if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return a * (((t - 5.0) * t + 8.0) * t - 4.0);
    return 0.0;
  };
  const auto s = static_cast<std::ptrdiff_t>(scale);
  const std::size_t taps = 4 * scale - 1;
  std::vector<double> w1(taps);
  for (std::ptrdiff_t t = -2 * s + 1; t <= 2 * s - 1; ++t) {
    w1[static_cast<std::size_t>(t + 2 * s - 1)] = cubic(static_cast<double>(t) / static_cast<double>(s));
  }
  const double sum = std::accumulate(w1.begin(), w1.end(), 0.0);
  for (double& v : w1) v /= sum;
  Tensor k({taps, taps});
  for (std::size_t a = 0; a < taps; ++a)
    for (std::size_t b = 0; b < taps; ++b) k(a, b) = w1[a] * w1[b];
  // Renormalize the outer product so the 2-D sum is 1 to the last bit we can.
  const double total = std::accumulate(k.data().begin(), k.data().end(), 0.0);
  k *= 1.0 / total;
  return k;
}

std::vector<bool> make_radial_mask(std::size_t h, std::size_t w, double fraction, RngStream& rng) {
  require_image_dims(h, w, "make_radial_mask");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("make_radial_mask: fraction must be in (0, 1]");
  const std::size_t n = h * w;
  const auto p = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto radius2 = [&](std::size_t k) {
    const std::size_t u = k / w, v = k % w;
    const std::size_t du = std::min(u, h - u), dv = std::min(v, w - v);
    return du * du + dv * dv;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radius2(a) < radius2(b); });

  const std::size_t disk = (p + 1) / 2;
  std::vector<bool> mask(n, false);
  for (std::size_t i = 0; i < disk; ++i) mask[order[i]] = true;
  // Partial Fisher-Yates over the remaining frequencies.
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(disk), order.end());
  for (std::size_t i = 0; i < p - disk; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(rest.size() - i));
    std::swap(rest[i], rest[j]);
    mask[rest[i]] = true;
  }
  return mask;
}

std::vector<bool> load_mask_pgm(const std::filesystem::path& path, std::size_t& h, std::size_t& w) {
  const Tensor img = read_pgm(path);
  h = img.dim(0);
  w = img.dim(1);
  std::vector<bool> mask(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) mask[i] = img[i] != 0.0;
  return mask;
}

Tensor synthesize_observation(const LinearOperator& op, const Tensor& x, double noise_std, RngStream& rng) {
  if (!(noise_std >= 0.0)) throw std::invalid_argument("synthesize_observation: noise_std must be non-negative");
  if (x.size() != op.cols()) {
    throw ShapeError(fmt::format("synthesize_observation: x has {} entries, operator expects {}", x.size(), op.cols()));
  }
  Tensor y = op.apply(x);
  if (noise_std > 0.0) y += sample_gaussian(rng, y.shape(), 0.0, noise_std);
  return y;
}

Tensor solve_gram(const LinearOperator& op, const Tensor& r, const CgConfig& cfg, CgResult* info) {
  cfg.validate();
  if (r.size() != op.rows()) throw ShapeError(fmt::format("solve_gram: rhs has {} entries, expected {}", r.size(), op.rows()));

  const std::size_t m = op.rows();
  Tensor s({m});
  Tensor res = r.reshaped({m});
  const double r0 = norm2(res);
  if (info) *info = {};
  if (r0 == 0.0) return s;
  if (!std::isfinite(r0)) throw NonFiniteError("solve_gram: non-finite right-hand side");

  Tensor dir = res;
  Tensor tmp({op.cols()});
  Tensor gram_dir({m});
  double rr = dot(res, res);
  double rel = 1.0;
  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    op.apply_adjoint(dir.data(), tmp.data());
    op.apply(tmp.data(), gram_dir.data());
    const double curvature = dot(dir, gram_dir);
    if (!(curvature > 0.0)) {
      throw CgError(fmt::format("conjugate gradients broke down after {} iterations (relative residual {:.3e})", it - 1, rel),
                    rel, it - 1);
    }
    const double alpha = rr / curvature;
    axpy(alpha, dir, s);
    axpy(-alpha, gram_dir, res);
    const double rr_next = dot(res, res);
    rel = std::sqrt(rr_next) / r0;
    if (rel <= cfg.tol) {
      if (info) *info = {it, rel};
      return s;
    }
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < m; ++i) dir[i] = res[i] + beta * dir[i];
  }
  throw CgError(fmt::format("conjugate gradients did not converge in {} iterations (relative residual {:.3e})",
                            cfg.max_iter, rel),
                rel, cfg.max_iter);
}

Tensor pseudoinverse_apply(const LinearOperator& op, const Tensor& r, const CgConfig& cfg) {
  return op.apply_adjoint(solve_gram(op, r, cfg));
}

Tensor project_row_space(const LinearOperator& op, const Tensor& v, const CgConfig& cfg) {
  return pseudoinverse_apply(op, op.apply(v), cfg);
}

Tensor project_null_space(const LinearOperator& op, const Tensor& v, const CgConfig& cfg) {
  return v.reshaped({v.size()}) - project_row_space(op, v, cfg);
}

Tensor to_dense(const LinearOperator& op) {
  const std::size_t m = op.rows(), n = op.cols();
  Tensor a({m, n});
  std::vector<double> e(n, 0.0), col(m);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    for (std::size_t i = 0; i < m; ++i) a(i, j) = col[i];
    e[j] = 0.0;
  }
  return a;
}

}  // namespace iagan
