#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "iagan/rng.hpp"
#include "iagan/tensor.hpp"

namespace iagan {

enum class OperatorKind {
  dense,
  dense_gaussian,
  subsampled_fourier,
  blur_decimate,
  uniform_blur,
  sampling_mask,
  identity,
};

std::string to_string(OperatorKind kind);

/// Matrix-free linear map A : R^n -> R^m together with its exact adjoint.
/// Immutable and cheap to copy; copies share the underlying payload.
class LinearOperator {
 public:
  class Impl {
   public:
    virtual ~Impl() = default;
    virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
    virtual void apply_adjoint(std::span<const double> u, std::span<double> x) const = 0;
  };

  LinearOperator(OperatorKind kind, std::size_t m, std::size_t n, std::shared_ptr<const Impl> impl);

  OperatorKind kind() const noexcept { return kind_; }
  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return n_; }

  /// A x for any tensor with n elements; returns shape {m}.
  Tensor apply(const Tensor& x) const;
  /// A^T u for any tensor with m elements; returns shape {n}.
  Tensor apply_adjoint(const Tensor& u) const;

  void apply(std::span<const double> x, std::span<double> y) const;
  void apply_adjoint(std::span<const double> u, std::span<double> x) const;

 private:
  OperatorKind kind_;
  std::size_t m_;
  std::size_t n_;
  std::shared_ptr<const Impl> impl_;
};

struct CgConfig {
  double tol = 1e-10;
  std::size_t max_iter = 2000;

  void validate() const;
};

/// Default cap on the number of stored entries of a dense Gaussian matrix.
inline constexpr std::size_t kDefaultDenseEntryBudget = std::size_t{1} << 26;

/// Explicit m x n matrix with entries i.i.d. N(0, 1/m).
LinearOperator make_gaussian_operator(RngStream& rng, std::size_t m, std::size_t n,
                                      std::size_t max_entries = kDefaultDenseEntryBudget);

/// Wraps an explicit {m, n} matrix.
LinearOperator make_dense_operator(Tensor matrix);

LinearOperator make_identity_operator(std::size_t n);

/// Real h x w image -> masked coefficients of its unitary 2-D DFT. Output is
/// the p real parts followed by the p imaginary parts (m = 2p), with the
/// masked coefficients taken in row-major mask order.
LinearOperator make_fourier_operator(const std::vector<bool>& mask, std::size_t h, std::size_t w);

/// Convolution with an odd-sized kernel (reflective boundary) followed by
/// keeping rows and columns 0, s, 2s, ... Kernel entries must sum to 1.
LinearOperator make_blur_decimate_operator(const Tensor& kernel, std::size_t scale, std::size_t h,
                                           std::size_t w);

/// k x k box filter with weights 1/k^2, reflective boundary, m = n. k must be odd.
LinearOperator make_uniform_blur_operator(std::size_t k, std::size_t h, std::size_t w);

/// Selects x[indices[i]] in the given order.
LinearOperator make_sampling_operator(const std::vector<std::size_t>& indices, std::size_t n);

/// Separable Catmull-Rom cubic (a = -0.5) anti-aliasing kernel for
/// down-scaling by `scale`: taps at offsets -2s+1 .. 2s-1 with weight
/// cubic(t / s), normalized to sum 1. Size (4s-1) x (4s-1).
Tensor bicubic_kernel(std::size_t scale);

/// Low-frequency disk plus uniformly random extra frequencies, with
/// round(fraction * h * w) true entries. Frequencies are in unshifted DFT
/// index order; the disk is centered on DC with wrap-around.
std::vector<bool> make_radial_mask(std::size_t h, std::size_t w, double fraction, RngStream& rng);

/// Reads an 8-bit PGM; nonzero pixels are sampled frequencies.
std::vector<bool> load_mask_pgm(const std::filesystem::path& path, std::size_t& h, std::size_t& w);

/// y = A x + e with e ~ N(0, noise_std^2 I).
Tensor synthesize_observation(const LinearOperator& op, const Tensor& x, double noise_std, RngStream& rng);

struct CgResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Solves (A A^T) s = r by conjugate gradients from s = 0. Throws CgError
/// if the relative residual does not reach cfg.tol within cfg.max_iter.
Tensor solve_gram(const LinearOperator& op, const Tensor& r, const CgConfig& cfg, CgResult* info = nullptr);

/// A^dagger r = A^T (A A^T)^{-1} r.
Tensor pseudoinverse_apply(const LinearOperator& op, const Tensor& r, const CgConfig& cfg = {});

/// P_A v = A^dagger A v, the projection onto the row space of A.
Tensor project_row_space(const LinearOperator& op, const Tensor& v, const CgConfig& cfg = {});

/// Q_A v = v - P_A v, the projection onto the null space of A.
Tensor project_null_space(const LinearOperator& op, const Tensor& v, const CgConfig& cfg = {});

/// Materializes A as an {m, n} matrix by applying it to basis vectors.
Tensor to_dense(const LinearOperator& op);

}  // namespace iagan
