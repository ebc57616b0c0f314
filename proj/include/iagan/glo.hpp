#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "iagan/generator.hpp"
#include "iagan/rng.hpp"
#include "iagan/tensor.hpp"

namespace iagan {

/// Fixed random smooth map from d_true factors to an h x w image: a sum of
/// d_true Gaussian bumps, each factor moving its bump's center and scaling
/// its amplitude, squashed into [0, 1) by 1 - exp(-v).
class ToyImageModel {
 public:
  ToyImageModel(RngStream rng, std::size_t h, std::size_t w, std::size_t d_true);

  /// Flat image of h*w pixels.
  Tensor render(std::span<const double> factors) const;
  /// Factors are i.i.d. N(0, 1).
  Tensor sample(RngStream& rng) const;

  std::size_t height() const noexcept { return h_; }
  std::size_t width() const noexcept { return w_; }
  std::size_t factors() const noexcept { return bumps_.size(); }

 private:
  struct Bump {
    double cy, cx;    // base center
    double dy, dx;    // unit direction the factor moves the center along
    double width;
    double amplitude;
  };

  std::size_t h_, w_;
  std::vector<Bump> bumps_;
};

struct ToyDataset {
  std::vector<Tensor> images;  // flat, h*w each, values in [0, 1]
  std::size_t h = 0;
  std::size_t w = 0;
  std::size_t d_true = 0;
  std::uint64_t seed = 0;
};

/// Samples `count` images. The bump map comes from rng.fork("map") and image
/// i from rng.fork("sample").fork(first_index + i), so datasets built from
/// the same stream share the map and disjoint index ranges never repeat.
ToyDataset make_toy_dataset(const RngStream& rng, std::size_t count, std::size_t h, std::size_t w,
                            std::size_t d_true, std::size_t first_index = 0);

struct GloConfig {
  std::size_t epochs = 1500;
  double lr_weights = 3e-3;
  double lr_latents = 3e-2;
  /// Latent ball radius; 0 selects sqrt(k_0).
  double radius = 0.0;

  void validate() const;
  double effective_radius(std::size_t latent_dim) const;
};

struct GloResult {
  GeneratorParams params;
  std::vector<Tensor> latents;
  /// Entry e is the loss after e epochs; entry 0 is the initial loss.
  std::vector<double> loss_trace;
  std::size_t backoffs = 0;
  double final_lr_weights = 0.0;
  double final_lr_latents = 0.0;
};

class GloDivergence : public std::runtime_error {
 public:
  GloDivergence(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

/// sum_i ||G(z_i) - x_i||^2
double glo_loss(const GeneratorParams& params, std::span<const Tensor> latents, std::span<const Tensor> images);

/// Generative latent optimization: alternating full-batch ADAM steps on the
/// weights and then on all latents, each latent projected back onto the
/// radius ball. An epoch whose step raises the loss is rolled back and both
/// learning rates are halved, so the loss trace never increases.
GloResult train_glo(const ToyDataset& dataset, const std::vector<std::size_t>& dims, const GloConfig& cfg,
                    RngStream& rng);

}  // namespace iagan
