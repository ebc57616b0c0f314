#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "iagan/rng.hpp"
#include "iagan/tensor.hpp"

namespace iagan {

/// Bias-free fully-connected ReLU network
///   G(z) = W_L relu(W_{L-1} relu( ... relu(W_1 z) ... ))
/// with W_l of shape {k_l, k_{l-1}} and no activation after the last layer.
struct GeneratorParams {
  std::vector<std::size_t> dims;  // k_0 .. k_L
  std::vector<Tensor> weights;    // W_1 .. W_L

  std::size_t layers() const noexcept { return weights.size(); }
  std::size_t latent_dim() const { return dims.front(); }
  std::size_t output_dim() const { return dims.back(); }

  /// Checks the weight shapes against dims. With `strict`, also requires
  /// k_0 < k_1 < ... < k_L.
  void validate(bool strict = false) const;

  friend bool operator==(const GeneratorParams&, const GeneratorParams&) = default;
};

struct ForwardTape {
  Tensor input;
  std::vector<Tensor> pre;   // W_l a_{l-1}, l = 1..L
  std::vector<Tensor> post;  // relu(pre_l), l = 1..L-1
};

struct ForwardResult {
  Tensor output;
  ForwardTape tape;
};

struct GeneratorGradients {
  Tensor latent;
  /// One entry per layer. Entries past the requested count are empty.
  std::vector<Tensor> weights;
};

inline constexpr std::size_t kAllLayers = std::numeric_limits<std::size_t>::max();

ForwardResult forward(const GeneratorParams& params, const Tensor& z);

/// Output only, without keeping intermediates.
Tensor generate(const GeneratorParams& params, const Tensor& z);

/// Gradients of <g_out, G(z)> with respect to z and W_1 .. W_{weight_layers}.
/// relu'(0) is taken as 0.
GeneratorGradients backward(const GeneratorParams& params, const ForwardTape& tape, const Tensor& g_out,
                            std::size_t weight_layers = kAllLayers);

/// W_l entries i.i.d. N(0, 2 / k_{l-1}).
GeneratorParams init_generator(RngStream& rng, const std::vector<std::size_t>& dims, bool strict = true);

/// Writes manifest.json plus W1.iatf .. WL.iatf into `dir`.
void save_generator(const std::filesystem::path& dir, const GeneratorParams& params, std::uint64_t seed);
GeneratorParams load_generator(const std::filesystem::path& dir);

}  // namespace iagan

namespace iagan {

/// N(0, I_k) draw radially clamped to the ball of the given radius.
Tensor sample_truncated_latent(RngStream& rng, std::size_t k, double radius);

/// Rescales z onto the ball of the given radius if it lies outside.
void project_to_ball(Tensor& z, double radius);

}  // namespace iagan
