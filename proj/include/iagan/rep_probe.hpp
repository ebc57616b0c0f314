#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "iagan/generator.hpp"
#include "iagan/operators.hpp"
#include "iagan/rng.hpp"
#include "iagan/tensor.hpp"

namespace iagan {

enum class FirstLayerMode {
  /// Jointly optimize (z, W_1) starting from (z*, W_1).
  joint_weights,
  /// Optimize z~ in R^{k_1} through the generator with W_1 replaced by the
  /// identity, starting from z~ = W_1 z*.
  direct_latent,
};

struct ProbeConfig {
  double lr = 0.05;
  std::size_t iterations = 1000;
  std::size_t restarts = 2;
  double latent_radius = 0.0;  // 0 selects sqrt(k_0)

  // first-layer stage(s)
  FirstLayerMode mode = FirstLayerMode::joint_weights;
  double lr_latent_joint = 1e-2;
  double lr_weights = 1e-2;
  std::size_t joint_iterations = 1000;
  /// Number of leading layers adapted one after another (joint mode only).
  /// Stage s optimizes z and W_1 .. W_s, warm-started from stage s-1.
  std::size_t adapted_layers = 1;
};

/// Estimates are minima over the iterates actually visited, so they are
/// upper bounds on the true minima, not certified global values.
struct ProbeReport {
  double e_rep = 0.0;
  std::optional<double> e_rep_tilde;
  Tensor z_star;
  std::optional<Tensor> w1_star;
  std::optional<Tensor> z_tilde;  // direct mode
  /// ||G(z) - x|| along the iterates of every run and stage, in order.
  std::vector<double> trace;
  /// Best error after each first-layer stage.
  std::vector<double> stage_errors;
};

/// min_z ||G(z) - x||_2 by ADAM from cfg.restarts truncated-Gaussian inits,
/// plus `warm_start` as an extra candidate run when given.
ProbeReport representation_error(const GeneratorParams& gen, const Tensor& x, const ProbeConfig& cfg,
                                 const RngStream& rng, const std::optional<Tensor>& warm_start = std::nullopt);

/// Runs representation_error, then continues from its best latent while also
/// adapting the first layer. Every stage starts at the previous best point,
/// so e_rep_tilde <= e_rep. Requires k_0 < k_1.
ProbeReport representation_error_first_layer(const GeneratorParams& gen, const Tensor& x, const ProbeConfig& cfg,
                                             const RngStream& rng);

struct ErrorDecomposition {
  double row_err = 0.0;   // ||P_A (x_hat - x)||
  double null_err = 0.0;  // ||Q_A (x_hat - x)||
};

ErrorDecomposition error_decomposition(const LinearOperator& op, const Tensor& x, const Tensor& x_hat,
                                       const CgConfig& cg = {});

}  // namespace iagan
