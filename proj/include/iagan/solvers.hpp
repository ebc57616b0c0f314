#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iagan/generator.hpp"
#include "iagan/operators.hpp"
#include "iagan/rng.hpp"
#include "iagan/tensor.hpp"

namespace iagan {

struct SolveConfig {
  double lr_z = 0.1;
  double lr_theta = 0.0;  // IAGAN only
  std::size_t iterations = 800;
  std::size_t restarts = 2;  // CSGM only
  bool noise_mode = false;
  std::uint64_t seed = 0;
  /// IAGAN early stopping: stop once the objective has not dropped by a
  /// relative `min_relative_improvement` for `patience` iterations. 0 disables.
  std::size_t patience = 50;
  double min_relative_improvement = 1e-6;
  /// Radius of the truncated Gaussian used for CSGM inits; 0 selects sqrt(k_0).
  double latent_radius = 0.0;
  /// IAGAN: scale the weight learning rate of layer l by sqrt(2 / k_{l-1}),
  /// the He init std of that layer, so every layer moves by the same amount
  /// relative to its scale.
  bool layer_scaled_lr = false;

  /// ceil(iterations / 2) in noise mode, otherwise iterations.
  std::size_t effective_iterations() const noexcept;

  static SolveConfig csgm_defaults();
  static SolveConfig iagan_defaults();
  // Iteration counts and learning rates used with the large pre-trained
  // GANs; the defaults above are the desk-scale counts.
  static SolveConfig csgm_began();
  static SolveConfig csgm_pggan();
  static SolveConfig iagan_began_cs();
  static SolveConfig iagan_began_sr();
  static SolveConfig iagan_pggan_cs();
  static SolveConfig iagan_pggan_sr();
};

struct SolveReport {
  Tensor x_hat;
  Tensor z_hat;
  std::optional<GeneratorParams> theta_hat;
  double best_objective = 0.0;
  std::vector<double> objective_trace;
  /// ADAM steps taken (per restart for CSGM).
  std::size_t iterations_run = 0;
  std::size_t diverged_runs = 0;
};

/// ||y - A x||^2
double measurement_objective(const LinearOperator& op, const Tensor& y, const Tensor& x);

/// Latent-only recovery minimizing ||y - A G(z)||^2 with ADAM from
/// cfg.restarts truncated-Gaussian inits (init r drawn from rng.fork(r)).
/// Returns the minimizing iterate over all restarts, inits included. The
/// trace concatenates the per-restart traces, each recorded before every
/// step and after the last.
SolveReport csgm_solve(const GeneratorParams& gen, const LinearOperator& op, const Tensor& y, const SolveConfig& cfg,
                       const RngStream& rng);

/// Joint ADAM over (z, all weights) from (z_init, gen) with separate
/// learning rates. The starting point is a candidate, so the result is never
/// worse than the init.
SolveReport iagan_solve(const GeneratorParams& gen, const LinearOperator& op, const Tensor& y, const Tensor& z_init,
                        const SolveConfig& cfg);

/// x_hat + A^dagger (y - A x_hat): the closest point to x_hat with A x = y.
Tensor back_project(const LinearOperator& op, const Tensor& x_hat, const Tensor& y, const CgConfig& cg = {});

enum class Method { csgm, csgm_bp, iagan, iagan_bp };

std::string to_string(Method m);
/// Accepts "csgm", "csgm_bp", "iagan", "iagan_bp" (also "CSGM-BP" style).
Method parse_method(const std::string& name);
bool is_back_projection(Method m) noexcept;

struct SuiteConfig {
  SolveConfig csgm = SolveConfig::csgm_defaults();
  SolveConfig iagan = SolveConfig::iagan_defaults();
  CgConfig cg;
  bool noise_mode = false;
  std::vector<Method> methods{Method::csgm, Method::csgm_bp, Method::iagan, Method::iagan_bp};
};

/// CSGM, then BP on its estimate, then IAGAN warm-started from the CSGM
/// latent, then BP on the IAGAN estimate. BP variants are skipped in noise
/// mode. Methods that are not requested and not needed by a requested one
/// are skipped.
std::map<Method, SolveReport> run_method_suite(const GeneratorParams& gen, const LinearOperator& op, const Tensor& y,
                                               const SuiteConfig& cfg, const RngStream& rng);

namespace detail {

struct DescentResult {
  Tensor best_z;
  Tensor best_x;
  std::optional<GeneratorParams> best_params;
  double best_objective = 0.0;
  std::vector<double> trace;
  std::size_t steps = 0;
  bool diverged = false;
};

/// ADAM on z alone.
DescentResult descend_latent(const GeneratorParams& gen, const LinearOperator& op, const Tensor& y, Tensor z,
                             double lr, std::size_t iterations);

/// ADAM on z and W_1 .. W_{trainable_layers}.
DescentResult descend_joint(GeneratorParams gen, const LinearOperator& op, const Tensor& y, Tensor z, double lr_z,
                            double lr_weights, std::size_t iterations, std::size_t trainable_layers,
                            std::size_t patience, double min_relative_improvement,
                            std::span<const double> layer_lr_scale = {});

}  // namespace detail

}  // namespace iagan
