#include "iagan/rep_probe.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "iagan/errors.hpp"
#include "iagan/solvers.hpp"

namespace iagan {
namespace {

void append_norms(std::vector<double>& trace, const std::vector<double>& squared) {
  for (double v : squared) trace.push_back(std::sqrt(v));
}

}  // namespace

ProbeReport representation_error(const GeneratorParams& gen, const Tensor& x, const ProbeConfig& cfg,
                                 const RngStream& rng, const std::optional<Tensor>& warm_start) {
  gen.validate();
  if (x.size() != gen.output_dim()) {
    throw ShapeError(fmt::format("representation_error: image has {} entries, generator produces {}", x.size(),
                                 gen.output_dim()));
  }
  const LinearOperator id = make_identity_operator(gen.output_dim());
  const Tensor target = x.reshaped({x.size()});
  const double radius =
      cfg.latent_radius > 0.0 ? cfg.latent_radius : std::sqrt(static_cast<double>(gen.latent_dim()));

  ProbeReport rep;
  double best = std::numeric_limits<double>::infinity();
  const auto consider = [&](detail::DescentResult run) {
    append_norms(rep.trace, run.trace);
    if (!run.trace.empty() && run.best_objective < best) {
      best = run.best_objective;
      rep.z_star = std::move(run.best_z);
    }
  };
  if (warm_start) {
    if (warm_start->size() != gen.latent_dim()) throw ShapeError("representation_error: warm start has wrong size");
    consider(detail::descend_latent(gen, id, target, warm_start->reshaped({warm_start->size()}), cfg.lr, cfg.iterations));
  }
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    RngStream s = rng.fork(r);
    consider(detail::descend_latent(gen, id, target, sample_truncated_latent(s, gen.latent_dim(), radius), cfg.lr,
                                    cfg.iterations));
  }
  if (!std::isfinite(best)) throw DivergenceError("representation_error: every run diverged");
  rep.e_rep = std::sqrt(best);
  return rep;
}

ProbeReport representation_error_first_layer(const GeneratorParams& gen, const Tensor& x, const ProbeConfig& cfg,
                                             const RngStream& rng) {
  gen.validate();
  if (gen.layers() < 2 || gen.dims[0] >= gen.dims[1]) {
    throw std::invalid_argument("first-layer probe requires at least two layers and k_0 < k_1");
  }
  if (cfg.adapted_layers < 1 || cfg.adapted_layers >= gen.layers()) {
    throw std::invalid_argument(fmt::format("adapted_layers must be in [1, {}]", gen.layers() - 1));
  }
  for (std::size_t s = 1; s < cfg.adapted_layers; ++s) {
    if (gen.dims[s] >= gen.dims[s + 1]) {
      throw std::invalid_argument(fmt::format("sequential stage {} requires k_{} < k_{}", s + 1, s, s + 1));
    }
  }
  if (cfg.mode == FirstLayerMode::direct_latent && cfg.adapted_layers != 1) {
    throw std::invalid_argument("direct latent mode adapts only the first layer");
  }

  ProbeReport rep = representation_error(gen, x, cfg, rng);
  const LinearOperator id = make_identity_operator(gen.output_dim());
  const Tensor target = x.reshaped({x.size()});

  if (cfg.mode == FirstLayerMode::direct_latent) {
    GeneratorParams absorbed = gen;
    const std::size_t k1 = gen.dims[1];
    absorbed.dims[0] = k1;
    absorbed.weights[0] = Tensor({k1, k1});
    for (std::size_t i = 0; i < k1; ++i) absorbed.weights[0](i, i) = 1.0;
    Tensor z_tilde = generate(GeneratorParams{{gen.dims[0], k1}, {gen.weights[0]}}, rep.z_star);
    detail::DescentResult run =
        detail::descend_latent(absorbed, id, target, std::move(z_tilde), cfg.lr_latent_joint, cfg.joint_iterations);
    append_norms(rep.trace, run.trace);
    const double e = std::sqrt(run.best_objective);
    rep.e_rep_tilde = e;
    rep.stage_errors.push_back(e);
    rep.z_tilde = std::move(run.best_z);
    return rep;
  }

  GeneratorParams current = gen;
  Tensor z = rep.z_star;
  double best = rep.e_rep * rep.e_rep;
  for (std::size_t stage = 1; stage <= cfg.adapted_layers; ++stage) {
    detail::DescentResult run = detail::descend_joint(current, id, target, z, cfg.lr_latent_joint, cfg.lr_weights,
                                                      cfg.joint_iterations, stage, 0, 0.0);
    append_norms(rep.trace, run.trace);
    if (!run.trace.empty() && run.best_objective <= best) {
      best = run.best_objective;
      z = std::move(run.best_z);
      current = std::move(*run.best_params);
    }
    rep.stage_errors.push_back(std::sqrt(best));
  }
  rep.e_rep_tilde = std::sqrt(best);
  rep.w1_star = current.weights[0];
  return rep;
}

ErrorDecomposition error_decomposition(const LinearOperator& op, const Tensor& x, const Tensor& x_hat,
                                       const CgConfig& cg) {
  if (x.size() != op.cols() || x_hat.size() != op.cols()) throw ShapeError("error_decomposition: dimension mismatch");
  const Tensor diff = x_hat.reshaped({x_hat.size()}) - x.reshaped({x.size()});
  const Tensor row = project_row_space(op, diff, cg);
  const Tensor null = diff - row;
  return {norm2(row), norm2(null)};
}

}  // namespace iagan
