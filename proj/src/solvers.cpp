#include "iagan/solvers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "iagan/adam.hpp"
#include "iagan/errors.hpp"

namespace iagan {

std::size_t SolveConfig::effective_iterations() const noexcept {
  return noise_mode ? (iterations + 1) / 2 : iterations;
}

SolveConfig SolveConfig::csgm_defaults() { return SolveConfig{}; }

SolveConfig SolveConfig::iagan_defaults() {
  SolveConfig c;
  c.lr_z = 1e-2;
  c.lr_theta = 3e-3;
  c.iterations = 400;
  c.restarts = 1;
  c.layer_scaled_lr = true;
  return c;
}

namespace {

SolveConfig iagan_large_gan() {
  SolveConfig c = SolveConfig::iagan_defaults();
  c.lr_z = 1e-4;
  c.lr_theta = 1e-3;
  c.layer_scaled_lr = false;
  return c;
}

}  // namespace


SolveConfig SolveConfig::csgm_began() {
  SolveConfig c;
  c.iterations = 1600;
  return c;
}

SolveConfig SolveConfig::csgm_pggan() {
  SolveConfig c;
  c.iterations = 1800;
  return c;
}

SolveConfig SolveConfig::iagan_began_cs() {
  SolveConfig c = iagan_large_gan();
  c.lr_theta = 1e-4;
  c.iterations = 600;
  return c;
}

SolveConfig SolveConfig::iagan_began_sr() {
  SolveConfig c = iagan_began_cs();
  c.iterations = 500;
  return c;
}

SolveConfig SolveConfig::iagan_pggan_cs() {
  SolveConfig c = iagan_large_gan();
  c.iterations = 500;
  return c;
}

SolveConfig SolveConfig::iagan_pggan_sr() {
  SolveConfig c = iagan_large_gan();
  c.iterations = 300;
  return c;
}

double measurement_objective(const LinearOperator& op, const Tensor& y, const Tensor& x) {
  Tensor r = op.apply(x);
  r -= y.reshaped({y.size()});
  return dot(r, r);
}

namespace {

void require_compatible(const GeneratorParams& gen, const LinearOperator& op, const Tensor& y) {
  gen.validate();
  if (gen.output_dim() != op.cols()) {
    throw ShapeError(fmt::format("generator output has {} entries but the operator expects {}", gen.output_dim(),
                                 op.cols()));
  }
  if (y.size() != op.rows()) {
    throw ShapeError(fmt::format("observation has {} entries but the operator produces {}", y.size(), op.rows()));
  }
}

// Residual A x - y and its squared norm.
double residual(const LinearOperator& op, const Tensor& y, const Tensor& x, Tensor& r) {
  op.apply(x.data(), r.data());
  auto rs = r.data();
  auto ys = y.data();
  for (std::size_t i = 0; i < rs.size(); ++i) rs[i] -= ys[i];
  return dot(r, r);
}

}  // namespace

namespace detail {

DescentResult descend_latent(const GeneratorParams& gen, const LinearOperator& op, const Tensor& y, Tensor z,
                             double lr, std::size_t iterations) {
  DescentResult res;
  res.best_objective = std::numeric_limits<double>::infinity();
  AdamState opt(z.shape());
  Tensor r({op.rows()});
  Tensor gx({op.cols()});
  for (std::size_t it = 0;; ++it) {
    ForwardResult fr = forward(gen, z);
    const double obj = residual(op, y, fr.output, r);
    if (!std::isfinite(obj)) {
      res.diverged = true;
      break;
    }
    res.trace.push_back(obj);
    if (obj < res.best_objective) {
      res.best_objective = obj;
      res.best_z = z;
      res.best_x = fr.output;
    }
    if (it == iterations) break;
    op.apply_adjoint(r.data(), gx.data());
    gx *= 2.0;
    const GeneratorGradients g = backward(gen, fr.tape, gx, 0);
    try {
      opt.step(z, g.latent, lr);
    } catch (const NonFiniteError&) {
      res.diverged = true;
      break;
    }
    ++res.steps;
  }
  return res;
}

DescentResult descend_joint(GeneratorParams gen, const LinearOperator& op, const Tensor& y, Tensor z, double lr_z,
                            double lr_weights, std::size_t iterations, std::size_t trainable_layers,
                            std::size_t patience, double min_relative_improvement,
                            std::span<const double> layer_lr_scale) {
  trainable_layers = std::min(trainable_layers, gen.layers());
  if (!layer_lr_scale.empty() && layer_lr_scale.size() < trainable_layers) {
    throw std::invalid_argument("descend_joint: layer_lr_scale is shorter than the trainable layers");
  }
  DescentResult res;
  res.best_objective = std::numeric_limits<double>::infinity();
  AdamState z_opt(z.shape());
  std::vector<AdamState> w_opt;
  for (std::size_t l = 0; l < trainable_layers; ++l) w_opt.emplace_back(gen.weights[l].shape());

  Tensor r({op.rows()});
  Tensor gx({op.cols()});
  double reference = std::numeric_limits<double>::infinity();
  std::size_t last_improvement = 0;
  for (std::size_t it = 0;; ++it) {
    ForwardResult fr = forward(gen, z);
    const double obj = residual(op, y, fr.output, r);
    if (!std::isfinite(obj)) {
      res.diverged = true;
      break;
    }
    res.trace.push_back(obj);
    if (obj < res.best_objective) {
      res.best_objective = obj;
      res.best_z = z;
      res.best_x = fr.output;
      res.best_params = gen;
    }
    if (obj < reference * (1.0 - min_relative_improvement)) {
      reference = obj;
      last_improvement = it;
    }
    if (it == iterations) break;
    if (patience > 0 && it - last_improvement >= patience) break;

    op.apply_adjoint(r.data(), gx.data());
    gx *= 2.0;
    const GeneratorGradients g = backward(gen, fr.tape, gx, trainable_layers);
    try {
      z_opt.step(z, g.latent, lr_z);
      for (std::size_t l = 0; l < trainable_layers; ++l) {
        const double lr = layer_lr_scale.empty() ? lr_weights : lr_weights * layer_lr_scale[l];
        w_opt[l].step(gen.weights[l], g.weights[l], lr);
      }
    } catch (const NonFiniteError&) {
      res.diverged = true;
      break;
    }
    ++res.steps;
  }
  return res;
}

}  // namespace detail

SolveReport csgm_solve(const GeneratorParams& gen, const LinearOperator& op, const Tensor& y, const SolveConfig& cfg,
                       const RngStream& rng) {
  require_compatible(gen, op, y);
  if (cfg.restarts < 1) throw std::invalid_argument("csgm_solve: restarts must be at least 1");
  if (!(cfg.lr_z > 0.0)) throw std::invalid_argument("csgm_solve: lr_z must be positive");
  const std::size_t k0 = gen.latent_dim();
  const double radius = cfg.latent_radius > 0.0 ? cfg.latent_radius : std::sqrt(static_cast<double>(k0));
  const std::size_t iterations = cfg.effective_iterations();

  SolveReport rep;
  rep.best_objective = std::numeric_limits<double>::infinity();
  rep.iterations_run = iterations;
  bool any = false;
  for (std::size_t restart = 0; restart < cfg.restarts; ++restart) {
    RngStream init_rng = rng.fork(restart);
    Tensor z0 = sample_truncated_latent(init_rng, k0, radius);
    detail::DescentResult run = detail::descend_latent(gen, op, y, std::move(z0), cfg.lr_z, iterations);
    rep.objective_trace.insert(rep.objective_trace.end(), run.trace.begin(), run.trace.end());
    if (run.diverged) ++rep.diverged_runs;
    if (!run.trace.empty() && run.best_objective < rep.best_objective) {
      any = true;
      rep.best_objective = run.best_objective;
      rep.z_hat = std::move(run.best_z);
      rep.x_hat = std::move(run.best_x);
    }
  }
  if (!any) throw DivergenceError("csgm_solve: every restart diverged");
  return rep;
}

SolveReport iagan_solve(const GeneratorParams& gen, const LinearOperator& op, const Tensor& y, const Tensor& z_init,
                        const SolveConfig& cfg) {
  require_compatible(gen, op, y);
  if (z_init.size() != gen.latent_dim()) throw ShapeError("iagan_solve: z_init does not match the generator");
  if (!(cfg.lr_z > 0.0) || !(cfg.lr_theta > 0.0)) {
    throw std::invalid_argument("iagan_solve: lr_z and lr_theta must be positive");
  }
  std::vector<double> scale;
  if (cfg.layer_scaled_lr) {
    for (std::size_t l = 0; l < gen.layers(); ++l) scale.push_back(std::sqrt(2.0 / static_cast<double>(gen.dims[l])));
  }
  detail::DescentResult run =
      detail::descend_joint(gen, op, y, z_init.reshaped({z_init.size()}), cfg.lr_z, cfg.lr_theta,
                            cfg.effective_iterations(), kAllLayers, cfg.patience, cfg.min_relative_improvement, scale);
  if (run.trace.empty()) throw DivergenceError("iagan_solve: objective at z_init is not finite");

  SolveReport rep;
  rep.x_hat = std::move(run.best_x);
  rep.z_hat = std::move(run.best_z);
  rep.theta_hat = std::move(run.best_params);
  rep.best_objective = run.best_objective;
  rep.objective_trace = std::move(run.trace);
  rep.iterations_run = run.steps;
  rep.diverged_runs = run.diverged ? 1 : 0;
  return rep;
}

Tensor back_project(const LinearOperator& op, const Tensor& x_hat, const Tensor& y, const CgConfig& cg) {
  if (x_hat.size() != op.cols() || y.size() != op.rows()) throw ShapeError("back_project: dimension mismatch");
  if (op.kind() == OperatorKind::sampling_mask || op.kind() == OperatorKind::identity) {
    // A A^T = I: keep unsampled coordinates, replace sampled ones by y
    const Tensor kept = op.apply_adjoint(Tensor::filled({op.rows()}, 1.0));
    Tensor out = op.apply_adjoint(y.reshaped({y.size()}));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += x_hat[i] * (1.0 - kept[i]);
    return out;
  }
  Tensor r = y.reshaped({y.size()}) - op.apply(x_hat);
  return x_hat.reshaped({x_hat.size()}) + pseudoinverse_apply(op, r, cg);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::csgm: return "csgm";
    case Method::csgm_bp: return "csgm_bp";
    case Method::iagan: return "iagan";
    case Method::iagan_bp: return "iagan_bp";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  std::string key;
  for (char c : name) key.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "csgm") return Method::csgm;
  if (key == "csgm_bp") return Method::csgm_bp;
  if (key == "iagan") return Method::iagan;
  if (key == "iagan_bp") return Method::iagan_bp;
  throw std::invalid_argument("unknown method '" + name + "'");
}

bool is_back_projection(Method m) noexcept { return m == Method::csgm_bp || m == Method::iagan_bp; }

namespace {

SolveReport bp_report(const LinearOperator& op, const Tensor& y, const SolveReport& base, const CgConfig& cg) {
  SolveReport rep;
  rep.x_hat = back_project(op, base.x_hat, y, cg);
  rep.z_hat = base.z_hat;
  rep.theta_hat = base.theta_hat;
  rep.best_objective = measurement_objective(op, y, rep.x_hat);
  rep.objective_trace = {rep.best_objective};
  return rep;
}

}  // namespace

std::map<Method, SolveReport> run_method_suite(const GeneratorParams& gen, const LinearOperator& op, const Tensor& y,
                                               const SuiteConfig& cfg, const RngStream& rng) {
  const auto wants = [&](Method m) { return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end(); };
  const bool need_iagan = wants(Method::iagan) || (wants(Method::iagan_bp) && !cfg.noise_mode);

  SolveConfig csgm_cfg = cfg.csgm;
  SolveConfig iagan_cfg = cfg.iagan;
  csgm_cfg.noise_mode = iagan_cfg.noise_mode = cfg.noise_mode;

  std::map<Method, SolveReport> out;
  SolveReport csgm = csgm_solve(gen, op, y, csgm_cfg, rng);
  if (!cfg.noise_mode && wants(Method::csgm_bp)) out.emplace(Method::csgm_bp, bp_report(op, y, csgm, cfg.cg));
  if (need_iagan) {
    SolveReport iagan = iagan_solve(gen, op, y, csgm.z_hat, iagan_cfg);
    if (!cfg.noise_mode && wants(Method::iagan_bp)) out.emplace(Method::iagan_bp, bp_report(op, y, iagan, cfg.cg));
    if (wants(Method::iagan)) out.emplace(Method::iagan, std::move(iagan));
  }
  if (wants(Method::csgm)) out.emplace(Method::csgm, std::move(csgm));
  return out;
}

}  // namespace iagan
