#include "iagan/glo.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "iagan/adam.hpp"
#include "iagan/errors.hpp"

namespace iagan {

ToyImageModel::ToyImageModel(RngStream rng, std::size_t h, std::size_t w, std::size_t d_true) : h_(h), w_(w) {
  if (d_true < 1) throw std::invalid_argument("toy model needs d_true >= 1");
  if (h < 8 || w < 8) throw std::invalid_argument(fmt::format("toy images must be at least 8x8, got {}x{}", h, w));
  const double hh = static_cast<double>(h), ww = static_cast<double>(w);
  bumps_.reserve(d_true);
  for (std::size_t j = 0; j < d_true; ++j) {
    Bump b{};
    b.cy = 1.5 + rng.uniform() * (hh - 4.0);
    b.cx = 1.5 + rng.uniform() * (ww - 4.0);
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    b.dy = std::sin(angle);
    b.dx = std::cos(angle);
    b.width = 1.0 + 1.2 * rng.uniform();
    b.amplitude = 0.25 + 0.35 * rng.uniform();
    bumps_.push_back(b);
  }
}

Tensor ToyImageModel::render(std::span<const double> factors) const {
  if (factors.size() != bumps_.size()) {
    throw ShapeError(fmt::format("toy model expects {} factors, got {}", bumps_.size(), factors.size()));
  }
  Tensor img({h_ * w_});
  for (std::size_t j = 0; j < bumps_.size(); ++j) {
    const Bump& b = bumps_[j];
    const double u = factors[j];
    const double shift = 1.5 * std::tanh(u);
    const double cy = b.cy + shift * b.dy, cx = b.cx + shift * b.dx;
    const double amp = b.amplitude * std::exp(0.4 * u);
    const double inv = 1.0 / (2.0 * b.width * b.width);
    for (std::size_t r = 0; r < h_; ++r) {
      const double ry = static_cast<double>(r) - cy;
      for (std::size_t c = 0; c < w_; ++c) {
        const double cx_d = static_cast<double>(c) - cx;
        img[r * w_ + c] += amp * std::exp(-(ry * ry + cx_d * cx_d) * inv);
      }
    }
  }
  for (double& v : img.data()) v = 1.0 - std::exp(-v);
  return img;
}

Tensor ToyImageModel::sample(RngStream& rng) const {
  Tensor f = sample_gaussian(rng, {bumps_.size()}, 0.0, 1.0);
  return render(f.data());
}

ToyDataset make_toy_dataset(const RngStream& rng, std::size_t count, std::size_t h, std::size_t w,
                            std::size_t d_true, std::size_t first_index) {
  const ToyImageModel model(rng.fork("map"), h, w, d_true);
  const RngStream samples = rng.fork("sample");
  ToyDataset ds;
  ds.h = h;
  ds.w = w;
  ds.d_true = d_true;
  ds.seed = rng.key();
  ds.images.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RngStream s = samples.fork(first_index + i);
    ds.images.push_back(model.sample(s));
  }
  return ds;
}

void GloConfig::validate() const {
  if (!(lr_weights > 0.0) || !(lr_latents > 0.0)) throw std::invalid_argument("GloConfig: learning rates must be positive");
  if (radius < 0.0) throw std::invalid_argument("GloConfig: radius must be positive (or 0 for sqrt(k0))");
}

double GloConfig::effective_radius(std::size_t latent_dim) const {
  return radius > 0.0 ? radius : std::sqrt(static_cast<double>(latent_dim));
}

double glo_loss(const GeneratorParams& params, std::span<const Tensor> latents, std::span<const Tensor> images) {
  if (latents.size() != images.size()) throw ShapeError("glo_loss: latent and image counts differ");
  double loss = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Tensor diff = generate(params, latents[i]) - images[i].reshaped({images[i].size()});
    loss += dot(diff, diff);
  }
  return loss;
}

namespace {

struct Evaluation {
  std::vector<ForwardTape> tapes;
  std::vector<Tensor> residuals;  // G(z_i) - x_i
  double loss = 0.0;
};

Evaluation evaluate(const GeneratorParams& params, const std::vector<Tensor>& latents,
                    const std::vector<Tensor>& images) {
  Evaluation ev;
  ev.tapes.reserve(images.size());
  ev.residuals.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    ForwardResult fr = forward(params, latents[i]);
    Tensor r = fr.output - images[i];
    ev.loss += dot(r, r);
    ev.tapes.push_back(std::move(fr.tape));
    ev.residuals.push_back(std::move(r));
  }
  return ev;
}

}  // namespace

GloResult train_glo(const ToyDataset& dataset, const std::vector<std::size_t>& dims, const GloConfig& cfg,
                    RngStream& rng) {
  cfg.validate();
  if (dataset.images.empty()) throw std::invalid_argument("train_glo: empty dataset");
  const std::size_t n = dataset.images.front().size();
  if (dims.empty() || dims.back() != n) {
    throw ShapeError(fmt::format("train_glo: generator output must have {} entries", n));
  }

  std::vector<Tensor> images;
  images.reserve(dataset.images.size());
  for (const Tensor& x : dataset.images) {
    if (x.size() != n) throw ShapeError("train_glo: images differ in size");
    images.push_back(x.reshaped({n}));
  }

  GloResult res;
  RngStream init_rng = rng.fork("init");
  res.params = init_generator(init_rng, dims, false);
  const std::size_t k0 = dims.front();
  const double radius = cfg.effective_radius(k0);
  const RngStream latent_rng = rng.fork("latents");
  for (std::size_t i = 0; i < images.size(); ++i) {
    RngStream s = latent_rng.fork(i);
    res.latents.push_back(sample_truncated_latent(s, k0, radius));
  }

  std::vector<AdamState> weight_opt;
  for (const Tensor& w : res.params.weights) weight_opt.emplace_back(w.shape());
  std::vector<AdamState> latent_opt(images.size(), AdamState({k0}));

  double lr_w = cfg.lr_weights, lr_z = cfg.lr_latents;
  Evaluation current = evaluate(res.params, res.latents, images);
  res.loss_trace.push_back(current.loss);
  if (!std::isfinite(current.loss)) throw GloDivergence("train_glo: initial loss is not finite", res.loss_trace);

  const std::size_t layers = res.params.layers();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    GeneratorParams params = res.params;
    std::vector<Tensor> latents = res.latents;
    std::vector<AdamState> w_opt = weight_opt;
    std::vector<AdamState> z_opt = latent_opt;

    // Weight step from the cached tapes of the current point.
    std::vector<Tensor> gw;
    for (const Tensor& w : params.weights) gw.emplace_back(w.shape());
    for (std::size_t i = 0; i < images.size(); ++i) {
      const GeneratorGradients g = backward(params, current.tapes[i], 2.0 * current.residuals[i]);
      for (std::size_t l = 0; l < layers; ++l) gw[l] += g.weights[l];
    }
    for (std::size_t l = 0; l < layers; ++l) w_opt[l].step(params.weights[l], gw[l], lr_w);

    // Latent step at the updated weights.
    for (std::size_t i = 0; i < images.size(); ++i) {
      ForwardResult fr = forward(params, latents[i]);
      const Tensor r = fr.output - images[i];
      const GeneratorGradients g = backward(params, fr.tape, 2.0 * r, 0);
      z_opt[i].step(latents[i], g.latent, lr_z);
      project_to_ball(latents[i], radius);
    }

    Evaluation trial = evaluate(params, latents, images);
    if (!std::isfinite(trial.loss)) {
      res.loss_trace.push_back(trial.loss);
      throw GloDivergence(fmt::format("train_glo: loss became non-finite at epoch {}", epoch + 1), res.loss_trace);
    }
    if (trial.loss > current.loss) {
      lr_w *= 0.5;
      lr_z *= 0.5;
      ++res.backoffs;
    } else {
      res.params = std::move(params);
      res.latents = std::move(latents);
      weight_opt = std::move(w_opt);
      latent_opt = std::move(z_opt);
      current = std::move(trial);
    }
    res.loss_trace.push_back(current.loss);
  }
  res.final_lr_weights = lr_w;
  res.final_lr_latents = lr_z;
  return res;
}

}  // namespace iagan
