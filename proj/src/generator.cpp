#include "iagan/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "iagan/errors.hpp"
#include "iagan/tensor_io.hpp"

namespace iagan {
namespace {

// y = W x for W of shape {rows, cols}.
void matvec(const Tensor& w, std::span<const double> x, std::span<double> y) {
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  const double* row = w.data().data();
  for (std::size_t i = 0; i < rows; ++i, row += cols) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

// x = W^T y
void matvec_t(const Tensor& w, std::span<const double> y, std::span<double> x) {
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  std::fill(x.begin(), x.end(), 0.0);
  const double* row = w.data().data();
  for (std::size_t i = 0; i < rows; ++i, row += cols) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j) x[j] += row[j] * yi;
  }
}

}  // namespace

void GeneratorParams::validate(bool strict) const {
  if (weights.empty()) throw ShapeError("generator needs at least one layer");
  if (dims.size() != weights.size() + 1) {
    throw ShapeError(fmt::format("generator has {} dims for {} layers", dims.size(), weights.size()));
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const Shape expected{dims[l + 1], dims[l]};
    if (weights[l].shape() != expected) {
      throw ShapeError(fmt::format("W{} has shape {}, expected {}", l + 1, shape_string(weights[l].shape()),
                                   shape_string(expected)));
    }
  }
  if (strict) {
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      if (dims[l] >= dims[l + 1]) throw std::invalid_argument("generator dims must be strictly increasing");
    }
  }
}

ForwardResult forward(const GeneratorParams& params, const Tensor& z) {
  const std::size_t layers = params.layers();
  if (z.size() != params.latent_dim()) {
    throw ShapeError(fmt::format("forward: latent has {} entries, generator expects {}", z.size(), params.latent_dim()));
  }
  ForwardResult res;
  res.tape.input = z.reshaped({z.size()});
  res.tape.pre.reserve(layers);
  res.tape.post.reserve(layers - 1);
  const Tensor* a = &res.tape.input;
  for (std::size_t l = 0; l < layers; ++l) {
    Tensor pre({params.dims[l + 1]});
    matvec(params.weights[l], a->data(), pre.data());
    res.tape.pre.push_back(std::move(pre));
    if (l + 1 < layers) {
      Tensor post = res.tape.pre.back();
      for (double& v : post.data()) v = v > 0.0 ? v : 0.0;
      res.tape.post.push_back(std::move(post));
      a = &res.tape.post.back();
    }
  }
  res.output = res.tape.pre.back();
  return res;
}

Tensor generate(const GeneratorParams& params, const Tensor& z) {
  if (z.size() != params.latent_dim()) {
    throw ShapeError(fmt::format("generate: latent has {} entries, generator expects {}", z.size(), params.latent_dim()));
  }
  Tensor a = z.reshaped({z.size()});
  for (std::size_t l = 0; l < params.layers(); ++l) {
    Tensor next({params.dims[l + 1]});
    matvec(params.weights[l], a.data(), next.data());
    if (l + 1 < params.layers()) {
      for (double& v : next.data()) v = v > 0.0 ? v : 0.0;
    }
    a = std::move(next);
  }
  return a;
}

GeneratorGradients backward(const GeneratorParams& params, const ForwardTape& tape, const Tensor& g_out,
                            std::size_t weight_layers) {
  const std::size_t layers = params.layers();
  if (tape.pre.size() != layers || tape.post.size() + 1 != layers || tape.input.size() != params.latent_dim()) {
    throw ShapeError("backward: tape does not match generator");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (tape.pre[l].size() != params.dims[l + 1]) throw ShapeError("backward: tape does not match generator");
  }
  if (g_out.size() != params.output_dim()) {
    throw ShapeError(fmt::format("backward: output gradient has {} entries, expected {}", g_out.size(),
                                 params.output_dim()));
  }
  weight_layers = std::min(weight_layers, layers);

  GeneratorGradients grads;
  grads.weights.resize(layers);
  // delta holds d<g_out, G>/d(pre_l), walking from the top layer down.
  Tensor delta = g_out.reshaped({g_out.size()});
  for (std::size_t l = layers; l-- > 0;) {
    const Tensor& input = l == 0 ? tape.input : tape.post[l - 1];
    if (l < weight_layers) {
      Tensor gw({params.dims[l + 1], params.dims[l]});
      const std::size_t rows = gw.dim(0), cols = gw.dim(1);
      for (std::size_t i = 0; i < rows; ++i) {
        const double di = delta[i];
        double* row = gw.data().data() + i * cols;
        if (di == 0.0) continue;
        for (std::size_t j = 0; j < cols; ++j) row[j] = di * input[j];
      }
      grads.weights[l] = std::move(gw);
    }
    Tensor below({params.dims[l]});
    matvec_t(params.weights[l], delta.data(), below.data());
    if (l > 0) {
      const Tensor& pre = tape.pre[l - 1];
      for (std::size_t j = 0; j < below.size(); ++j)
        if (!(pre[j] > 0.0)) below[j] = 0.0;
    }
    delta = std::move(below);
  }
  grads.latent = std::move(delta);
  return grads;
}

GeneratorParams init_generator(RngStream& rng, const std::vector<std::size_t>& dims, bool strict) {
  if (dims.size() < 2) throw std::invalid_argument("init_generator: need at least two dims");
  for (std::size_t d : dims)
    if (d == 0) throw std::invalid_argument("init_generator: dims must be positive");
  GeneratorParams p;
  p.dims = dims;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    RngStream layer_rng = rng.fork(l);
    p.weights.push_back(
        sample_gaussian(layer_rng, {dims[l + 1], dims[l]}, 0.0, std::sqrt(2.0 / static_cast<double>(dims[l]))));
  }
  p.validate(strict);
  return p;
}

void save_generator(const std::filesystem::path& dir, const GeneratorParams& params, std::uint64_t seed) {
  params.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "iagan-generator";
  manifest["dims"] = params.dims;
  manifest["biases"] = false;
  manifest["seed"] = seed;
  std::vector<std::string> files;
  for (std::size_t l = 0; l < params.layers(); ++l) {
    files.push_back(fmt::format("W{}.iatf", l + 1));
    save_tensor(dir / files.back(), params.weights[l]);
  }
  manifest["weights"] = files;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

GeneratorParams load_generator(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "manifest.json").string());
  const nlohmann::json manifest = nlohmann::json::parse(in);
  if (manifest.value("biases", false)) throw std::runtime_error("generators with biases are not supported");
  GeneratorParams p;
  p.dims = manifest.at("dims").get<std::vector<std::size_t>>();
  for (const auto& f : manifest.at("weights")) p.weights.push_back(load_tensor(dir / f.get<std::string>()));
  p.validate();
  return p;
}

}  // namespace iagan

namespace iagan {

void project_to_ball(Tensor& z, double radius) {
  const double nz = norm2(z);
  if (nz > radius) z *= radius / nz;
}

Tensor sample_truncated_latent(RngStream& rng, std::size_t k, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("sample_truncated_latent: radius must be positive");
  Tensor z = sample_gaussian(rng, {k}, 0.0, 1.0);
  project_to_ball(z, radius);
  return z;
}

}  // namespace iagan
