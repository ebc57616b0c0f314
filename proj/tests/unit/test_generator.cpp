#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "iagan/errors.hpp"
#include "iagan/generator.hpp"

using namespace iagan;

namespace {

// Straightforward nested-loop evaluation of the network.
std::vector<double> naive_forward(const GeneratorParams& g, const Tensor& z) {
  std::vector<double> a(z.data().begin(), z.data().end());
  for (std::size_t l = 0; l < g.layers(); ++l) {
    const Tensor& w = g.weights[l];
    std::vector<double> next(w.dim(0), 0.0);
    for (std::size_t i = 0; i < w.dim(0); ++i) {
      for (std::size_t j = 0; j < w.dim(1); ++j) next[i] += w(i, j) * a[j];
      if (l + 1 < g.layers()) next[i] = std::max(next[i], 0.0);
    }
    a = std::move(next);
  }
  return a;
}

double min_abs_preactivation(const GeneratorParams& g, const Tensor& z) {
  const ForwardResult fr = forward(g, z);
  double m = INFINITY;
  for (std::size_t l = 0; l + 1 < g.layers(); ++l) {
    for (double v : fr.tape.pre[l].data()) m = std::min(m, std::abs(v));
  }
  return m;
}

// A seeded generator and latent whose hidden pre-activations are all at
// least 1e-3 away from the ReLU kink.
std::pair<GeneratorParams, Tensor> generic_point(std::uint64_t seed, const std::vector<std::size_t>& dims) {
  for (std::uint64_t s = seed;; ++s) {
    RngStream rng(s);
    RngStream init = rng.fork("init");
    GeneratorParams g = init_generator(init, dims);
    RngStream zr = rng.fork("z");
    Tensor z = sample_gaussian(zr, {dims.front()}, 0.0, 1.0);
    if (min_abs_preactivation(g, z) >= 1e-3) return {std::move(g), std::move(z)};
  }
}

GeneratorParams eye_net(std::size_t k, std::size_t layers) {
  GeneratorParams g;
  g.dims.assign(layers + 1, k);
  for (std::size_t l = 0; l < layers; ++l) {
    Tensor w({k, k});
    for (std::size_t i = 0; i < k; ++i) w(i, i) = 1.0;
    g.weights.push_back(w);
  }
  return g;
}

}  // namespace

TEST_CASE("forward") {
  SUBCASE("one linear identity layer") {
    const Tensor z = Tensor::vector({0.5, -2.0, 3.0});
    CHECK(generate(eye_net(3, 1), z) == z);
  }
  SUBCASE("two identity layers apply one ReLU") {
    CHECK(generate(eye_net(2, 2), Tensor::vector({1.0, -1.0})) == Tensor::vector({1.0, 0.0}));
  }
  SUBCASE("random net against a loop oracle") {
    RngStream rng(21);
    const GeneratorParams g = init_generator(rng, {4, 8, 16, 32});
    for (int t = 0; t < 10; ++t) {
      const Tensor z = sample_gaussian(rng, {4}, 0.0, 1.0);
      const Tensor out = generate(g, z);
      const std::vector<double> ref = naive_forward(g, z);
      double err = 0.0, nrm = 0.0;
      for (std::size_t i = 0; i < ref.size(); ++i) {
        err += (out[i] - ref[i]) * (out[i] - ref[i]);
        nrm += ref[i] * ref[i];
      }
      CHECK(std::sqrt(err) <= 1e-13 * std::sqrt(nrm));
    }
  }
  SUBCASE("positive homogeneity in z") {
    RngStream rng(22);
    const GeneratorParams g = init_generator(rng, {8, 32, 128, 256});
    const Tensor z = sample_gaussian(rng, {8}, 0.0, 1.0);
    const Tensor gz = generate(g, z);
    for (double alpha : {0.1, 2.5, 40.0}) {
      const Tensor lhs = generate(g, alpha * z);
      CHECK(norm2(lhs - alpha * gz) <= 1e-12 * norm2(alpha * gz));
    }
  }
  SUBCASE("desk dims give finite output and pure evaluation") {
    RngStream rng(23);
    const GeneratorParams g = init_generator(rng, {8, 32, 128, 256});
    const Tensor z = sample_gaussian(rng, {8}, 0.0, 1.0);
    const Tensor a = generate(g, z);
    CHECK(a.all_finite());
    CHECK(a == generate(g, z));
    CHECK(a == forward(g, z).output);
  }
  SUBCASE("shape errors") {
    RngStream rng(24);
    const GeneratorParams g = init_generator(rng, {4, 8});
    CHECK_THROWS_AS(generate(g, Tensor::zeros({5})), ShapeError);
    GeneratorParams bad = g;
    bad.weights[0] = Tensor::zeros({8, 3});
    CHECK_THROWS_AS(bad.validate(), ShapeError);
    CHECK_THROWS(init_generator(rng, {8, 4}));
  }
}

TEST_CASE("backward") {
  SUBCASE("linear layer calculus") {
    RngStream rng(31);
    const GeneratorParams g = init_generator(rng, {3, 5});
    const Tensor z = Tensor::vector({0.2, -1.0, 0.7});
    const Tensor go = sample_gaussian(rng, {5}, 0.0, 1.0);
    const GeneratorGradients gr = backward(g, forward(g, z).tape, go);
    const Tensor& w = g.weights[0];
    for (std::size_t j = 0; j < 3; ++j) {
      double ref = 0.0;
      for (std::size_t i = 0; i < 5; ++i) ref += w(i, j) * go[i];
      CHECK(gr.latent[j] == doctest::Approx(ref).epsilon(1e-14));
    }
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 3; ++j) CHECK(gr.weights[0](i, j) == go[i] * z[j]);
    }
  }
  SUBCASE("zero upstream gradient") {
    RngStream rng(32);
    const GeneratorParams g = init_generator(rng, {4, 8, 16});
    const Tensor z = sample_gaussian(rng, {4}, 0.0, 1.0);
    const GeneratorGradients gr = backward(g, forward(g, z).tape, Tensor::zeros({16}));
    CHECK(norm2(gr.latent) == 0.0);
    for (const Tensor& w : gr.weights) CHECK(norm2(w) == 0.0);
  }
  SUBCASE("weight_layers limits which layers get gradients") {
    RngStream rng(33);
    const GeneratorParams g = init_generator(rng, {4, 8, 16});
    const Tensor z = sample_gaussian(rng, {4}, 0.0, 1.0);
    const Tensor go = sample_gaussian(rng, {16}, 0.0, 1.0);
    const GeneratorGradients all = backward(g, forward(g, z).tape, go);
    const GeneratorGradients one = backward(g, forward(g, z).tape, go, 1);
    CHECK(one.weights[0] == all.weights[0]);
    CHECK(one.weights[1].empty());
    CHECK(one.latent == all.latent);
  }
  SUBCASE("central finite differences at a generic point") {
    auto [g, z] = generic_point(34, {4, 8, 16, 32});
    RngStream rng(35);
    const Tensor go = sample_gaussian(rng, {32}, 0.0, 1.0);
    const GeneratorGradients gr = backward(g, forward(g, z).tape, go);
    const double h = 1e-5;
    auto f = [&](const GeneratorParams& p, const Tensor& zz) { return dot(go, generate(p, zz)); };
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-5 * std::max(std::abs(b), 1e-3); };
    for (std::size_t j = 0; j < z.size(); ++j) {
      Tensor zp = z, zm = z;
      zp[j] += h;
      zm[j] -= h;
      const double fd = (f(g, zp) - f(g, zm)) / (2 * h);
      CHECK(close(gr.latent[j], fd));
    }
    for (std::size_t l = 0; l < g.layers(); ++l) {
      for (std::size_t e = 0; e < g.weights[l].size(); ++e) {
        GeneratorParams gp = g, gm = g;
        gp.weights[l][e] += h;
        gm.weights[l][e] -= h;
        const double fd = (f(gp, z) - f(gm, z)) / (2 * h);
        CAPTURE(l);
        CAPTURE(e);
        CHECK(close(gr.weights[l][e], fd));
      }
    }
  }
}

TEST_CASE("init_generator") {
  SUBCASE("deterministic") {
    RngStream a(41), b(41);
    CHECK(init_generator(a, {8, 32, 128}) == init_generator(b, {8, 32, 128}));
  }
  SUBCASE("He variance for wide layers") {
    RngStream rng(42);
    const GeneratorParams g = init_generator(rng, {64, 128, 256});
    for (std::size_t l = 0; l < 2; ++l) {
      const Tensor& w = g.weights[l];
      double mean = 0.0;
      for (double v : w.data()) mean += v;
      mean /= w.size();
      double var = 0.0;
      for (double v : w.data()) var += (v - mean) * (v - mean);
      var /= w.size() - 1;
      const double expected = 2.0 / g.dims[l];
      CHECK(std::abs(var / expected - 1.0) < 0.1);
    }
  }
}

TEST_CASE("generator files") {
  const auto dir = std::filesystem::temp_directory_path() / "iagan_gen_test";
  std::filesystem::remove_all(dir);
  RngStream rng(51);
  const GeneratorParams g = init_generator(rng, {4, 8, 16});
  save_generator(dir, g, 51);
  CHECK(load_generator(dir) == g);

  {
    std::ofstream(dir / "manifest.json") << R"({"format":"iagan-generator","dims":[4,8,16],"biases":true,)"
                                         << R"("seed":1,"weights":["W1.iatf","W2.iatf"]})";
  }
  CHECK_THROWS(load_generator(dir));
  std::filesystem::remove_all(dir);
  CHECK_THROWS(load_generator(dir));
}

TEST_CASE("latent helpers") {
  RngStream rng(61);
  for (int t = 0; t < 200; ++t) {
    const Tensor z = sample_truncated_latent(rng, 8, std::sqrt(8.0));
    CHECK(norm2(z) <= std::sqrt(8.0) * (1 + 1e-12));
  }
  Tensor z = Tensor::vector({3.0, 4.0});
  project_to_ball(z, 1.0);
  CHECK(z[0] == doctest::Approx(0.6));
  CHECK(z[1] == doctest::Approx(0.8));
  Tensor inside = Tensor::vector({0.1, 0.2});
  project_to_ball(inside, 1.0);
  CHECK(inside == Tensor::vector({0.1, 0.2}));
}
