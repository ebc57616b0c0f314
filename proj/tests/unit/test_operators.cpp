#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "iagan/errors.hpp"
#include "iagan/operators.hpp"
#include "oracles.hpp"

using namespace iagan;

namespace {

struct Named {
  std::string name;
  LinearOperator op;
};

// One small instance of every kind, n = 64 (8x8 images).
std::vector<Named> small_operators() {
  RngStream rng(123);
  std::vector<Named> ops;
  RngStream g = rng.fork("gauss");
  ops.push_back({"gaussian", make_gaussian_operator(g, 20, 64)});
  RngStream d = rng.fork("dense");
  ops.push_back({"dense", make_dense_operator(sample_gaussian(d, {30, 64}, 0.0, 1.0))});
  RngStream mr = rng.fork("mask");
  ops.push_back({"fourier", make_fourier_operator(make_radial_mask(8, 8, 0.3, mr), 8, 8)});
  ops.push_back({"blur_decimate", make_blur_decimate_operator(bicubic_kernel(2), 2, 8, 8)});
  ops.push_back({"uniform_blur", make_uniform_blur_operator(3, 8, 8)});
  ops.push_back({"sampling", make_sampling_operator({5, 0, 63, 17, 30, 8}, 64)});
  ops.push_back({"identity", make_identity_operator(64)});
  return ops;
}

}  // namespace

TEST_CASE("adjoint identity for every kind") {
  RngStream rng(1);
  for (const auto& [name, op] : small_operators()) {
    CAPTURE(name);
    for (int t = 0; t < 100; ++t) {
      const Tensor x = sample_gaussian(rng, {op.cols()}, 0.0, 1.0);
      const Tensor u = sample_gaussian(rng, {op.rows()}, 0.0, 1.0);
      const double lhs = dot(op.apply(x), u);
      const double rhs = dot(x, op.apply_adjoint(u));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, norm2(op.apply(x)) * norm2(u)));
    }
  }
}

TEST_CASE("dense-oracle equivalence for n <= 64") {
  RngStream rng(2);
  for (const auto& [name, op] : small_operators()) {
    CAPTURE(name);
    const Eigen::MatrixXd a = oracle::dense(op);
    const Tensor x = sample_gaussian(rng, {op.cols()}, 0.0, 1.0);
    const Tensor u = sample_gaussian(rng, {op.rows()}, 0.0, 1.0);
    CHECK(oracle::rel(oracle::vec(op.apply(x)), a * oracle::vec(x)) <= 1e-12);
    CHECK(oracle::rel(oracle::vec(op.apply_adjoint(u)), a.transpose() * oracle::vec(u)) <= 1e-12);
    if (op.rows() <= op.cols()) {
      // Stacked Fourier rows can be dependent, so r is taken from range(A)
      // and compared with the Moore-Penrose pseudoinverse.
      const Tensor r = op.apply(sample_gaussian(rng, {op.cols()}, 0.0, 1.0));
      const Eigen::VectorXd ref = a.completeOrthogonalDecomposition().pseudoInverse() * oracle::vec(r);
      CHECK(oracle::rel(oracle::vec(pseudoinverse_apply(op, r)), ref) <= 1e-8);
    }
  }
}

TEST_CASE("linearity") {
  RngStream rng(3);
  for (const auto& [name, op] : small_operators()) {
    CAPTURE(name);
    const Tensor x = sample_gaussian(rng, {op.cols()}, 0.0, 1.0);
    const Tensor x2 = sample_gaussian(rng, {op.cols()}, 0.0, 1.0);
    const Tensor lhs = op.apply(1.7 * x + (-0.4) * x2);
    const Tensor rhs = 1.7 * op.apply(x) + (-0.4) * op.apply(x2);
    CHECK(norm2(lhs - rhs) <= 1e-12 * norm2(rhs));
  }
}

TEST_CASE("gaussian operator statistics") {
  SUBCASE("norm preserved in expectation") {
    RngStream rng(4);
    Tensor x = Tensor::zeros({100});
    for (std::size_t i = 0; i < 100; ++i) x[i] = std::cos(0.3 * i);
    x *= 1.0 / norm2(x);
    double acc = 0.0;
    for (int t = 0; t < 500; ++t) {
      RngStream r = rng.fork(t);
      const Tensor y = make_gaussian_operator(r, 1000, 100).apply(x);
      acc += dot(y, y);
    }
    CHECK(std::abs(acc / 500 - 1.0) < 0.1);
  }
  SUBCASE("entry variance is 1/m") {
    RngStream rng(5);
    const Eigen::MatrixXd a = oracle::dense(make_gaussian_operator(rng, 200, 200));
    const double mean = a.mean();
    const double var = (a.array() - mean).square().sum() / (a.size() - 1);
    CHECK(std::abs(var * 200 - 1.0) < 0.05);
  }
  SUBCASE("size budget") {
    RngStream rng(6);
    CHECK_THROWS_AS(make_gaussian_operator(rng, 100, 100, 5000), std::length_error);
    CHECK_THROWS(make_gaussian_operator(rng, 0, 10));
  }
}

TEST_CASE("fourier operator") {
  SUBCASE("full mask is unitary") {
    const auto op = make_fourier_operator(std::vector<bool>(48, true), 6, 8);
    CHECK(op.rows() == 96);
    RngStream rng(7);
    const Tensor x = sample_gaussian(rng, {48}, 0.0, 1.0);
    CHECK(std::abs(norm2(op.apply(x)) - norm2(x)) <= 1e-10 * norm2(x));
  }
  SUBCASE("DC coefficient of a constant image") {
    std::vector<bool> mask(64, false);
    mask[0] = true;
    const auto op = make_fourier_operator(mask, 8, 8);
    const Tensor y = op.apply(Tensor::filled({64}, 0.3));
    REQUIRE(y.size() == 2);
    CHECK(y[0] == doctest::Approx(0.3 * 8.0).epsilon(1e-13));
    CHECK(std::abs(y[1]) < 1e-14);
  }
  SUBCASE("single coefficient matches the DFT formula") {
    const std::size_t h = 5, w = 6, ku = 2, kv = 1;
    std::vector<bool> mask(h * w, false);
    mask[ku * w + kv] = true;
    RngStream rng(8);
    const Tensor x = sample_gaussian(rng, {h * w}, 0.0, 1.0);
    double re = 0.0, im = 0.0;
    for (std::size_t a = 0; a < h; ++a) {
      for (std::size_t b = 0; b < w; ++b) {
        const double ang = -2.0 * M_PI * (double(ku * a) / h + double(kv * b) / w);
        re += x[a * w + b] * std::cos(ang);
        im += x[a * w + b] * std::sin(ang);
      }
    }
    const Tensor y = make_fourier_operator(mask, h, w).apply(x);
    CHECK(y[0] == doctest::Approx(re / std::sqrt(30.0)).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(im / std::sqrt(30.0)).epsilon(1e-12));
  }
  SUBCASE("masks") {
    RngStream rng(9);
    const auto mask = make_radial_mask(16, 16, 0.25, rng);
    CHECK(std::count(mask.begin(), mask.end(), true) == 64);
    CHECK(mask[0]);
    CHECK_THROWS(make_fourier_operator(std::vector<bool>(64, false), 8, 8));
    CHECK_THROWS_AS(make_fourier_operator(std::vector<bool>(10, true), 8, 8), ShapeError);
  }
}

TEST_CASE("blur and decimate") {
  SUBCASE("constant images stay constant") {
    const auto op = make_blur_decimate_operator(bicubic_kernel(2), 2, 16, 16);
    CHECK(op.rows() == 64);
    const Tensor y = op.apply(Tensor::filled({256}, 0.42));
    for (double v : y.data()) CHECK(v == doctest::Approx(0.42).epsilon(1e-13));
  }
  SUBCASE("Dirac kernel subsamples") {
    const auto op = make_blur_decimate_operator(Tensor::filled({1, 1}, 1.0), 2, 8, 6);
    RngStream rng(10);
    const Tensor x = sample_gaussian(rng, {48}, 0.0, 1.0);
    const Tensor y = op.apply(x);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 3; ++j) CHECK(y[i * 3 + j] == x[(2 * i) * 6 + 2 * j]);
    }
  }
  SUBCASE("bicubic kernel") {
    const Tensor k = bicubic_kernel(2);
    CHECK(k.shape() == Shape{7, 7});
    double s = 0.0;
    for (double v : k.data()) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(k(3, 3) == *std::max_element(k.data().begin(), k.data().end()));
    CHECK(k(0, 3) == doctest::Approx(k(6, 3)).epsilon(1e-15));
    CHECK(k(3, 0) == doctest::Approx(k(0, 3)).epsilon(1e-15));
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS(make_blur_decimate_operator(Tensor::filled({2, 2}, 0.25), 2, 8, 8));
    CHECK_THROWS(make_blur_decimate_operator(Tensor::filled({3, 3}, 0.2), 2, 8, 8));
    CHECK_THROWS(make_blur_decimate_operator(bicubic_kernel(2), 3, 8, 8));
  }
}

TEST_CASE("uniform blur") {
  SUBCASE("constant preserved") {
    const Tensor y = make_uniform_blur_operator(5, 10, 12).apply(Tensor::filled({120}, 0.7));
    for (double v : y.data()) CHECK(v == doctest::Approx(0.7).epsilon(1e-14));
  }
  SUBCASE("k = 1 is the identity") {
    RngStream rng(11);
    const Tensor x = sample_gaussian(rng, {64}, 0.0, 1.0);
    CHECK(make_uniform_blur_operator(1, 8, 8).apply(x) == x);
  }
  SUBCASE("9x9 box on a delta") {
    Tensor x = Tensor::zeros({400});
    x[10 * 20 + 10] = 1.0;
    const Tensor y = make_uniform_blur_operator(9, 20, 20).apply(x);
    int hits = 0;
    for (double v : y.data()) {
      if (v != 0.0) {
        ++hits;
        CHECK(v == doctest::Approx(1.0 / 81).epsilon(1e-14));
      }
    }
    CHECK(hits == 81);
  }
  CHECK_THROWS(make_uniform_blur_operator(4, 8, 8));
}

TEST_CASE("sampling operator") {
  SUBCASE("all indices in order is the identity") {
    std::vector<std::size_t> idx(10);
    for (std::size_t i = 0; i < 10; ++i) idx[i] = i;
    RngStream rng(12);
    const Tensor x = sample_gaussian(rng, {10}, 0.0, 1.0);
    CHECK(make_sampling_operator(idx, 10).apply(x) == x);
  }
  SUBCASE("small case") {
    const auto op = make_sampling_operator({0, 2}, 3);
    CHECK(op.apply(Tensor::vector({1, 2, 3})) == Tensor::vector({1, 3}));
    CHECK(op.apply_adjoint(Tensor::vector({1, 3})) == Tensor::vector({1, 0, 3}));
  }
  SUBCASE("P_A is a 0/1 diagonal") {
    const std::vector<std::size_t> idx{3, 9, 0, 31, 17, 22};
    const auto op = make_sampling_operator(idx, 32);
    Tensor e({32});
    for (std::size_t j = 0; j < 32; ++j) {
      e.fill(0.0);
      e[j] = 1.0;
      const Tensor p = project_row_space(op, e);
      const bool sampled = std::find(idx.begin(), idx.end(), j) != idx.end();
      for (std::size_t i = 0; i < 32; ++i) CHECK(p[i] == ((i == j && sampled) ? 1.0 : 0.0));
    }
  }
  SUBCASE("pseudoinverse of orthonormal rows is the adjoint") {
    const auto op = make_sampling_operator({4, 1, 7}, 8);
    const Tensor r = Tensor::vector({0.5, -2.0, 3.25});
    CHECK(pseudoinverse_apply(op, r) == op.apply_adjoint(r));
  }
  CHECK_THROWS(make_sampling_operator({1, 1}, 3));
  CHECK_THROWS(make_sampling_operator({3}, 3));
}

TEST_CASE("pseudoinverse") {
  SUBCASE("2 I") {
    const auto op = make_dense_operator(Tensor({2, 2}, {2, 0, 0, 2}));
    const Tensor x = pseudoinverse_apply(op, Tensor::vector({1.0, -3.0}));
    CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(-1.5).epsilon(1e-14));
  }
  SUBCASE("random Gaussian matrices against dense LU") {
    RngStream rng(13);
    for (auto [m, n] : {std::pair{4, 10}, std::pair{8, 32}, std::pair{16, 64}}) {
      RngStream r = rng.fork(m);
      const auto op = make_gaussian_operator(r, m, n);
      const Eigen::MatrixXd a = oracle::dense(op);
      const Tensor b = sample_gaussian(r, {std::size_t(m)}, 0.0, 1.0);
      CHECK(oracle::rel(oracle::vec(pseudoinverse_apply(op, b)), oracle::pinv_apply(a, oracle::vec(b))) <= 1e-8);
    }
  }
  SUBCASE("CG failure is reported") {
    RngStream rng(14);
    const auto op = make_gaussian_operator(rng, 30, 40);
    const Tensor r = sample_gaussian(rng, {30}, 0.0, 1.0);
    CHECK_THROWS_AS(pseudoinverse_apply(op, r, CgConfig{1e-14, 2}), CgError);
    CgResult info;
    solve_gram(op, r, CgConfig{}, &info);
    CHECK(info.relative_residual <= 1e-10);
  }
}

TEST_CASE("row and null space projections") {
  RngStream rng(15);
  for (const auto& [name, op] : small_operators()) {
    CAPTURE(name);
    if (op.rows() > op.cols()) continue;
    for (int t = 0; t < 100; ++t) {
      const Tensor v = sample_gaussian(rng, {op.cols()}, 0.0, 1.0);
      const Tensor p = project_row_space(op, v);
      const Tensor q = project_null_space(op, v);
      const double vv = dot(v, v);
      CHECK(norm2(p + q - v) <= 1e-15 * norm2(v));
      CHECK(std::abs(dot(p, q)) <= 1e-8 * vv);
      CHECK(std::abs(dot(p, p) + dot(q, q) - vv) <= 1e-8 * vv);
      if (t < 5) CHECK(norm2(project_row_space(op, p) - p) <= 1e-8 * norm2(p) + 1e-300);
    }
  }
}

TEST_CASE("observation synthesis") {
  RngStream rng(16);
  const auto op = make_gaussian_operator(rng, 20, 30);
  const Tensor x = sample_gaussian(rng, {30}, 0.0, 1.0);
  RngStream n1(1);
  CHECK(synthesize_observation(op, x, 0.0, n1) == op.apply(x));

  const auto id = make_identity_operator(10000);
  const Tensor z = Tensor::zeros({10000});
  RngStream n2(2), n3(2);
  const Tensor y = synthesize_observation(id, z, 0.05, n2);
  CHECK(std::abs(dot(y, y) / 10000 / (0.05 * 0.05) - 1.0) < 0.15);
  CHECK(y == synthesize_observation(id, z, 0.05, n3));
  CHECK_THROWS(synthesize_observation(id, z, -1.0, n3));
  CHECK_THROWS_AS(synthesize_observation(op, z, 0.0, n3), ShapeError);
}
