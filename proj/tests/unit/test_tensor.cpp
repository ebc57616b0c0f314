#include <doctest.h>

#include <cmath>
#include <vector>

#include "iagan/adam.hpp"
#include "iagan/errors.hpp"
#include "iagan/rng.hpp"
#include "iagan/tensor.hpp"

using namespace iagan;

TEST_CASE("tensor shapes and arithmetic") {
  Tensor a = Tensor::filled({2, 3}, 1.5);
  CHECK(a.size() == 6);
  CHECK(a(1, 2) == 1.5);
  Tensor b = Tensor::filled({2, 3}, 0.5);
  CHECK((a + b) == Tensor::filled({2, 3}, 2.0));
  CHECK((a - b) == Tensor::filled({2, 3}, 1.0));
  CHECK((2.0 * b) == Tensor::filled({2, 3}, 1.0));

  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>(3)), ShapeError);
  // no broadcasting, not even between equal-size tensors of different shape
  CHECK_THROWS_AS(a += Tensor::filled({3, 2}, 1.0), ShapeError);
  CHECK_THROWS_AS(a.reshaped({4}), ShapeError);
  CHECK(a.reshaped({6}).shape() == Shape{6});
}

TEST_CASE("sample_gaussian") {
  SUBCASE("std 0 is the mean") {
    RngStream rng(3);
    CHECK(sample_gaussian(rng, {4}, 3.0, 0.0) == Tensor::filled({4}, 3.0));
  }
  SUBCASE("moments of 1e5 draws") {
    RngStream rng(11);
    const Tensor s = sample_gaussian(rng, {100000}, 0.0, 1.0);
    double mean = 0.0;
    for (double v : s.data()) mean += v;
    mean /= 1e5;
    double var = 0.0;
    for (double v : s.data()) var += (v - mean) * (v - mean);
    var /= 1e5 - 1;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.02);
  }
  SUBCASE("same seed, same bits") {
    RngStream r1(42), r2(42);
    CHECK(sample_gaussian(r1, {257}, 0.0, 1.0) == sample_gaussian(r2, {257}, 0.0, 1.0));
  }
  SUBCASE("bad inputs") {
    RngStream rng(1);
    CHECK_THROWS_AS(sample_gaussian(rng, {3, 0}, 0.0, 1.0), ShapeError);
    CHECK_THROWS(sample_gaussian(rng, {3}, 0.0, -1.0));
  }
}

TEST_CASE("rng forks are independent of consumption order") {
  RngStream parent(7);
  const RngStream a1 = parent.fork("a");
  parent.next_u64();
  parent.normal();
  const RngStream a2 = parent.fork("a");
  CHECK(a1.key() == a2.key());
  CHECK(parent.fork("a").key() != parent.fork("b").key());
  CHECK(parent.fork(0).key() != parent.fork(1).key());

  RngStream x = a1, y = a2;
  for (int i = 0; i < 100; ++i) CHECK(x.next_u64() == y.next_u64());

  RngStream u(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(u.below(7) < 7);
  }
}

namespace {

// Kingma & Ba, written out for one scalar.
struct ScalarAdam {
  double m = 0, v = 0;
  int t = 0;
  double step(double p, double g, double lr) {
    ++t;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    return p - lr * mh / (std::sqrt(vh) + 1e-8);
  }
};

}  // namespace

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves params alone") {
    Tensor p = Tensor::vector({1.0, -2.0, 3.0});
    const Tensor p0 = p;
    AdamState s(p.shape());
    for (int i = 0; i < 5; ++i) s.step(p, Tensor::zeros({3}), 0.1);
    CHECK(p == p0);
  }
  SUBCASE("first step is about -lr sign(g)") {
    for (double g : {3.0, -0.25, 1e-3}) {
      Tensor p = Tensor::vector({0.0});
      AdamState s(p.shape());
      s.step(p, Tensor::vector({g}), 0.01);
      CHECK(p[0] == doctest::Approx(-0.01 * g / (std::abs(g) + 1e-8)).epsilon(1e-12));
    }
  }
  SUBCASE("matches a scalar reference for 10 steps") {
    Tensor p = Tensor::vector({0.7});
    AdamState s(p.shape());
    ScalarAdam ref;
    double q = 0.7;
    for (int i = 0; i < 10; ++i) {
      s.step(p, Tensor::vector({0.3}), 0.05);
      q = ref.step(q, 0.3, 0.05);
      CHECK(std::abs(p[0] - q) <= 1e-12 * std::abs(q));
    }
    CHECK(s.steps() == 10);
  }
  SUBCASE("varying gradients against the reference") {
    Tensor p = Tensor::vector({0.2, -1.0});
    AdamState s(p.shape());
    ScalarAdam r0, r1;
    double q0 = 0.2, q1 = -1.0;
    for (int i = 0; i < 25; ++i) {
      const double g0 = std::sin(i + 1.0), g1 = 2.0 * q1;
      s.step(p, Tensor::vector({g0, g1}), 0.01);
      q0 = r0.step(q0, g0, 0.01);
      q1 = r1.step(q1, g1, 0.01);
    }
    CHECK(p[0] == doctest::Approx(q0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(q1).epsilon(1e-12));
  }
  SUBCASE("constant gradient keeps every update within lr") {
    Tensor p = Tensor::vector({0.0, 0.0});
    AdamState s(p.shape());
    for (int i = 0; i < 50; ++i) {
      const Tensor before = p;
      s.step(p, Tensor::vector({5.0, -1e-4}), 0.02);
      for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(p[k] - before[k]) <= 0.02 * (1.0 + 1e-9));
    }
  }
  SUBCASE("non-finite gradient is refused without side effects") {
    Tensor p = Tensor::vector({1.0});
    AdamState s(p.shape());
    CHECK_THROWS_AS(s.step(p, Tensor::vector({NAN}), 0.1), NonFiniteError);
    CHECK(p[0] == 1.0);
    CHECK(s.steps() == 0);
    CHECK_THROWS_AS(s.step(p, Tensor::vector({1.0, 2.0}), 0.1), ShapeError);
  }
}

TEST_CASE("reductions") {
  RngStream rng(9);
  const Tensor x = sample_gaussian(rng, {1000}, 0.0, 1.0);
  const double n = norm2(x);
  CHECK(std::abs(dot(x, x) - n * n) <= 1e-12 * n * n);

  Tensor y = sample_gaussian(rng, {1000}, 0.0, 1.0);
  const Tensor y0 = y;
  axpy(0.0, x, y);
  CHECK(y == y0);
  axpy(2.0, x, y);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == y0[i] + 2.0 * x[i]);

  SUBCASE("dot against compensated summation on 1e6 entries") {
    RngStream r(10);
    const Tensor a = sample_gaussian(r, {1000000}, 0.0, 1.0);
    const Tensor b = sample_gaussian(r, {1000000}, 1.0, 3.0);
    double sum = 0.0, c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double term = a[i] * b[i] - c;
      const double t = sum + term;
      c = (t - sum) - term;
      sum = t;
    }
    CHECK(std::abs(dot(a, b) - sum) <= 1e-10 * std::abs(sum));
  }

  CHECK(norm2(Tensor::filled({4}, 1e200)) == doctest::Approx(2e200));
  CHECK(norm2(Tensor::zeros({3})) == 0.0);
  CHECK_THROWS_AS(dot(Tensor::zeros({3}), Tensor::zeros({4})), ShapeError);
}
