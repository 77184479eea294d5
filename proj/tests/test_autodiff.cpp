#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "npsolve/autodiff.hpp"
#include "npsolve/csr.hpp"
#include "npsolve/rng.hpp"

using namespace npsolve;
using namespace npsolve::ad;

namespace {

/// Central-difference check of d(loss)/d(x) for a scalar-valued graph. The
/// builder receives the tape and the leaf and returns the loss tensor.
void check_gradient(Shape shape, const std::vector<double>& x0,
                    const std::function<Tensor(Tape&, Tensor)>& build,
                    double tol = 1e-6) {
  Tape tape;
  Tensor x = tape.input(shape, x0, true);
  Tensor loss = build(tape, x);
  tape.backward(loss);
  const std::vector<double> grad = x.grad();
  REQUIRE(grad.size() == x0.size());

  const double eps = 1e-5;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    auto eval = [&](double shift) {
      Tape t(true);
      std::vector<double> xs = x0;
      xs[i] += shift;
      Tensor xi = t.input(shape, xs, false);
      return build(t, xi).value()[0];
    };
    const double fd = (eval(eps) - eval(-eps)) / (2.0 * eps);
    const double scale = std::max({1.0, std::abs(fd), std::abs(grad[i])});
    CHECK(std::abs(grad[i] - fd) / scale < tol);
  }
}

std::vector<double> random_values(std::size_t n, std::uint64_t seed,
                                  double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("elementwise forward values") {
  Tape t;
  Tensor a = t.input({2, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor b = t.input({2, 2}, {5.0, 6.0, 7.0, 8.0});
  CHECK(t.add(a, b).value() == std::vector<double>{6.0, 8.0, 10.0, 12.0});
  CHECK(t.sub(a, b).value() == std::vector<double>{-4.0, -4.0, -4.0, -4.0});
  CHECK(t.hadamard(a, b).value() == std::vector<double>{5.0, 12.0, 21.0, 32.0});
  CHECK(t.scale(a, -2.0).value() == std::vector<double>{-2.0, -4.0, -6.0, -8.0});
  CHECK(t.relu(t.scale(a, -1.0)).value() ==
        std::vector<double>{0.0, 0.0, 0.0, 0.0});
  CHECK(t.sum_squares(a).value()[0] == 30.0);
  CHECK(t.mean(a).value()[0] == 2.5);
  CHECK_THROWS_AS(t.add(a, t.input({1, 2}, {1.0, 2.0})),
                  std::invalid_argument);
}

TEST_CASE("matmul forward matches a hand product") {
  Tape t;
  Tensor a = t.input({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b = t.input({3, 2}, {7, 8, 9, 10, 11, 12});
  CHECK(t.matmul(a, b).value() == std::vector<double>{58, 64, 139, 154});
  // (A B)^T = B^T A^T exercised through the transpose flags.
  Tensor bt = t.input({2, 3}, {7, 9, 11, 8, 10, 12});
  CHECK(t.matmul(a, bt, false, true).value() ==
        std::vector<double>{58, 64, 139, 154});
  CHECK_THROWS_AS(t.matmul(a, a), std::invalid_argument);
}

TEST_CASE("gradients: matmul in all four transpose modes") {
  const std::vector<double> x0 = random_values(6, 11);
  const std::vector<double> w = random_values(6, 12);

  for (const bool ta : {false, true}) {
    for (const bool tb : {false, true}) {
      // Shapes chosen so each combination is conformable: the product is
      // always (2x3)x(3x2).
      const Shape xs = ta ? Shape{3, 2} : Shape{2, 3};
      const Shape wsh = tb ? Shape{2, 3} : Shape{3, 2};
      check_gradient(xs, x0, [&](Tape& t, Tensor x) {
        Tensor W = t.input(wsh, w, true);
        return t.sum_squares(t.matmul(x, W, ta, tb));
      });
      // Same graph, gradient w.r.t. the right operand.
      check_gradient(wsh, w, [&](Tape& t, Tensor W) {
        Tensor x = t.input(xs, x0, true);
        return t.sum_squares(t.matmul(x, W, ta, tb));
      });
    }
  }
}

TEST_CASE("gradients: elementwise chain") {
  const std::vector<double> x0 = random_values(8, 21, 0.2, 1.5);
  check_gradient({4, 2}, x0, [](Tape& t, Tensor x) {
    Tensor y = t.hadamard(x, x);
    Tensor z = t.sub(t.scale(y, 0.5), x);
    return t.sum_squares(z);
  });
}

TEST_CASE("gradients: shared subexpressions accumulate") {
  const std::vector<double> x0 = random_values(6, 31, 0.1, 1.0);
  check_gradient({6, 1}, x0, [](Tape& t, Tensor x) {
    Tensor y = t.hadamard(x, x);
    // x feeds both the square and the sum, so its gradient has two paths.
    return t.sum_squares(t.add(y, x));
  });
}

TEST_CASE("gradients: scale_by a learned scalar") {
  const std::vector<double> s0 = {0.7};
  check_gradient({1, 1}, s0, [](Tape& t, Tensor s) {
    Tensor x = t.input({3, 1}, {1.0, -2.0, 0.5}, false);
    return t.sum_squares(t.scale_by(x, s));
  });
  const std::vector<double> x0 = random_values(3, 41);
  check_gradient({3, 1}, x0, [](Tape& t, Tensor x) {
    Tensor s = t.input({1, 1}, {0.7}, true);
    return t.sum_squares(t.scale_by(x, s));
  });
}

TEST_CASE("gradients: sparse matrix columns product") {
  const CsrMatrix A = CsrMatrix::from_triplets(
      3, 3,
      {{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}, {1, 2, -1.0},
       {2, 1, -1.0}, {2, 2, 2.0}});
  const std::vector<double> x0 = random_values(6, 51);
  check_gradient({3, 2}, x0, [&](Tape& t, Tensor x) {
    return t.sum_squares(t.spmv_cols(A, x));
  });
}

TEST_CASE("rowwise softmax rows sum to one and differentiate") {
  Tape t;
  Tensor x = t.input({2, 3}, {0.1, 1.2, -0.4, 2.0, 2.0, 2.0});
  const std::vector<double> s = t.rowwise_softmax(x, 2.0).value();
  CHECK(s[0] + s[1] + s[2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s[3] == doctest::Approx(1.0 / 3.0));
  CHECK(s[4] == doctest::Approx(1.0 / 3.0));

  const std::vector<double> x0 = random_values(6, 61);
  check_gradient({2, 3}, x0, [](Tape& tt, Tensor xx) {
    Tensor w = tt.input({2, 3}, {1.0, -2.0, 0.5, 0.3, 1.1, -0.7}, false);
    return tt.sum_squares(tt.hadamard(tt.rowwise_softmax(xx, 1.7), w));
  });
}

TEST_CASE("masked column softmax normalizes supports and differentiates") {
  // 4 rows, 2 columns; column 0 supports rows {0,1}, column 1 rows {2,3}.
  const std::vector<std::uint8_t> mask = {1, 0, 1, 0, 0, 1, 0, 1};
  Tape t;
  Tensor x = t.input({4, 2}, {1.0, 9.0, 2.0, 9.0, 9.0, -1.0, 9.0, 3.0});
  const std::vector<double> e = t.masked_colwise_softmax(x, mask).value();
  CHECK(e[1] == 0.0);
  CHECK(e[7] != 0.0);
  CHECK(e[0] + e[2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e[5] + e[7] == doctest::Approx(1.0).epsilon(1e-14));
  // The masked-out logits (the 9s) must not influence the result.
  CHECK(e[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + std::exp(2.0))));

  const std::vector<double> x0 = random_values(8, 71);
  check_gradient({4, 2}, x0, [&](Tape& tt, Tensor xx) {
    Tensor w = tt.input({4, 2}, random_values(8, 72), false);
    return tt.sum_squares(tt.hadamard(tt.masked_colwise_softmax(xx, mask), w));
  });

  const std::vector<std::uint8_t> empty_col = {1, 0, 1, 0, 1, 0, 1, 0};
  Tape t2;
  Tensor y = t2.input({4, 2}, random_values(8, 73));
  CHECK_THROWS_AS(t2.masked_colwise_softmax(y, empty_col),
                  std::invalid_argument);
}

TEST_CASE("gradients: relu away from the kink") {
  const std::vector<double> x0 = {0.5, -0.7, 1.2, -2.0, 0.9, -0.1};
  check_gradient({6, 1}, x0, [](Tape& t, Tensor x) {
    return t.sum_squares(t.relu(x));
  });
}

TEST_CASE("gradients: concat and slice route to the right blocks") {
  const std::vector<double> a0 = random_values(4, 81);
  check_gradient({2, 2}, a0, [](Tape& t, Tensor a) {
    Tensor b = t.input({2, 3}, random_values(6, 82), true);
    Tensor cat = t.concat_cols(a, b);  // 2x5
    Tensor left = t.slice_cols(cat, 0, 2);
    Tensor right = t.slice_cols(cat, 3, 5);
    return t.sum_squares(t.concat_cols(left, right));
  });
}

TEST_CASE("gradients: row-vector bias broadcast") {
  const std::vector<double> b0 = {0.3, -0.6};
  check_gradient({1, 2}, b0, [](Tape& t, Tensor bias) {
    Tensor x = t.input({3, 2}, random_values(6, 91), true);
    return t.sum_squares(t.add_rowvec(x, bias));
  });
}

TEST_CASE("gradients: mean") {
  const std::vector<double> x0 = random_values(5, 101);
  check_gradient({5, 1}, x0, [](Tape& t, Tensor x) {
    Tensor m = t.mean(t.hadamard(x, x));
    return m;
  });
}

TEST_CASE("a non-recording tape evaluates forward and refuses backward") {
  Tape t(false);
  Tensor x = t.input({2, 1}, {3.0, 4.0}, true);
  Tensor loss = t.sum_squares(x);
  CHECK(loss.value()[0] == 25.0);
  CHECK_THROWS_AS(t.backward(loss), std::logic_error);
}

TEST_CASE("recorded and non-recorded forwards agree bitwise") {
  const std::vector<double> x0 = random_values(6, 111);
  auto run = [&](bool recording) {
    Tape t(recording);
    Tensor x = t.input({3, 2}, x0, recording);
    Tensor w = t.input({2, 2}, {0.3, -1.0, 0.25, 0.8}, recording);
    return t.rowwise_softmax(t.matmul(x, w), 1.4).value();
  };
  CHECK(run(true) == run(false));
}

TEST_CASE("backward is one-shot per tape") {
  Tape t;
  Tensor x = t.input({2, 1}, {1.0, 2.0}, true);
  Tensor loss = t.sum_squares(x);
  t.backward(loss);
  CHECK(x.grad() == std::vector<double>{2.0, 4.0});
  CHECK_THROWS_AS(t.backward(loss), std::logic_error);
}

TEST_CASE("backward rejects non-scalar or detached losses") {
  Tape t;
  Tensor x = t.input({2, 1}, {1.0, 2.0}, true);
  CHECK_THROWS_AS(t.backward(x), std::invalid_argument);
  Tensor c = t.input({1, 1}, {5.0}, false);
  CHECK_THROWS_AS(t.backward(c), std::invalid_argument);
}

TEST_CASE("non-finite gradients abort the sweep") {
  Tape t;
  Tensor x = t.input({1, 1}, {1e200}, true);
  Tensor y = t.hadamard(x, x);       // 1e400 overflows to inf
  Tensor loss = t.sum_squares(y);
  CHECK_THROWS_AS(t.backward(loss), std::runtime_error);
}

TEST_CASE("input validates the value count") {
  Tape t;
  CHECK_THROWS_AS(t.input({2, 2}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("adam minimizes a quadratic and is deterministic") {
  auto run = [] {
    std::vector<double> p = {0.0};
    AdamState state(1);
    AdamConfig cfg;
    cfg.lr = 0.05;
    for (int i = 0; i < 2000; ++i) {
      const std::vector<double> g = {2.0 * (p[0] - 3.0)};
      state.step(p, g, cfg);
    }
    return p[0];
  };
  const double a = run();
  CHECK(a == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(a == run());
}

TEST_CASE("adam's first step has near-unit scaled magnitude") {
  // With bias correction, the first update is lr * g/|g| regardless of the
  // gradient scale (up to eps).
  std::vector<double> p = {10.0};
  AdamState state(1);
  AdamConfig cfg;
  const std::vector<double> g = {1e-4};
  state.step(p, g, cfg);
  CHECK(10.0 - p[0] == doctest::Approx(cfg.lr).epsilon(1e-3));
}
