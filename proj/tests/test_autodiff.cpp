#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "jssp/autodiff.hpp"

using namespace jssp;
using namespace jssp::ad;
using T = Tensor<double>;
using M = Matrix<double>;

namespace {

M random_matrix(Rng& rng, Index r, Index c, double lo = -1.0, double hi = 1.0) {
  M m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = lo + (hi - lo) * rng.uniform();
  return m;
}

Mask random_mask(Rng& rng, Index r, Index c) {
  Mask mask(r, c);
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.bernoulli(0.6);
  for (Index row = 0; row < r; ++row) mask(row, static_cast<Index>(rng.below(c))) = true;
  return mask;
}

// Random weighted sum makes every output entry matter to the scalar loss.
T weighted(const T& x, const M& w) { return sum(mul(x, T::constant(w))); }

}  // namespace

TEST_CASE("scalar product rule") {
  auto x = T::parameter(M::Constant(1, 1, 3.0));
  auto y = T::parameter(M::Constant(1, 1, -2.0));
  backward(mul(x, y));
  CHECK(x.grad()(0, 0) == -2.0);
  CHECK(y.grad()(0, 0) == 3.0);
  // A second backward accumulates.
  backward(mul(x, y));
  CHECK(x.grad()(0, 0) == -4.0);
  x.zero_grad();
  CHECK_FALSE(x.has_grad());
}

TEST_CASE("backward requires a scalar loss") {
  auto x = T::parameter(M::Ones(2, 2));
  CHECK_THROWS_AS(backward(relu(x)), ShapeError);
}

TEST_CASE("shape errors") {
  auto a = T::parameter(M::Ones(2, 3));
  auto b = T::parameter(M::Ones(2, 2));
  CHECK_NOTHROW(matmul(b, a));
  CHECK_THROWS_AS(matmul(a, b), ShapeError);
  CHECK_THROWS_AS(add(a, b), ShapeError);
  CHECK_THROWS_AS(concat_cols(a, T::constant(M::Ones(3, 1))), ShapeError);
  CHECK_THROWS_AS(reshape(a, 4, 2), ShapeError);
}

TEST_CASE("masked ops: values and mask errors") {
  M q(1, 2);
  q << 2.5, -1e30;
  Mask mask(1, 2);
  mask << true, false;
  CHECK(logsumexp_masked(T::constant(q), mask).item() == doctest::Approx(2.5));

  M equal = M::Zero(1, 2);
  Mask both = Mask::Constant(1, 2, true);
  const auto p = softmax_masked(T::constant(equal), both).value();
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(0, 1) == doctest::Approx(0.5));

  Mask none = Mask::Constant(1, 2, false);
  CHECK_THROWS_AS(softmax_masked(T::constant(equal), none), MaskError);
  CHECK_THROWS_AS(logsumexp_masked(T::constant(equal), none), MaskError);
  CHECK_THROWS_AS(log_softmax_masked(T::constant(equal), Mask::Constant(2, 2, true)), ShapeError);
}

TEST_CASE("huber closed form") {
  M u(1, 3);
  u << 0.0, 2.0, -0.5;
  const auto h = huber(T::constant(u), 1.0).value();
  CHECK(h(0, 0) == 0.0);
  CHECK(h(0, 1) == doctest::Approx(1.5));
  CHECK(h(0, 2) == doctest::Approx(0.125));
}

TEST_CASE("masked softmax properties on random inputs") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Index r = 1 + static_cast<Index>(rng.below(5));
    const Index c = 1 + static_cast<Index>(rng.below(7));
    auto x = T::parameter(random_matrix(rng, r, c, -20, 20));
    const auto mask = random_mask(rng, r, c);
    const auto w = random_matrix(rng, r, c);
    const auto y = softmax_masked(x, mask);
    for (Index row = 0; row < r; ++row) CHECK(y.value().row(row).sum() == doctest::Approx(1.0).epsilon(1e-6));
    backward(weighted(y, w));
    const auto ls = log_softmax_masked(x, mask);
    backward(weighted(ls, w));
    backward(sum(logsumexp_masked(x, mask)));
    for (Index i = 0; i < x.value().size(); ++i) {
      if (mask.data()[i]) continue;
      CHECK(y.value().data()[i] == 0.0);
      CHECK(ls.value().data()[i] == 0.0);
      CHECK(x.grad().data()[i] == 0.0);
    }
  }
}

TEST_CASE("finite-difference agreement for every op over random shapes") {
  Rng rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const Index r = 1 + static_cast<Index>(rng.below(4));
    const Index c = 1 + static_cast<Index>(rng.below(4));
    const Index k = 1 + static_cast<Index>(rng.below(4));
    auto a = T::parameter(random_matrix(rng, r, c));
    auto b = T::parameter(random_matrix(rng, r, c));
    auto row = T::parameter(random_matrix(rng, 1, c));
    auto col = T::parameter(random_matrix(rng, r, 1));
    auto s = T::parameter(random_matrix(rng, 1, 1));
    auto w = T::parameter(random_matrix(rng, c, k));
    const M wr = random_matrix(rng, r, c);
    const M wk = random_matrix(rng, r, k);
    const auto mask = random_mask(rng, r, c);
    std::vector<Index> seg(r), rows, cols(r);
    for (auto& v : seg) v = static_cast<Index>(rng.below(3));
    for (int i = 0; i < 5; ++i) rows.push_back(static_cast<Index>(rng.below(r)));
    for (auto& v : cols) v = static_cast<Index>(rng.below(c));
    const M w5 = random_matrix(rng, 5, c);
    const M w3 = random_matrix(rng, 3, c);
    const M wcat = random_matrix(rng, r, 2 * c);
    const M wt = random_matrix(rng, c, r);
    const M wcol = random_matrix(rng, r, 1);

    CAPTURE(trial);
    CHECK(gradcheck::max_relative_error({a, b}, [&] { return weighted(add(a, b), wr); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a, row}, [&] { return weighted(add(a, row), wr); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a, col}, [&] { return weighted(sub(a, col), wr); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a, s}, [&] { return weighted(mul(a, s), wr); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a, b}, [&] { return weighted(mul(a, b), wr); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a, row}, [&] { return weighted(mul(a, row), wr); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a, w}, [&] { return weighted(matmul(a, w), wk); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return weighted(scale(add_scalar(a, 0.3), -1.7), wr); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return weighted(relu(a), wr); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return weighted(exp(a), wr); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return mean(a); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return weighted(row_mean(a), wcol); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return weighted(sum_segments(a, seg, 3), w3); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return weighted(gather_rows(a, rows), w5); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return weighted(pick(a, cols), wcol); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a, b}, [&] { return weighted(concat_cols(a, b), wcat); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return weighted(reshape(a, c, r), wt); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return weighted(huber(scale(a, 3.0), 1.0), wr); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return weighted(softmax_masked(scale(a, 4.0), mask), wr); }) < 1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return weighted(log_softmax_masked(scale(a, 4.0), mask), wr); }) <
          1e-4);
    CHECK(gradcheck::max_relative_error({a}, [&] { return weighted(logsumexp_masked(scale(a, 4.0), mask), wcol); }) <
          1e-4);
  }
}

TEST_CASE("finite-difference agreement through a random 3-layer MLP") {
  Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const Index in = 2 + static_cast<Index>(rng.below(4));
    auto x = T::constant(random_matrix(rng, 6, in));
    std::vector<T> params;
    Index width = in;
    for (Index out : {Index(5), Index(4), Index(3)}) {
      params.push_back(T::parameter(random_matrix(rng, width, out)));
      params.push_back(T::parameter(random_matrix(rng, 1, out)));
      width = out;
    }
    const M w = random_matrix(rng, 6, 3);
    auto net = [&] {
      T h = x;
      for (std::size_t l = 0; l < params.size(); l += 2) {
        h = add(matmul(h, params[l]), params[l + 1]);
        if (l + 2 < params.size()) h = relu(h);
      }
      return weighted(h, w);
    };
    CHECK(gradcheck::max_relative_error(params, net) < 1e-4);
  }
}

TEST_CASE("dropout") {
  Rng rng(3);
  auto x = T::parameter(M::Constant(200, 50, 2.0));
  CHECK(dropout(x, 0.4, false, rng).value() == x.value());
  const auto y = dropout(x, 0.4, true, rng);
  // E[y] = x under inverted scaling; 10^4 entries keep the mean within ~0.05.
  CHECK(y.value().mean() == doctest::Approx(2.0).epsilon(0.03));
  int zeros = 0;
  for (Index i = 0; i < y.value().size(); ++i) {
    const double v = y.value().data()[i];
    CHECK((v == 0.0 || v == doctest::Approx(2.0 / 0.6)));
    zeros += v == 0.0;
  }
  CHECK(zeros == doctest::Approx(4000).epsilon(0.06));
  backward(sum(y));
  for (Index i = 0; i < y.value().size(); ++i) CHECK(x.grad().data()[i] == y.value().data()[i] / 2.0);
}

TEST_CASE("no-grad guard records nothing") {
  auto x = T::parameter(M::Ones(2, 2));
  {
    NoGradGuard guard;
    CHECK_FALSE(sum(x).requires_grad());
  }
  CHECK(sum(x).requires_grad());
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    auto p = T::parameter(M::Constant(2, 2, 0.7));
    Adam<double> opt({p}, AdamConfig{});
    backward(scale(sum(p), 0.0));
    opt.step();
    CHECK(p.value() == M::Constant(2, 2, 0.7));
  }
  SUBCASE("first step moves by lr against the gradient sign") {
    // m1 = (1-b1) g, v1 = (1-b2) g^2; bias correction gives m/sqrt(v) = sign(g).
    auto p = T::parameter(M::Zero(1, 2));
    Adam<double> opt({p}, AdamConfig{1e-3, 0.9, 0.999, 1e-8});
    M g(1, 2);
    g << 3.0, -0.25;
    backward(sum(mul(p, T::constant(g))));
    opt.step();
    CHECK(p.value()(0, 0) == doctest::Approx(-1e-3).epsilon(1e-6));
    CHECK(p.value()(0, 1) == doctest::Approx(1e-3).epsilon(1e-4));
  }
  SUBCASE("identical inputs give identical trajectories") {
    auto run = [] {
      Rng rng(5);
      auto p = T::parameter(random_matrix(rng, 3, 3));
      Adam<double> opt({p}, AdamConfig{});
      for (int i = 0; i < 20; ++i) {
        opt.zero_grad();
        backward(sum(huber(matmul(p, p), 1.0)));
        opt.step();
      }
      return M(p.value());
    };
    CHECK(run() == run());
  }
}
