#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <sflab/chart.hpp>
#include <sflab/exterior.hpp>
#include <sflab/form.hpp>
#include <sflab/power_series.hpp>

using namespace sflab;
using Catch::Approx;

namespace {

constexpr double tau = 6.283185307179586476925287;

// scalar 1-form f dx + g dy on a torus
ScalarForm scalar_one_form(const Chart& c,
                           const std::function<cplx(double, double)>& f,
                           const std::function<cplx(double, double)>& g) {
  ScalarForm w(c, 1);
  auto& dx = w.component(1u << 0);
  auto& dy = w.component(1u << 1);
  for (std::size_t node = 0; node < c.n_nodes(); ++node) {
    const auto p = c.point(node);
    dx[node](0, 0) = f(p[0], p[1]);
    dy[node](0, 0) = g(p[0], p[1]);
  }
  return w;
}

}  // namespace

TEST_CASE("wedge is graded anticommutative on one-forms") {
  const Chart c = Chart::torus({24, 24});
  auto a = scalar_one_form(
      c, [](double x, double y) { return cplx(std::sin(x) + y * 0.0, 0.3); },
      [](double x, double) { return cplx(std::cos(x), 0.0); });
  auto b = scalar_one_form(
      c, [](double, double y) { return cplx(y, -1.0); },
      [](double x, double y) { return cplx(std::sin(x + y), 0.2); });
  const auto ab = wedge(a, b);
  const auto ba = wedge(b, a);
  CHECK((ab + ba).norm_inf() < 1e-14);
  CHECK(wedge(a, a).norm_inf() < 1e-14);  // scalar coefficients square to zero
}

TEST_CASE("wedge respects the multi-index ordering convention") {
  const Chart c = Chart::torus({4, 4, 4});
  ScalarForm dx(c, 1), dy(c, 1), dz(c, 1);
  for (auto& v : dx.component(1u << 0)) v(0, 0) = 1.0;
  for (auto& v : dy.component(1u << 1)) v(0, 0) = 1.0;
  for (auto& v : dz.component(1u << 2)) v(0, 0) = 1.0;

  const auto dxy = wedge(dx, dy);
  CHECK(dxy.component(0b011u).front()(0, 0) == cplx(1.0, 0.0));
  const auto dyx = wedge(dy, dx);
  CHECK(dyx.component(0b011u).front()(0, 0) == cplx(-1.0, 0.0));

  // associativity across a three-factor product
  const auto left = wedge(wedge(dx, dy), dz);
  const auto right = wedge(dx, wedge(dy, dz));
  CHECK((left - right).norm_inf() < 1e-15);
  CHECK(left.component(0b111u).front()(0, 0) == cplx(1.0, 0.0));

  const auto zx = wedge(dz, dx);  // dz^dx = -dx^dz
  CHECK(zx.component(0b101u).front()(0, 0) == cplx(-1.0, 0.0));
}

TEST_CASE("matrix wedge keeps factor order") {
  const Chart c = Chart::torus({4, 4});
  GradedMatrixForm a(c, 2), b(c, 2);
  CMat ma(2), mb(2);
  ma(0, 1) = 1.0;  // nilpotent, do not commute
  mb(1, 0) = 1.0;
  for (auto& v : a.component(1u << 0)) v = ma;
  for (auto& v : b.component(1u << 1)) v = mb;
  const auto ab = wedge(a, b);  // (ma mb) dx^dy = E00 dx^dy
  CHECK(ab.component(0b11u).front()(0, 0) == cplx(1.0, 0.0));
  CHECK(ab.component(0b11u).front()(1, 1) == cplx(0.0, 0.0));
  const auto ba = wedge(b, a);  // -(mb ma) dx^dy = -E11 dx^dy
  CHECK(ba.component(0b11u).front()(1, 1) == cplx(-1.0, 0.0));
}

TEST_CASE("exterior derivative is exact on resolved trig content") {
  const Chart c = Chart::torus({48, 48});
  // w = sin(x) dy: dw = cos(x) dx^dy
  auto w = scalar_one_form(
      c, [](double, double) { return cplx(0.0, 0.0); },
      [](double x, double) { return cplx(std::sin(x), 0.0); });
  const auto dw = d(w);
  double worst = 0.0;
  const auto& top = dw.component(0b11u);
  for (std::size_t node = 0; node < c.n_nodes(); ++node) {
    const auto p = c.point(node);
    worst = std::max(worst, std::abs(top[node](0, 0) - cplx(std::cos(p[0]), 0.0)));
  }
  // the central stencil's leading truncation term is h^4/30 * f^(5); for pure
  // sine content that constant is sharp, so pin the error to the model
  const double h = c.axis(0).spacing;
  const double model = std::pow(h, 4) / 30.0;
  CHECK(worst < 1.05 * model);
  CHECK(worst > 0.9 * model);
}

TEST_CASE("one-sided stencils are exact for cubics") {
  const Chart c = Chart::interval(17, 0.0, 1.0);
  ScalarForm f(c, 1);
  auto& vals = f.component(0);
  for (std::size_t node = 0; node < c.n_nodes(); ++node) {
    const double x = c.point(node)[0];
    vals[node](0, 0) = x * x * x - 2.0 * x;
  }
  const auto df = d(f);
  const auto& dx = df.component(1u);
  for (std::size_t node = 0; node < c.n_nodes(); ++node) {
    const double x = c.point(node)[0];
    CHECK(std::abs(dx[node](0, 0) - cplx(3.0 * x * x - 2.0, 0.0)) < 1e-13);
  }
}

TEST_CASE("d of d cancels identically on tensor grids") {
  // difference operators along distinct axes commute, so d(d(w)) survives only
  // if the merge signs are wrong; rough data makes a sign slip loud
  const Chart c = Chart::torus({12, 16, 12});
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ScalarForm w(c, 1);
  auto& f0 = w.component(0u);
  auto& dx = w.component(1u << 0);
  auto& dz = w.component(1u << 2);
  for (std::size_t node = 0; node < c.n_nodes(); ++node) {
    f0[node](0, 0) = cplx(dist(rng), dist(rng));
    dx[node](0, 0) = cplx(dist(rng), dist(rng));
    dz[node](0, 0) = cplx(dist(rng), dist(rng));
  }
  CHECK(d(d(w)).norm_inf() < 1e-12);

  const Chart box({Axis{9, 0.125, false, 0.0}, Axis{9, 0.125, false, 0.0}});
  ScalarForm g(box, 1);
  auto& g0 = g.component(0u);
  for (std::size_t node = 0; node < box.n_nodes(); ++node)
    g0[node](0, 0) = cplx(dist(rng), dist(rng));
  CHECK(d(d(g)).norm_inf() < 1e-10);  // edge stencils amplify roundoff a bit
}

TEST_CASE("top-grade integration uses orientation and periodic weights") {
  const Chart c = Chart::torus({32, 32});
  ScalarForm vol(c, 1);
  for (auto& v : vol.component(0b11u)) v(0, 0) = 1.0;
  const auto r = integrate_top(vol);
  REQUIRE(r.has_top);
  CHECK(r.value.real() == Approx(tau * tau).margin(1e-9));

  const Chart flipped({Axis{32, tau / 32.0, true, 0.0}, Axis{32, tau / 32.0, true, 0.0}}, -1);
  ScalarForm vol2(flipped, 1);
  for (auto& v : vol2.component(0b11u)) v(0, 0) = 1.0;
  CHECK(integrate_top(vol2).value.real() == Approx(-tau * tau).margin(1e-9));

  ScalarForm none(c, 1);
  none.component(1u << 0);  // grade 1 only
  CHECK_FALSE(integrate_top(none).has_top);
}

TEST_CASE("closed-interval quadrature integrates cubics exactly") {
  for (std::size_t n : {9u, 10u}) {  // odd pure Simpson, even with 3/8 tail
    const Chart c = Chart::interval(n, 0.0, 1.0);
    ScalarForm f(c, 1);
    auto& vals = f.component(1u);
    for (std::size_t node = 0; node < c.n_nodes(); ++node) {
      const double x = c.point(node)[0];
      vals[node](0, 0) = x * x * x;
    }
    CHECK(integrate_top(f).value.real() == Approx(0.25).margin(1e-14));
  }
}

TEST_CASE("oscillatory top forms integrate to their mean on the torus") {
  const Chart c = Chart::torus({24, 24});
  ScalarForm f(c, 1);
  auto& vals = f.component(0b11u);
  for (std::size_t node = 0; node < c.n_nodes(); ++node) {
    const auto p = c.point(node);
    vals[node](0, 0) = 1.5 + std::sin(p[0]) * std::sin(p[1]);
  }
  // trapezoid weights are spectrally accurate on periodic axes
  CHECK(integrate_top(f).value.real() == Approx(1.5 * tau * tau).margin(1e-10));
}

TEST_CASE("power series application truncates by grade") {
  const Chart c = Chart::torus({4, 4, 4, 4});
  GradedMatrixForm x(c, 2);
  CMat m(2);
  m(0, 0) = 2.0;
  m(1, 1) = -1.0;
  for (auto& v : x.component(0b0011u)) v = m;
  const auto e = apply_series(CharPowerSeries::exponential(9), x);
  // grade 0: identity; grade 2: x; grade 4: x^2/2 wedge-squares to zero here
  CHECK(e.component(0u).front()(0, 0) == cplx(1.0, 0.0));
  CHECK(e.component(0b0011u).front()(1, 1) == cplx(-1.0, 0.0));
  CHECK(wedge(x, x).norm_inf() < 1e-15);  // dx^dy repeats an axis

  GradedMatrixForm two(c, 2);
  for (auto& v : two.component(0b0011u)) v = m;
  for (auto& v : two.component(0b1100u)) v = m;
  const auto e2 = apply_series(CharPowerSeries::exponential(9), two);
  // top grade picks up x_12 ^ x_34 twice over 2! = m^2 once per ordering
  const auto& t = e2.component(0b1111u);
  CHECK(t.front()(0, 0).real() == Approx(4.0));  // (m^2)_00 = 4
  CHECK(t.front()(1, 1).real() == Approx(1.0));
  CHECK(std::abs(t.front()(0, 0).imag()) < 1e-15);

  GradedMatrixForm odd(c, 2);
  for (auto& v : odd.component(1u << 0)) v = m;
  CHECK_THROWS_AS(apply_series(CharPowerSeries::exponential(9), odd),
                  std::invalid_argument);
}

TEST_CASE("series helpers expose coefficients and derivatives") {
  const auto e = CharPowerSeries::exponential(4);
  CHECK(e.coeff.size() == 5);
  CHECK(e.coeff[3] == Approx(1.0 / 6.0));
  const auto ep = e.derivative();
  CHECK(ep.coeff[2] == Approx(0.5));
  const auto m2 = CharPowerSeries::monomial(2);
  CHECK(m2.coeff.back() == 1.0);
  CHECK(m2.derivative().coeff.back() == 2.0);
}
