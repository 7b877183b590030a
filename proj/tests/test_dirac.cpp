#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include <sflab/dirac.hpp>
#include <sflab/families.hpp>

using namespace sflab;
using Catch::Approx;

namespace {

// reference mode ladder sigma * (k + offset) for |k| <= cutoff
std::vector<double> ladder(int sigma, int cutoff, double offset) {
  std::vector<double> v;
  for (int k = -cutoff; k <= cutoff; ++k)
    v.push_back(double(sigma) * (double(k) + offset));
  std::sort(v.begin(), v.end());
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("winding twists shift the mode ladder linearly") {
  auto fam = winding_family(2, 128);
  for (int sigma : {-1, +1}) {
    CircleDiracFamily dirac(fam, 16, 0.0, sigma);
    for (double s : {0.0, 0.3, 0.75}) {
      const auto ev = dirac.eigenvalues(s);
      CHECK(max_abs_diff(ev, ladder(sigma, 16, 2.0 * s)) < 1e-10);
    }
  }
}

TEST_CASE("the sign convention is visible in the spectrum") {
  auto fam = winding_family(1, 128);
  CircleDiracFamily minus(fam, 16, 0.0, -1), plus(fam, 16, 0.0, +1);
  const auto em = minus.eigenvalues(0.3), ep = plus.eigenvalues(0.3);
  // {-(k + 0.3)} and {+(k + 0.3)} are different sets
  CHECK(max_abs_diff(em, ladder(-1, 16, 0.3)) < 1e-10);
  CHECK(max_abs_diff(ep, ladder(+1, 16, 0.3)) < 1e-10);
  CHECK(std::abs(em.front() - ep.front()) > 0.5);
}

TEST_CASE("half-integer spin offset produces the shifted ladder") {
  auto fam = hypersurface_family(3, 128);
  CircleDiracFamily dirac(fam, 16, 0.5, -1);
  for (double s : {0.0, 0.4, 1.0}) {
    std::vector<double> want;
    for (int k = -16; k <= 16; ++k)
      want.push_back(-((double(k) + 0.5) - (s - 0.5) * 3.0));
    std::sort(want.begin(), want.end());
    CHECK(max_abs_diff(dirac.eigenvalues(s), want) < 1e-10);
  }
}

TEST_CASE("radius scales the spectrum inversely") {
  auto unit = winding_family(1, 128);
  auto doubled = winding_family(1, 128, 0.0, 1.0, 2.0);
  CircleDiracFamily d1(unit, 12, 0.0, -1), d2(doubled, 12, 0.0, -1);
  const auto e1 = d1.eigenvalues(0.25), e2 = d2.eigenvalues(0.25);
  CHECK(max_abs_diff(e2, [&] {
          auto v = e1;
          for (auto& x : v) x *= 0.5;
          return v;
        }()) < 1e-10);
  CHECK(d2.trust_half_width() == Approx(0.5 * d1.trust_half_width()));
}

TEST_CASE("gauge dressing leaves the spectrum unchanged") {
  // the dressed twist is a gauge transform of the plain one, but its matrix
  // picks up genuine off-diagonal mode coupling
  auto plain = winding_family(1, 256);
  auto dressed = dressed_winding_family(1, 0.4, 256);
  CircleDiracFamily dp(plain, 24, 0.0, -1), dd(dressed, 24, 0.0, -1);

  const auto m = dd.matrix(0.6);
  double off = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.rows(); ++j)
      if (i != j) off = std::max(off, std::abs(m(i, j)));
  CHECK(off > 0.05);

  // compare away from the cutoff edge, where truncation bites the dressed one
  const auto wp = dp.window(0.6, 8.0).values;
  const auto wd = dd.window(0.6, 8.0).values;
  CHECK(max_abs_diff(wp, wd) < 1e-8);
}

TEST_CASE("diagonal multi-rank families stack their ladders") {
  auto fam = winding_family_diag({2, 0, 0}, 256);
  CircleDiracFamily dirac(fam, 12, 0.0, -1);
  const double s = 0.35;
  std::vector<double> want;
  for (int k = -12; k <= 12; ++k) {
    want.push_back(-(double(k) + 2.0 * s));
    want.push_back(-double(k));
    want.push_back(-double(k));
  }
  std::sort(want.begin(), want.end());
  CHECK(max_abs_diff(dirac.eigenvalues(s), want) < 1e-10);
  CHECK(dirac.matrix_dim() == 75);
}

TEST_CASE("assembled matrices are hermitian by construction") {
  auto fam = dressed_winding_family(2, 0.7, 256);
  CircleDiracFamily dirac(fam, 20, 0.0, -1);
  CHECK(hermiticity_defect(dirac.matrix(0.41)) < 1e-14);
}

TEST_CASE("construction rejects bad inputs") {
  auto fam = winding_family(1, 64);
  CHECK_THROWS_AS(CircleDiracFamily(fam, 0, 0.0, -1), std::invalid_argument);
  CHECK_THROWS_AS(CircleDiracFamily(fam, 8, 0.3, -1), std::invalid_argument);
  CHECK_THROWS_AS(CircleDiracFamily(fam, 8, 0.0, 2), std::invalid_argument);
  // aliasing: 64 nodes cannot carry cutoff 16 (needs 4*16+1)
  CHECK_THROWS_AS(CircleDiracFamily(fam, 16, 0.0, -1), std::invalid_argument);

  auto torus = torus_test_u2({4, 4, 4});
  CHECK_THROWS_AS(CircleDiracFamily(torus, 8, 0.0, -1), std::invalid_argument);
}

TEST_CASE("windows respect the trust region") {
  auto fam = winding_family(1, 256);
  CircleDiracFamily dirac(fam, 16, 0.0, -1);
  CHECK(dirac.trust_half_width() == Approx(8.0));
  CHECK_THROWS_AS(dirac.window(0.0, 9.0), std::invalid_argument);
  CHECK_THROWS_AS(dirac.windowed(9.0), std::invalid_argument);
  const auto w = dirac.window(0.2, 5.0);
  REQUIRE(!w.values.empty());
  CHECK(std::abs(w.values.front()) <= 5.0);
  CHECK(std::abs(w.values.back()) <= 5.0);
  CHECK(std::is_sorted(w.values.begin(), w.values.end()));
}

TEST_CASE("kernel counting refuses the ambiguous shell") {
  auto fam = winding_family(1, 256);
  CircleDiracFamily dirac(fam, 8, 0.0, -1);
  CHECK(dirac.kernel_dim(0.0) == 1);   // zero mode at s = 0
  CHECK(dirac.kernel_dim(0.5) == 0);   // half-step: gap 1/2 everywhere
  CHECK_THROWS_AS(dirac.kernel_dim(1.5e-8), std::runtime_error);
}

TEST_CASE("spectrum slices cluster degenerate values") {
  SpectrumSlice slice{0.0, {-1.0, -1.0 + 1e-12, 0.5, 2.0, 2.0, 2.0}};
  const auto cl = slice.clustered(1e-9);
  REQUIRE(cl.size() == 3);
  CHECK(cl[0].second == 2);
  CHECK(cl[1].second == 1);
  CHECK(cl[2].second == 3);
  CHECK(cl[2].first == Approx(2.0));
}
