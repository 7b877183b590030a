#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include <sflab/harness.hpp>

using namespace sflab;
using Catch::Approx;

namespace {

using Branches = std::vector<std::function<double(double)>>;

}  // namespace

TEST_CASE("single-branch bookkeeping") {
  Branches through{[](double s) { return s - 0.5; }};
  auto c = aps_index(through, 0.0, 1.0);
  CHECK(c.kernel == 1);
  CHECK(c.cokernel == 0);
  CHECK(c.ind_aps == 1);
  CHECK(c.ind_relaxed == 1);
  CHECK(c.h_a == 0);
  CHECK(c.h_b == 0);

  Branches back{[](double s) { return 0.5 - s; }};
  c = aps_index(back, 0.0, 1.0);
  CHECK(c.kernel == 0);
  CHECK(c.cokernel == 1);
  CHECK(c.ind_aps == -1);
  CHECK(c.ind_relaxed == -1);

  Branches above{[](double) { return 2.0; }};
  c = aps_index(above, 0.0, 1.0);
  CHECK(c.ind_aps == 0);
  CHECK(c.ind_relaxed == 0);

  // a branch pinned at zero is a bounded constant mode: cokernel under the
  // strict condition, absorbed by the relaxed one
  Branches pinned{[](double) { return 0.0; }};
  c = aps_index(pinned, 0.0, 1.0);
  CHECK(c.h_a == 1);
  CHECK(c.h_b == 1);
  CHECK(c.cokernel == 1);
  CHECK(c.ind_aps == -1);
  CHECK(c.ind_relaxed == 0);
}

TEST_CASE("endpoint kernels shift the relaxed count") {
  // arrives at zero: h_b = 1, no solution under the strict condition
  Branches arrive{[](double s) { return s - 1.0; }};
  auto c = aps_index(arrive, 0.0, 1.0);
  CHECK(c.h_b == 1);
  CHECK(c.kernel == 0);
  CHECK(c.cokernel == 0);
  CHECK(c.ind_aps == 0);
  CHECK(c.ind_relaxed == 1);

  // leaves from zero
  Branches leave{[](double s) { return s; }};
  c = aps_index(leave, 0.0, 1.0);
  CHECK(c.h_a == 1);
  CHECK(c.ind_aps == 0);
  CHECK(c.ind_relaxed == 0);
  CHECK(c.cokernel == 0);

  Branches sink{[](double s) { return -s; }};
  c = aps_index(sink, 0.0, 1.0);
  CHECK(c.h_a == 1);
  CHECK(c.cokernel == 1);
  CHECK(c.ind_aps == -1);
  CHECK(c.ind_relaxed == -1);
}

TEST_CASE("relaxed index equals flow and strict index plus far kernel") {
  const auto suite = random_affine_suite(20240817, 200);
  for (const auto& fam : suite) {
    const auto c = aps_index(fam.branches, 0.0, 1.0);
    const long flow = crossing_flow(fam.branches, 0.0, 1.0);
    REQUIRE(c.ind_relaxed == flow);
    REQUIRE(c.ind_relaxed == c.ind_aps + c.h_b);
  }
}

TEST_CASE("certified flow feeds the same identity") {
  const auto suite = random_affine_suite(5150, 25);
  for (const auto& fam : suite) {
    const auto c = aps_index(fam.branches, 0.0, 1.0);
    const long flow =
        spectral_flow(windowed_from_branches(fam.branches, 8.0), 0.0, 1.0).flow;
    REQUIRE(flow == c.ind_aps + c.h_b);
  }
}

TEST_CASE("orientation reversal negates flow but not the index naively") {
  const auto suite = random_affine_suite(8675309, 200);
  for (const auto& fam : suite) {
    const auto rev = reversed_branches(fam.branches, 0.0, 1.0);
    const long f = crossing_flow(fam.branches, 0.0, 1.0);
    const long fr = crossing_flow(rev, 0.0, 1.0);
    REQUIRE(fr == -f);

    const auto c = aps_index(fam.branches, 0.0, 1.0);
    const auto cr = aps_index(rev, 0.0, 1.0);
    // endpoint kernels swap roles and are charged to the strict index
    REQUIRE(cr.ind_aps == -c.ind_aps - c.h_a - c.h_b);
    REQUIRE(cr.h_a == c.h_b);
    REQUIRE(cr.h_b == c.h_a);
  }
}

TEST_CASE("a worked reversal with an endpoint kernel") {
  // lambda(s) = s - 1 arrives at zero: flow +1 under the closed convention.
  // reversed, lambda(t) = -t leaves zero downward: flow -1, strict index -1.
  Branches arrive{[](double s) { return s - 1.0; }};
  const auto rev = reversed_branches(arrive, 0.0, 1.0);
  CHECK(crossing_flow(arrive, 0.0, 1.0) == 1);
  CHECK(crossing_flow(rev, 0.0, 1.0) == -1);
  const auto c = aps_index(arrive, 0.0, 1.0);
  const auto cr = aps_index(rev, 0.0, 1.0);
  CHECK(c.ind_aps == 0);
  CHECK(cr.ind_aps == -1);
  CHECK(cr.ind_aps == -c.ind_aps - c.h_a - c.h_b);
}

TEST_CASE("interval validation") {
  Branches one{[](double s) { return s; }};
  CHECK_THROWS_AS(aps_index(one, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(aps_index(one, 2.0, 1.0), std::invalid_argument);
}
