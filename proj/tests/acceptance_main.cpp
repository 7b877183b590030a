// Acceptance gate. Each numbered criterion prints exactly one [PASS]/[FAIL]
// line; the exit status is the number of failed criteria. Resolutions and
// tolerances are pinned here on purpose: this file is the contract.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sflab/harness.hpp"

using namespace sflab;

namespace {

using Branches = std::vector<std::function<double(double)>>;

int failures = 0;

void report(int num, bool ok, const std::string& text) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", num,
              text.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename Fn>
void guarded(int num, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(num, false, std::string("unexpected exception: ") + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct SuiteRun {
  std::string name;
  long flow_reference = 0;
  long flow = 0;
  double residual = 0.0;
  bool verified = false;
};

const char* const reference_names[] = {
    "winding-3",      "winding-1",      "winding+1",
    "winding+2",      "winding+3",      "hypersurface-2",
    "hypersurface+0", "hypersurface+1", "hypersurface+3"};

// the nine closed-form scenarios at full resolution, under one global sign
std::vector<SuiteRun> run_reference_suite(int sigma) {
  Conventions conv;
  conv.sigma = sigma;
  conv.calibrated = true;
  VerifyOptions opt;  // 512 nodes, mode cutoff 64, 65 quadrature samples
  std::vector<SuiteRun> out;
  const auto all = standard_scenarios();
  for (const char* name : reference_names) {
    const auto& sc = find_scenario(all, name);
    const auto rep = verify_scenario(sc, conv, opt);
    out.push_back(
        {sc.name, sc.flow_reference, rep.flow, rep.residual, rep.verified});
  }
  return out;
}

long certified_flow(const Branches& br) {
  return spectral_flow(windowed_from_branches(br, 8.0), 0.0, 1.0).flow;
}

// exact derivative of i sin(y + 2z) dx on the identity rank-2 bundle
GradedMatrixForm beta_curvature(const Chart& c) {
  GradedMatrixForm f(c, 2);
  auto& xy = f.component(0b011u);
  auto& xz = f.component(0b101u);
  for (std::size_t node = 0; node < c.n_nodes(); ++node) {
    const auto p = c.point(node);
    const double cs = std::cos(p[1] + 2.0 * p[2]);
    xy[node] = CMat::scalar(2, cplx(0.0, -cs));
    xz[node] = CMat::scalar(2, cplx(0.0, -2.0 * cs));
  }
  return f;
}

std::vector<double> lattice_spectrum(double c, double half_width) {
  std::vector<double> v;
  for (long k = -long(half_width) - 2; k <= long(half_width) + 2; ++k) {
    const double x = double(k) + c;
    if (std::abs(x) <= half_width) v.push_back(x);
  }
  return v;
}

}  // namespace

int main() {
  // one global sign for the whole run, fixed by the calibration scenario
  CalibrationResult cal;
  std::string cal_note;
  try {
    cal = calibrate(256, 32, 33);
  } catch (const std::exception& e) {
    cal_note = e.what();
  }
  const int sigma = cal.decisive ? cal.sigma : -1;

  guarded(1, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto runs = run_reference_suite(sigma);
    const double elapsed = seconds_since(t0);
    double worst = 0.0;
    std::string bad;
    for (const auto& r : runs) {
      worst = std::max(worst, r.residual);
      if (!(r.verified && r.flow == r.flow_reference && r.residual < 1e-6))
        bad += " " + r.name;
    }
    const bool ok = bad.empty() && elapsed < 60.0;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "9 reference scenarios: certified flow equals the geometric "
                  "side as integers (worst residual %.1e, %.1fs)%s%s",
                  worst, elapsed, bad.empty() ? "" : ", failed:", bad.c_str());
    report(1, ok, buf);
  });

  const auto families = random_affine_suite(20240817, 200);

  guarded(2, [&] {
    std::size_t bad = 0;
    for (const auto& f : families) {
      const auto c = aps_index(f.branches, 0.0, 1.0);
      if (certified_flow(f.branches) != c.ind_aps + c.h_b) ++bad;
      if (c.ind_relaxed != c.ind_aps + c.h_b) ++bad;
    }
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "flow = strict index + far-end kernel = relaxed index on "
                  "%zu random families (%zu violations)",
                  families.size(), bad);
    report(2, bad == 0, buf);
  });

  guarded(3, [&] {
    std::size_t bad = 0;
    const auto bump = SmoothMap1D::smoothstep(0.0, 1.0);
    for (const auto& f : families) {
      const long sf = certified_flow(f.branches);
      if (sf != crossing_flow(f.branches, 0.0, 1.0)) ++bad;
      Branches bumped, squared;
      for (const auto& br : f.branches) {
        bumped.push_back([br, &bump](double s) { return br(bump.value(s)); });
        squared.push_back([br](double s) { return br(s * s); });
      }
      if (certified_flow(bumped) != sf) ++bad;
      if (certified_flow(squared) != sf) ++bad;
    }
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "certified flow matches the crossing oracle and survives "
                  "two reparametrizations on %zu families (%zu violations)",
                  families.size(), bad);
    report(3, bad == 0, buf);
  });

  guarded(4, [&] {
    // (a) the two curvature assemblies of a lifted family at 128 t-samples
    const Chart c1 = Chart::circle(96);
    ConnectionFamily dressed(
        c1, 1, 0.0, 1.0,
        [](double s, const std::vector<double>& x) {
          CMat w(1);
          w(0, 0) = cplx(0.0, std::pow(s, 6) * (1.0 + 0.4 * std::cos(x[0])));
          return std::vector<CMat>{w};
        },
        [](double s, const std::vector<double>& x) {
          CMat w(1);
          w(0, 0) =
              cplx(0.0, 6.0 * std::pow(s, 5) * (1.0 + 0.4 * std::cos(x[0])));
          return std::vector<CMat>{w};
        });
    LiftedConnection lc(dressed, 128);
    const double split_err =
        (lc.curvature_structural() - lc.curvature_split()).norm_inf();

    // (b) trace identity for the exponential and square weights
    auto u2 = torus_test_u2({8, 8, 8});
    LiftedConnection lu(u2, 128);
    const cplx scale(0.0, -1.0 / (2.0 * pi_val));
    double trace_err = 0.0;
    for (const auto& q :
         {CharPowerSeries::exponential(9), CharPowerSeries::monomial(2)}) {
      GradedMatrixForm scaled = lu.curvature_split();
      scaled *= scale;
      const auto lhs = mat_trace(apply_series(q, scaled));
      const auto base_part = lu.assemble([&](double t) {
        GradedMatrixForm om = u2.curvature(t);
        om *= scale;
        return mat_trace(apply_series(q, om));
      });
      const auto qp = q.derivative();
      const auto dt_part =
          wedge(axis_identity_form(lu.cylinder(), lu.t_axis(), 1),
                lu.assemble([&](double t) {
                  GradedMatrixForm dso = u2.ds_omega_form(t);
                  dso *= scale;
                  GradedMatrixForm om = u2.curvature(t);
                  om *= scale;
                  return mat_trace(wedge(dso, apply_series(qp, om)));
                }));
      trace_err = std::max(trace_err, (lhs - (base_part + dt_part)).norm_inf());
    }

    // (c) derivative defects shrink sixteenfold per grid doubling
    auto cs_defect = [](std::size_t n) {
      auto fam = torus_test_u2({n, n, n});
      return d(flat_line_odd_form(fam.omega_form(fam.s_end()))).norm_inf();
    };
    auto ch_defect = [](std::size_t n) {
      const Chart c = Chart::torus({n, n, n});
      return d(chern_character(beta_curvature(c))).norm_inf();
    };
    const double cs_ratio = cs_defect(32) / cs_defect(64);
    const double ch_ratio = ch_defect(32) / ch_defect(64);

    const bool ok = split_err < 1e-6 && trace_err < 1e-6 && cs_ratio > 12.0 &&
                    cs_ratio < 20.0 && ch_ratio > 12.0 && ch_ratio < 20.0;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "cylinder curvature split %.1e, trace identity %.1e (both < "
                  "1e-6 at 128 t-samples); derivative defects shrink 16x per "
                  "doubling (%.1f, %.1f)",
                  split_err, trace_err, cs_ratio, ch_ratio);
    report(4, ok, buf);
  });

  guarded(5, [&] {
    auto wind = winding_family(2, 128);
    const double line_err =
        (odd_char_form(wind, 65) -
         flat_line_odd_form(wind.omega_form(wind.s_end())))
            .norm_inf();
    auto u2 = torus_test_u2({24, 24, 24});
    const double torus_err =
        (odd_char_form(u2, 65) - flat_line_odd_form(u2.omega_form(u2.s_end())))
            .norm_inf();

    // Simpson quadrature of the k = 1 transgression moment
    const std::size_t n = 65;
    const double h = 1.0 / double(n - 1);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double s = double(j) * h;
      const double w = (j == 0 || j + 1 == n) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      acc += w * (h / 3.0) * s * (s - 1.0);
    }
    const double moment_err = std::abs(acc - (-1.0 / 6.0));

    const bool ok = line_err < 1e-8 && torus_err < 1e-8 && moment_err < 1e-10;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "closed-form transgression vs quadrature: %.1e (winding), "
                  "%.1e (curved torus), both < 1e-8; first moment off by %.1e",
                  line_err, torus_err, moment_err);
    report(5, ok, buf);
  });

  guarded(6, [&] {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.05, 0.95);
    double oracle_err = 0.0, window_err = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double c = dist(rng);
      const auto closed = xi_affine(c);
      const double eta_oracle = detail::hurwitz_zeta(0.0, c) -
                                detail::hurwitz_zeta(0.0, 1.0 - c);
      oracle_err = std::max(oracle_err, std::abs(closed.eta - eta_oracle));
      const auto est = xi_truncated(lattice_spectrum(c, 1e4), 1e4);
      window_err = std::max(window_err, std::abs(est.xi - closed.xi));
    }

    // -(xi(a) + xi(reversed b)) + h(b) == xi(b) - xi(a), kernels included
    std::uniform_real_distribution<double> off(0.0, 1.0);
    double boundary_err = 0.0;
    for (int i = 0; i < 25; ++i) {
      const double ca = off(rng);
      const double cb = i % 5 == 0 ? 0.0 : off(rng);
      const auto xa = xi_affine(ca), xb = xi_affine(cb);
      const double lhs = -(xa.xi + xi_reflected(xb).xi) + xb.h;
      boundary_err = std::max(boundary_err, std::abs(lhs - (xb.xi - xa.xi)));
    }

    const bool ok =
        oracle_err < 1e-12 && window_err < 1e-3 && boundary_err < 1e-14;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "affine asymmetry vs continuation oracle %.1e (20 offsets); "
                  "windowed estimator off by %.1e (< 1e-3); boundary identity "
                  "off by %.1e",
                  oracle_err, window_err, boundary_err);
    report(6, ok, buf);
  });

  guarded(7, [&] {
    const auto rep = trace_norm_suite(424242, 500);
    const bool ok = rep.all_pass && rep.violations == 0 &&
                    rep.equality_diagnostic_hits == rep.equality_cases;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "trace bound holds on %zu random cases (%zu violations); "
                  "%zu/%zu tight cases trigger the conformal diagnostic",
                  rep.cases, rep.violations, rep.equality_diagnostic_hits,
                  rep.equality_cases);
    report(7, ok, buf);
  });

  guarded(8, [&] {
    std::size_t nontrivial = 0, flipped_failed = 0;
    if (cal.decisive) {
      const auto flipped = run_reference_suite(-sigma);
      for (const auto& r : flipped)
        if (r.flow_reference != 0) {
          ++nontrivial;
          if (!r.verified) ++flipped_failed;
        }
    }
    const bool ok = cal.decisive && nontrivial == 8 &&
                    flipped_failed == nontrivial;
    char buf[320];
    if (cal.decisive)
      std::snprintf(buf, sizeof buf,
                    "calibration is decisive (sign %+d); the flipped sign "
                    "fails %zu/%zu nontrivial scenarios",
                    sigma, flipped_failed, nontrivial);
    else
      std::snprintf(buf, sizeof buf, "calibration failed: %s",
                    cal_note.c_str());
    report(8, ok, buf);
  });

  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures;
}
