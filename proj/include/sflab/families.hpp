#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "connection.hpp"
#include "linalg.hpp"

namespace sflab {

// group-translation form on a circle chart: value i * (2 pi / length), the
// logarithmic derivative of theta -> e^{i nu theta}
inline ConnectionFamily unitary_circle_line(const Chart& group_chart,
                                            double s_a = 0.0, double s_b = 1.0) {
  if (group_chart.dim() != 1 || !group_chart.axis(0).periodic)
    throw std::invalid_argument("unitary_circle_line: need a circle chart");
  const double nu = 2.0 * 3.141592653589793238462643 / group_chart.axis(0).length();
  return ConnectionFamily(
      group_chart, 1, s_a, s_b,
      [nu](double s, const std::vector<double>&) {
        return std::vector<CMat>{CMat::scalar(1, cplx(0.0, s * nu))};
      },
      [nu](double, const std::vector<double>&) {
        return std::vector<CMat>{CMat::scalar(1, cplx(0.0, nu))};
      },
      [](double, const std::vector<double>&) { return std::vector<CMat>{}; });
}

inline constexpr double two_pi_fam = 6.283185307179586476925287;

// line bundle family over the circle whose twist winds m times: the straight
// path from the trivial connection to the pulled-back translation form
inline ConnectionFamily winding_family(int m, std::size_t nodes,
                                       double s_a = 0.0, double s_b = 1.0,
                                       double radius = 1.0) {
  const Chart base = Chart::circle(nodes, two_pi_fam * radius);
  const Chart group = Chart::circle(nodes, two_pi_fam * radius);
  return unitary_circle_line(group, s_a, s_b)
      .pullback(ChartMap::circle_cover(base, group, m));
}

// diagonal multi-line variant: component j winds ms[j] times
inline ConnectionFamily winding_family_diag(std::vector<int> ms,
                                            std::size_t nodes,
                                            double s_a = 0.0, double s_b = 1.0,
                                            double radius = 1.0) {
  const Chart base = Chart::circle(nodes, two_pi_fam * radius);
  const double nu = 1.0 / radius;
  const std::size_t n = ms.size();
  auto diag = [ms, n](cplx unit) {
    CMat w(n);
    for (std::size_t j = 0; j < n; ++j) w(j, j) = double(ms[j]) * unit;
    return w;
  };
  return ConnectionFamily(
      base, n, s_a, s_b,
      [diag, nu](double s, const std::vector<double>&) {
        return std::vector<CMat>{diag(cplx(0.0, s * nu))};
      },
      [diag, nu](double, const std::vector<double>&) {
        return std::vector<CMat>{diag(cplx(0.0, nu))};
      },
      [](double, const std::vector<double>&) { return std::vector<CMat>{}; });
}

// restriction family of a degree-d map between circles: twist (1/2 - s) * d,
// paired with the antiperiodic (spin offset 1/2) mode ladder
inline ConnectionFamily hypersurface_family(int d, std::size_t nodes,
                                            double s_a = 0.0, double s_b = 1.0,
                                            double radius = 1.0) {
  const Chart base = Chart::circle(nodes, two_pi_fam * radius);
  const Chart section = Chart::circle(nodes, two_pi_fam * radius);
  const double nu = 1.0 / radius;
  ConnectionFamily on_section(
      section, 1, s_a, s_b,
      [nu](double s, const std::vector<double>&) {
        return std::vector<CMat>{CMat::scalar(1, cplx(0.0, (0.5 - s) * nu))};
      },
      [nu](double, const std::vector<double>&) {
        return std::vector<CMat>{CMat::scalar(1, cplx(0.0, -nu))};
      },
      [](double, const std::vector<double>&) { return std::vector<CMat>{}; });
  return on_section.pullback(ChartMap::circle_cover(base, section, d));
}

// winding twist modulated along the fibre; gauge-equivalent to the plain
// winding family, so its spectrum must match despite the non-diagonal modes
inline ConnectionFamily dressed_winding_family(int m, double amp,
                                               std::size_t nodes,
                                               double s_a = 0.0,
                                               double s_b = 1.0,
                                               double radius = 1.0) {
  const Chart base = Chart::circle(nodes, two_pi_fam * radius);
  const double nu = 1.0 / radius;
  return ConnectionFamily(
      base, 1, s_a, s_b,
      [m, amp, nu](double s, const std::vector<double>& x) {
        return std::vector<CMat>{CMat::scalar(
            1,
            cplx(0.0, s * nu * (double(m) + amp * std::cos(nu * x[0]))))};
      },
      [m, amp, nu](double, const std::vector<double>& x) {
        return std::vector<CMat>{CMat::scalar(
            1, cplx(0.0, nu * (double(m) + amp * std::cos(nu * x[0]))))};
      },
      [](double, const std::vector<double>&) { return std::vector<CMat>{}; });
}

namespace detail {

inline CMat pauli(int a) {
  CMat s(2);
  switch (a) {
    case 1:
      s(0, 1) = 1.0;
      s(1, 0) = 1.0;
      break;
    case 2:
      s(0, 1) = cplx(0.0, -1.0);
      s(1, 0) = cplx(0.0, 1.0);
      break;
    default:
      s(0, 0) = 1.0;
      s(1, 1) = -1.0;
  }
  return s;
}

// exp(t * i/2 (sigma + 1)) = e^{it/2} (cos(t/2) + i sin(t/2) sigma)
inline CMat half_shift_exp(double t, const CMat& sigma) {
  const cplx phase = std::polar(1.0, 0.5 * t);
  CMat m = CMat::identity(2) * (phase * std::cos(0.5 * t));
  m += sigma * (phase * cplx(0.0, 1.0) * std::sin(0.5 * t));
  return m;
}

}  // namespace detail

// Rank-2 family on the 3-torus: the straight path s * omega where omega is
// the logarithmic derivative of a product of three axis rotations dressed by
// a position-dependent gauge factor. omega is flat, so the curvature of the
// path is s(s-1) omega^omega, evaluated pointwise.
inline ConnectionFamily torus_test_u2(std::vector<std::size_t> counts,
                                      double mu = 0.25, double s_a = 0.0,
                                      double s_b = 1.0) {
  if (counts.size() != 3)
    throw std::invalid_argument("torus_test_u2: expects three axis counts");
  const Chart chart = Chart::torus(counts);

  // generators with exp(2 pi A) = 1 so the factors close up on the torus
  auto gen = [](int a) {
    CMat g = (detail::pauli(a) + CMat::identity(2)) * cplx(0.0, 0.5);
    return g;
  };
  const CMat a1 = gen(3), a2 = gen(1), a3 = gen(2);
  const CMat b = gen(2);

  auto omega_comps = [a1, a2, a3, b, mu](const std::vector<double>& p) {
    const double x = p[0], y = p[1], z = p[2];
    const CMat ey = detail::half_shift_exp(y, detail::pauli(1));
    const CMat ez = detail::half_shift_exp(z, detail::pauli(2));
    const CMat ey_inv = detail::half_shift_exp(-y, detail::pauli(1));
    const CMat ez_inv = detail::half_shift_exp(-z, detail::pauli(2));
    // translation part
    const CMat wx_h = ez_inv * (ey_inv * a1 * ey) * ez;
    const CMat wy_h = ez_inv * a2 * ez;
    const CMat& wz_h = a3;
    // gauge dressing pulled through the translation factor
    const CMat ex = detail::half_shift_exp(x, detail::pauli(3));
    const CMat h = ex * ey * ez;
    const CMat h_inv = ez_inv * ey_inv * detail::half_shift_exp(-x, detail::pauli(3));
    const CMat b_conj = h_inv * b * h;
    const double fx = mu * std::cos(x) * std::sin(2.0 * y);
    const double fy = 2.0 * mu * std::sin(x) * std::cos(2.0 * y);
    std::vector<CMat> w{b_conj * cplx(fx) + wx_h, b_conj * cplx(fy) + wy_h,
                        wz_h};
    return w;
  };

  return ConnectionFamily(
      chart, 2, s_a, s_b,
      [omega_comps](double s, const std::vector<double>& p) {
        auto w = omega_comps(p);
        for (auto& m : w) m *= cplx(s);
        return w;
      },
      [omega_comps](double, const std::vector<double>& p) {
        return omega_comps(p);
      },
      [omega_comps](double s, const std::vector<double>& p) {
        const auto w = omega_comps(p);
        const double f = s * (s - 1.0);
        // pairs in increasing mask order: (0,1), (0,2), (1,2)
        const std::pair<int, int> pairs[] = {{0, 1}, {0, 2}, {1, 2}};
        std::vector<CMat> out;
        out.reserve(3);
        for (auto [i, j] : pairs)
          out.push_back((w[i] * w[j] - w[j] * w[i]) * cplx(f));
        return out;
      });
}

}  // namespace sflab
