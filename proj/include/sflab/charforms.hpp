#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "connection.hpp"
#include "exterior.hpp"
#include "form.hpp"
#include "power_series.hpp"

namespace sflab {

inline constexpr double pi_val = 3.141592653589793238462643;

// tr exp(curvature / 2 pi i), truncated by the chart dimension
inline ScalarForm chern_character(const GradedMatrixForm& curvature) {
  GradedMatrixForm x = curvature;
  x *= cplx(0.0, -1.0 / (2.0 * pi_val));  // 1/(2 pi i)
  return mat_trace(apply_series(CharPowerSeries::exponential(9), x));
}

// transgression of tr exp between the family endpoints: the s-integral of
// tr( (ds omega / 2 pi i) ^ exp(curvature / 2 pi i) ), composite Simpson in s
inline ScalarForm odd_char_form(const ConnectionFamily& fam,
                                std::size_t s_samples = 65) {
  if (s_samples < 5 || s_samples % 2 == 0)
    throw std::invalid_argument("odd_char_form: need an odd sample count >= 5");
  const double a = fam.s_begin(), b = fam.s_end();
  const double h = (b - a) / double(s_samples - 1);
  const cplx scale(0.0, -1.0 / (2.0 * pi_val));
  const auto qp = CharPowerSeries::exponential(9).derivative();
  ScalarForm acc(fam.chart(), 1);
  for (std::size_t j = 0; j < s_samples; ++j) {
    const double s = a + double(j) * h;
    double w = (j == 0 || j + 1 == s_samples) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    w *= h / 3.0;
    GradedMatrixForm dso = fam.ds_omega_form(s);
    dso *= scale;
    GradedMatrixForm om = fam.curvature(s);
    om *= scale;
    ScalarForm term = mat_trace(wedge(dso, apply_series(qp, om)));
    term *= cplx(w);
    acc += term;
  }
  acc.drop_negligible();
  return acc;
}

namespace detail {

// integral of s^k (s-1)^k over [0,1]
inline double transgression_moment(unsigned k) {
  double v = (k % 2 == 0) ? 1.0 : -1.0;
  // (k!)^2 / (2k+1)!  accumulated without overflow
  for (unsigned j = 1; j <= k; ++j) v *= double(j) / double(k + j);
  return v / double(2 * k + 1);
}

}  // namespace detail

// closed form of the transgression for the straight line s |-> s * omega when
// omega satisfies d omega + omega ^ omega = 0: sum over k of
// (-1)^k k!/(2k+1)! tr(omega^{2k+1}) / (2 pi i)^{k+1}
inline ScalarForm flat_line_odd_form(const GradedMatrixForm& omega,
                                     double flatness_tol = 0.02) {
  // the gate is relative to the terms that must cancel: a resolved flat
  // connection leaves only stencil truncation here (shrinking with the grid),
  // a non-flat one leaves an O(1) ratio at any resolution
  const GradedMatrixForm dw = d(omega);
  const GradedMatrixForm sq = wedge(omega, omega);
  const double scale = std::max({1e-9, dw.norm_inf(), sq.norm_inf()});
  if ((dw + sq).norm_inf() > flatness_tol * scale)
    throw std::invalid_argument(
        "flat_line_odd_form: omega does not satisfy the flatness equation");
  const std::size_t dim = omega.chart().dim();
  ScalarForm acc(omega.chart(), 1);
  GradedMatrixForm power = omega;  // omega^{2k+1}
  const cplx inv2pii(0.0, -1.0 / (2.0 * pi_val));
  cplx prefac = inv2pii;
  for (unsigned k = 0; 2 * k + 1 <= dim; ++k) {
    if (k > 0) {
      power = wedge(wedge(power, omega), omega);
      prefac *= inv2pii;
    }
    double coeff = detail::transgression_moment(k);
    for (unsigned j = 2; j <= k; ++j) coeff /= double(j);  // / k!
    ScalarForm term = mat_trace(power);
    term *= prefac * cplx(coeff);
    acc += term;
  }
  acc.drop_negligible();
  return acc;
}

// multiplicative genus of the tangent bundle from its curvature two-form;
// constant 1 through dimension 3, first Pontryagin correction through 7
inline ScalarForm tangent_genus_form(const Chart& chart,
                                     const GradedMatrixForm* riemann = nullptr) {
  ScalarForm r = constant_scalar(chart, cplx(1.0));
  if (chart.dim() <= 3) return r;
  if (chart.dim() > 7)
    throw std::invalid_argument(
        "tangent_genus_form: dimension > 7 needs higher genus terms");
  if (riemann == nullptr)
    throw std::invalid_argument(
        "tangent_genus_form: dimension >= 4 needs the curvature input");
  ScalarForm p1 = mat_trace(wedge(*riemann, *riemann));
  p1 *= cplx(-1.0 / (8.0 * pi_val * pi_val));
  p1 *= cplx(-1.0 / 24.0);
  r += p1;
  return r;
}

struct GeometricSideResult {
  double value = 0.0;      // minus the integral of genus ^ transgression
  double imag_residue = 0.0;
};

inline GeometricSideResult geometric_side(const ScalarForm& genus,
                                          const ScalarForm& odd_form) {
  const auto ir = integrate_top(wedge(genus, odd_form));
  return {-ir.value.real(), std::abs(ir.value.imag())};
}

inline GeometricSideResult geometric_side(const ConnectionFamily& fam,
                                          std::size_t s_samples = 65) {
  const ScalarForm cs = odd_char_form(fam, s_samples);
  const auto ir = integrate_top(cs);
  return {-ir.value.real(), std::abs(ir.value.imag())};
}

}  // namespace sflab
