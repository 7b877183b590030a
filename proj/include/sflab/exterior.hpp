#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "chart.hpp"
#include "form.hpp"
#include "power_series.hpp"

namespace sflab {

// wedge product with fiber-matrix multiplication and shuffle signs
inline GradedMatrixForm wedge(const GradedMatrixForm& a, const GradedMatrixForm& b) {
  a.check_compatible(b);
  GradedMatrixForm r(a.chart(), a.rank());
  for (const auto& [ia, da] : a.components()) {
    for (const auto& [ib, db] : b.components()) {
      if (!multi_index::disjoint(ia, ib)) continue;
      const double sign = multi_index::merge_sign(ia, ib);
      auto& out = r.component(ia | ib);
      const std::size_t n = da.size();
      for (std::size_t node = 0; node < n; ++node) {
        CMat prod = da[node] * db[node];
        if (sign < 0) prod *= -1.0;
        out[node] += prod;
      }
    }
  }
  return r;
}

// fiber trace, component by component
inline ScalarForm mat_trace(const GradedMatrixForm& a) {
  ScalarForm r(a.chart(), 1);
  for (const auto& [mask, data] : a.components()) {
    auto& out = r.component(mask);
    for (std::size_t node = 0; node < data.size(); ++node)
      out[node](0, 0) = data[node].trace();
  }
  return r;
}

// q(a) = sum_k coeff[k] a^{wedge k} for a with only even grades >= 2; the sum
// terminates once 2k exceeds the chart dimension (higher powers vanish).
inline GradedMatrixForm apply_series(const CharPowerSeries& q,
                                     const GradedMatrixForm& a) {
  for (const auto& [mask, data] : a.components()) {
    const unsigned g = multi_index::grade(mask);
    if (g == 0 || g % 2 != 0) {
      double m = 0.0;
      for (const auto& v : data) m = std::max(m, v.norm_inf());
      if (m > 1e-14)
        throw std::invalid_argument(
            "apply_series: input must have even grades >= 2 only");
    }
  }
  const std::size_t dim = a.chart().dim();
  GradedMatrixForm r(a.chart(), a.rank());
  if (!q.coeff.empty() && q.coeff[0] != 0.0) {
    auto& c0 = r.component(0);
    const CMat id = CMat::scalar(a.rank(), q.coeff[0]);
    for (auto& v : c0) v = id;
  }
  GradedMatrixForm power = a;  // a^1
  for (std::size_t k = 1; k < q.coeff.size() && 2 * k <= dim; ++k) {
    if (k > 1) power = wedge(power, a);
    if (q.coeff[k] != 0.0) {
      GradedMatrixForm term = power;
      term *= q.coeff[k];
      r += term;
    }
  }
  return r;
}

namespace detail {

struct Stencil {
  int offset[5];
  double coeff[5];
  int taps;
};

// 4th order first-derivative stencils (divide by 12h)
inline const Stencil& central_stencil() {
  static const Stencil s{{-2, -1, 1, 2, 0}, {1.0, -8.0, 8.0, -1.0, 0.0}, 4};
  return s;
}
inline const Stencil& edge_stencil(std::size_t idx, std::size_t n) {
  static const Stencil left0{{0, 1, 2, 3, 4}, {-25.0, 48.0, -36.0, 16.0, -3.0}, 5};
  static const Stencil left1{{-1, 0, 1, 2, 3}, {-3.0, -10.0, 18.0, -6.0, 1.0}, 5};
  static const Stencil right1{{1, 0, -1, -2, -3}, {3.0, 10.0, -18.0, 6.0, -1.0}, 5};
  static const Stencil right0{{0, -1, -2, -3, -4}, {25.0, -48.0, 36.0, -16.0, 3.0}, 5};
  if (idx == 0) return left0;
  if (idx == 1) return left1;
  if (idx == n - 2) return right1;
  return right0;
}

}  // namespace detail

// exterior derivative by 4th order finite differences
inline GradedMatrixForm d(const GradedMatrixForm& a) {
  const Chart& chart = a.chart();
  for (std::size_t ax = 0; ax < chart.dim(); ++ax)
    if (chart.axis(ax).count < 5)
      throw std::invalid_argument("d: need at least 5 samples per axis");

  GradedMatrixForm r(chart, a.rank());
  for (const auto& [mask, data] : a.components()) {
    if (multi_index::grade(mask) >= chart.dim()) continue;
    for (std::size_t ax = 0; ax < chart.dim(); ++ax) {
      const std::uint32_t bit = 1u << ax;
      if (mask & bit) continue;
      const double sign = multi_index::merge_sign(bit, mask);
      const Axis& axis = chart.axis(ax);
      const double inv12h = sign / (12.0 * axis.spacing);
      auto& out = r.component(bit | mask);
      for (std::size_t node = 0; node < data.size(); ++node) {
        const std::size_t idx = chart.axis_index(node, ax);
        const bool interior =
            axis.periodic || (idx >= 2 && idx + 2 < axis.count);
        const detail::Stencil& st = interior
                                        ? detail::central_stencil()
                                        : detail::edge_stencil(idx, axis.count);
        CMat acc(a.rank());
        for (int t = 0; t < st.taps; ++t) {
          CMat term = data[chart.shifted(node, ax, st.offset[t])];
          term *= st.coeff[t];
          acc += term;
        }
        acc *= inv12h;
        out[node] += acc;
      }
    }
  }
  return r;
}

struct IntegrationResult {
  cplx value{0.0, 0.0};
  bool has_top = false;
};

namespace detail {

// composite Simpson weights on a closed axis (3/8 tail when the sample count
// is even); plain spacing weights on a periodic axis
inline std::vector<double> axis_weights(const Axis& ax) {
  std::vector<double> w(ax.count, 0.0);
  if (ax.periodic) {
    for (auto& v : w) v = ax.spacing;
    return w;
  }
  const double h = ax.spacing;
  std::size_t simpson_end = ax.count;  // exclusive index past the Simpson block
  if (ax.count % 2 == 0) simpson_end = ax.count - 3;
  if (simpson_end >= 3) {
    w[0] += h / 3.0;
    w[simpson_end - 1] += h / 3.0;
    for (std::size_t i = 1; i + 1 < simpson_end; ++i)
      w[i] += (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
  }
  if (ax.count % 2 == 0) {
    const std::size_t b = ax.count - 4;
    w[b] += 3.0 * h / 8.0;
    w[b + 1] += 9.0 * h / 8.0;
    w[b + 2] += 9.0 * h / 8.0;
    w[b + 3] += 3.0 * h / 8.0;
  }
  return w;
}

}  // namespace detail

// integral of the top-grade component over the whole chart
inline IntegrationResult integrate_top(const ScalarForm& a) {
  if (a.rank() != 1)
    throw std::invalid_argument("integrate_top: scalar-valued forms only");
  const Chart& chart = a.chart();
  const std::uint32_t top = (1u << chart.dim()) - 1u;
  IntegrationResult res;
  if (!a.has(top)) return res;  // zero, flagged
  res.has_top = true;

  std::vector<std::vector<double>> w(chart.dim());
  for (std::size_t ax = 0; ax < chart.dim(); ++ax)
    w[ax] = detail::axis_weights(chart.axis(ax));

  const auto& data = a.component(top);
  cplx sum = 0.0;
  for (std::size_t node = 0; node < data.size(); ++node) {
    double weight = chart.volume_weight(node);
    for (std::size_t ax = 0; ax < chart.dim(); ++ax)
      weight *= w[ax][chart.axis_index(node, ax)];
    sum += weight * data[node](0, 0);
  }
  res.value = double(chart.orientation()) * sum;
  return res;
}

}  // namespace sflab
