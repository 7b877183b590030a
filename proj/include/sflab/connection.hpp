#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "chart.hpp"
#include "exterior.hpp"
#include "form.hpp"

namespace sflab {

namespace multi_index {

// grade-2 masks of a d-dimensional chart in increasing mask order; two-form
// providers return one matrix per entry of this list
inline std::vector<std::uint32_t> pair_masks(std::size_t dim) {
  std::vector<std::uint32_t> v;
  for (std::uint32_t m = 0; m < (1u << dim); ++m)
    if (grade(m) == 2) v.push_back(m);
  return v;
}

}  // namespace multi_index

// Smooth monotone map between parameter intervals, value and derivative.
struct SmoothMap1D {
  double dom_a = 0.0, dom_b = 1.0;
  std::function<double(double)> value;
  std::function<double(double)> deriv;

  static SmoothMap1D identity(double a, double b) {
    return {a, b, [](double t) { return t; }, [](double) { return 1.0; }};
  }
  static SmoothMap1D affine(double dom_a, double dom_b, double ran_a,
                            double ran_b) {
    const double slope = (ran_b - ran_a) / (dom_b - dom_a);
    return {dom_a, dom_b,
            [=](double t) { return ran_a + slope * (t - dom_a); },
            [=](double) { return slope; }};
  }
  // monotone reparametrization of [a,b] onto itself, exactly constant on end
  // collars of the given width; built from the exp(-1/u) bump primitive so
  // every derivative is continuous and vanishes at the collar joints
  static SmoothMap1D smoothstep(double a, double b, double collar_frac = 0.125) {
    const double c = collar_frac * (b - a);
    const double w = (b - a) - 2.0 * c;
    auto psi = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
    auto dpsi = [psi](double u) {
      return u > 0.0 ? psi(u) / (u * u) : 0.0;
    };
    auto sigma = [psi](double u) {
      const double f = psi(u), g = psi(1.0 - u);
      return f / (f + g);
    };
    auto dsigma = [psi, dpsi](double u) {
      const double f = psi(u), g = psi(1.0 - u);
      const double s = f + g;
      return (dpsi(u) * g + f * dpsi(1.0 - u)) / (s * s);
    };
    return {a, b,
            [=](double t) { return a + (b - a) * sigma((t - a - c) / w); },
            [=](double t) { return (b - a) / w * dsigma((t - a - c) / w); }};
  }
};

// Smooth map between charts: point image and differential (target dim x
// source dim), both evaluable at arbitrary source points.
struct ChartMap {
  Chart source;
  Chart target;
  std::function<std::vector<double>(const std::vector<double>&)> value;
  std::function<std::vector<std::vector<double>>(const std::vector<double>&)>
      differential;

  static ChartMap identity(const Chart& c) {
    const std::size_t d = c.dim();
    return {c, c, [](const std::vector<double>& x) { return x; },
            [d](const std::vector<double>&) {
              std::vector<std::vector<double>> j(d, std::vector<double>(d, 0.0));
              for (std::size_t i = 0; i < d; ++i) j[i][i] = 1.0;
              return j;
            }};
  }

  // circle self-cover of the given degree (both charts periodic, dim 1)
  static ChartMap circle_cover(const Chart& src, const Chart& tgt, int degree) {
    if (src.dim() != 1 || tgt.dim() != 1 || !src.axis(0).periodic ||
        !tgt.axis(0).periodic)
      throw std::invalid_argument("circle_cover: expects periodic 1d charts");
    const double l_src = src.axis(0).length(), l_tgt = tgt.axis(0).length();
    const double rate = double(degree) * l_tgt / l_src;
    const double o_src = src.axis(0).origin, o_tgt = tgt.axis(0).origin;
    return {src, tgt,
            [=](const std::vector<double>& x) {
              double v = o_tgt + std::fmod(rate * (x[0] - o_src), l_tgt);
              if (v < o_tgt) v += l_tgt;
              return std::vector<double>{v};
            },
            [=](const std::vector<double>&) {
              return std::vector<std::vector<double>>{{rate}};
            }};
  }

  // linear torus map given by an integer matrix acting on coordinates
  static ChartMap torus_linear(const Chart& src, const Chart& tgt,
                               std::vector<std::vector<int>> m) {
    const std::size_t ds = src.dim(), dt = tgt.dim();
    if (m.size() != dt) throw std::invalid_argument("torus_linear: row count");
    for (const auto& row : m)
      if (row.size() != ds) throw std::invalid_argument("torus_linear: columns");
    return {src, tgt,
            [=](const std::vector<double>& x) {
              std::vector<double> y(dt, 0.0);
              for (std::size_t i = 0; i < dt; ++i) {
                for (std::size_t j = 0; j < ds; ++j)
                  y[i] += double(m[i][j]) * x[j];
                const double l = tgt.axis(i).length(), o = tgt.axis(i).origin;
                y[i] = o + std::fmod(y[i] - o, l);
                if (y[i] < o) y[i] += l;
              }
              return y;
            },
            [=](const std::vector<double>&) {
              std::vector<std::vector<double>> j(dt, std::vector<double>(ds));
              for (std::size_t i = 0; i < dt; ++i)
                for (std::size_t k = 0; k < ds; ++k) j[i][k] = double(m[i][k]);
              return j;
            }};
  }

  // inclusion of a sub-grid: source axis i maps to target axis axis_map[i],
  // remaining target coordinates held at the given values
  static ChartMap inclusion(const Chart& src, const Chart& tgt,
                            std::vector<std::size_t> axis_map,
                            std::vector<double> fixed) {
    if (axis_map.size() != src.dim() || fixed.size() != tgt.dim())
      throw std::invalid_argument("inclusion: arity mismatch");
    const std::size_t ds = src.dim(), dt = tgt.dim();
    return {src, tgt,
            [=](const std::vector<double>& x) {
              std::vector<double> y = fixed;
              for (std::size_t i = 0; i < ds; ++i) y[axis_map[i]] = x[i];
              return y;
            },
            [=](const std::vector<double>&) {
              std::vector<std::vector<double>> j(dt, std::vector<double>(ds, 0.0));
              for (std::size_t i = 0; i < ds; ++i) j[axis_map[i]][i] = 1.0;
              return j;
            }};
  }

  // max deviation between the stated differential and a second-order finite
  // difference of the point map, sampled over source nodes
  double differential_defect(double h = 1e-5) const {
    double worst = 0.0;
    for (std::size_t node = 0; node < source.n_nodes();
         node += std::max<std::size_t>(1, source.n_nodes() / 64)) {
      const auto x = source.point(node);
      const auto jac = differential(x);
      for (std::size_t a = 0; a < source.dim(); ++a) {
        auto xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        const auto fp = value(xp), fm = value(xm);
        for (std::size_t i = 0; i < target.dim(); ++i) {
          double diff = fp[i] - fm[i];
          if (target.axis(i).periodic) {  // unwrap across the seam
            const double l = target.axis(i).length();
            diff = std::remainder(diff, l);
          }
          worst = std::max(worst, std::abs(diff / (2.0 * h) - jac[i][a]));
        }
      }
    }
    return worst;
  }
};

namespace detail {

inline double small_det(const std::vector<std::vector<double>>& m) {
  const std::size_t n = m.size();
  if (n == 0) return 1.0;
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  double det = 0.0;
  std::vector<std::vector<double>> minor(n - 1, std::vector<double>(n - 1));
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t jj = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == c) continue;
        minor[i - 1][jj++] = m[i][j];
      }
    }
    det += (c % 2 == 0 ? 1.0 : -1.0) * m[0][c] * small_det(minor);
  }
  return det;
}

inline std::size_t locate_node(const Chart& chart, const std::vector<double>& x,
                               double tol = 1e-8) {
  std::size_t node = 0;
  for (std::size_t a = 0; a < chart.dim(); ++a) {
    const Axis& ax = chart.axis(a);
    double u = (x[a] - ax.origin) / ax.spacing;
    long k = std::lround(u);
    if (ax.periodic) {
      const long n = long(ax.count);
      if (std::abs(u - double(k)) > tol)
        throw std::invalid_argument("pullback_form: image misses grid nodes");
      k = ((k % n) + n) % n;
    } else {
      if (k < 0 || k >= long(ax.count) || std::abs(u - double(k)) > tol)
        throw std::invalid_argument("pullback_form: image misses grid nodes");
    }
    node += std::size_t(k) * chart.stride(a);
  }
  return node;
}

}  // namespace detail

// Pullback of a sampled form along a map whose node images are themselves
// grid nodes (e.g. linear torus maps). General maps pull back families, which
// are point-evaluable, rather than sampled forms.
inline GradedMatrixForm pullback_form(const ChartMap& f,
                                      const GradedMatrixForm& a) {
  if (!a.chart().same_grid(f.target))
    throw std::invalid_argument("pullback_form: form not on target chart");
  GradedMatrixForm r(f.source, a.rank());
  const std::size_t ds = f.source.dim();
  for (std::size_t node = 0; node < f.source.n_nodes(); ++node) {
    const auto x = f.source.point(node);
    const auto y = f.value(x);
    const auto jac = f.differential(x);
    const std::size_t tgt_node = detail::locate_node(a.chart(), y);
    for (const auto& [mask_j, data] : a.components()) {
      const auto rows = multi_index::axes_of(mask_j);
      const unsigned g = multi_index::grade(mask_j);
      for (std::uint32_t mask_i = 0; mask_i < (1u << ds); ++mask_i) {
        if (multi_index::grade(mask_i) != g) continue;
        const auto cols = multi_index::axes_of(mask_i);
        std::vector<std::vector<double>> sub(g, std::vector<double>(g));
        for (unsigned r_ = 0; r_ < g; ++r_)
          for (unsigned c_ = 0; c_ < g; ++c_)
            sub[r_][c_] = jac[rows[r_]][cols[c_]];
        const double det = detail::small_det(sub);
        if (det == 0.0) continue;
        CMat term = data[tgt_node];
        term *= det;
        r.component(mask_i)[node] += term;
      }
    }
  }
  r.drop_negligible();
  return r;
}

// One-parameter family of connections on a chart, held as point-evaluable
// providers. omega(s, x) returns the connection one-form components (one
// matrix per chart axis); curvature is either an exact callback returning
// grade-2 components in pair_masks order, or assembled as d(omega) +
// omega^omega on the grid.
class ConnectionFamily {
 public:
  using OneFormProvider =
      std::function<std::vector<CMat>(double, const std::vector<double>&)>;
  using TwoFormProvider =
      std::function<std::vector<CMat>(double, const std::vector<double>&)>;

  ConnectionFamily(Chart chart, std::size_t rank, double a, double b,
                   OneFormProvider omega,
                   OneFormProvider ds_omega = nullptr,
                   TwoFormProvider exact_curvature = nullptr)
      : chart_(std::move(chart)),
        rank_(rank),
        a_(a),
        b_(b),
        omega_(std::move(omega)),
        ds_omega_(std::move(ds_omega)),
        exact_curvature_(std::move(exact_curvature)) {
    if (!(a_ < b_)) throw std::invalid_argument("ConnectionFamily: empty interval");
    if (!omega_) throw std::invalid_argument("ConnectionFamily: no omega provider");
    check_skew_hermitian();
  }

  const Chart& chart() const { return chart_; }
  std::size_t rank() const { return rank_; }
  double s_begin() const { return a_; }
  double s_end() const { return b_; }
  bool has_exact_curvature() const { return exact_curvature_ != nullptr; }

  std::vector<CMat> omega_at(double s, const std::vector<double>& x) const {
    auto v = omega_(s, x);
    if (v.size() != chart_.dim())
      throw std::runtime_error("ConnectionFamily: omega arity mismatch");
    return v;
  }

  std::vector<CMat> ds_omega_at(double s, const std::vector<double>& x) const {
    if (ds_omega_) return ds_omega_(s, x);
    const double h = (b_ - a_) / 1024.0;
    auto up = omega_(s + h, x);
    auto dn = omega_(s - h, x);
    for (std::size_t i = 0; i < up.size(); ++i)
      up[i] = (up[i] - dn[i]) * cplx(1.0 / (2.0 * h));
    return up;
  }

  GradedMatrixForm omega_form(double s) const {
    return sample_one_form(
        [&](const std::vector<double>& x) { return omega_at(s, x); });
  }
  GradedMatrixForm ds_omega_form(double s) const {
    return sample_one_form(
        [&](const std::vector<double>& x) { return ds_omega_at(s, x); });
  }

  GradedMatrixForm curvature(double s) const {
    if (s < a_ - 1e-12 || s > b_ + 1e-12)
      throw std::invalid_argument("curvature: s outside family interval");
    if (exact_curvature_) {
      const auto masks = multi_index::pair_masks(chart_.dim());
      if (masks.empty()) return GradedMatrixForm(chart_, rank_);
      return sample_form(chart_, rank_, masks,
                         [&](const std::vector<double>& x) {
                           return exact_curvature_(s, x);
                         });
    }
    GradedMatrixForm w = omega_form(s);
    return d(w) + wedge(w, w);
  }

  // family pulled back along a chart map; exact curvature callbacks compose
  ConnectionFamily pullback(const ChartMap& f) const {
    if (!f.target.same_grid(chart_))
      throw std::invalid_argument("pullback: map target is not the family chart");
    auto omega = omega_;
    auto fv = f.value;
    auto fd = f.differential;
    const std::size_t ds_dim = f.source.dim(), dt_dim = chart_.dim();
    const std::size_t n = rank_;
    auto pull1 = [fv, fd, ds_dim, dt_dim, n](
                     const OneFormProvider& p, double s,
                     const std::vector<double>& x) {
      const auto y = fv(x);
      const auto jac = fd(x);
      const auto w = p(s, y);
      std::vector<CMat> out(ds_dim, CMat(n));
      for (std::size_t i = 0; i < ds_dim; ++i)
        for (std::size_t j = 0; j < dt_dim; ++j)
          if (jac[j][i] != 0.0) out[i] += w[j] * cplx(jac[j][i]);
      return out;
    };
    OneFormProvider new_omega = [pull1, omega](double s,
                                               const std::vector<double>& x) {
      return pull1(omega, s, x);
    };
    OneFormProvider new_ds;
    if (ds_omega_) {
      auto dso = ds_omega_;
      new_ds = [pull1, dso](double s, const std::vector<double>& x) {
        return pull1(dso, s, x);
      };
    }
    TwoFormProvider new_curv;
    if (exact_curvature_) {
      auto curv = exact_curvature_;
      const auto src_pairs = multi_index::pair_masks(ds_dim);
      const auto tgt_pairs = multi_index::pair_masks(dt_dim);
      new_curv = [curv, fv, fd, src_pairs, tgt_pairs, n](
                     double s, const std::vector<double>& x) {
        const auto y = fv(x);
        const auto jac = fd(x);
        const auto om = curv(s, y);
        std::vector<CMat> out(src_pairs.size(), CMat(n));
        for (std::size_t p = 0; p < src_pairs.size(); ++p) {
          const auto ij = multi_index::axes_of(src_pairs[p]);
          for (std::size_t q = 0; q < tgt_pairs.size(); ++q) {
            const auto kl = multi_index::axes_of(tgt_pairs[q]);
            const double c = jac[kl[0]][ij[0]] * jac[kl[1]][ij[1]] -
                             jac[kl[0]][ij[1]] * jac[kl[1]][ij[0]];
            if (c != 0.0) out[p] += om[q] * cplx(c);
          }
        }
        return out;
      };
    }
    return ConnectionFamily(f.source, rank_, a_, b_, std::move(new_omega),
                            std::move(new_ds), std::move(new_curv));
  }

  // family in the new parameter t with omega^t := omega^{phi(t)}
  ConnectionFamily reparametrized(const SmoothMap1D& phi) const {
    auto omega = omega_;
    auto pv = phi.value;
    auto pd = phi.deriv;
    OneFormProvider new_omega = [omega, pv](double t,
                                            const std::vector<double>& x) {
      return omega(pv(t), x);
    };
    // chain rule needs the parent's s-derivative even when that one is the
    // finite-difference default
    auto parent = *this;
    OneFormProvider new_ds = [parent, pv, pd](double t,
                                              const std::vector<double>& x) {
      auto v = parent.ds_omega_at(pv(t), x);
      const cplx rate(pd(t));
      for (auto& m : v) m *= rate;
      return v;
    };
    TwoFormProvider new_curv;
    if (exact_curvature_) {
      auto curv = exact_curvature_;
      new_curv = [curv, pv](double t, const std::vector<double>& x) {
        return curv(pv(t), x);
      };
    }
    return ConnectionFamily(chart_, rank_, phi.dom_a, phi.dom_b,
                            std::move(new_omega), std::move(new_ds),
                            std::move(new_curv));
  }

  double skew_hermitian_defect() const {
    double worst = 0.0;
    const std::size_t picks[] = {0, chart_.n_nodes() / 2, chart_.n_nodes() - 1};
    for (double s : {a_, 0.5 * (a_ + b_), b_}) {
      for (auto node : picks) {
        const auto w = omega_at(s, chart_.point(node));
        for (const auto& m : w) worst = std::max(worst, (m + m.dagger()).norm_inf());
      }
    }
    return worst;
  }

 private:
  void check_skew_hermitian() const {
    if (skew_hermitian_defect() > 1e-12 * std::max(1.0, omega_scale()))
      throw std::invalid_argument(
          "ConnectionFamily: omega is not skew-Hermitian");
  }
  double omega_scale() const {
    double m = 1.0;
    const auto w = omega_at(0.5 * (a_ + b_), chart_.point(0));
    for (const auto& v : w) m = std::max(m, v.norm_inf());
    return m;
  }
  GradedMatrixForm sample_one_form(
      const std::function<std::vector<CMat>(const std::vector<double>&)>& eval)
      const {
    GradedMatrixForm f(chart_, rank_);
    std::vector<std::vector<CMat>*> slots;
    for (std::size_t a = 0; a < chart_.dim(); ++a)
      slots.push_back(&f.component(1u << a));
    for (std::size_t node = 0; node < chart_.n_nodes(); ++node) {
      auto vals = eval(chart_.point(node));
      for (std::size_t a = 0; a < chart_.dim(); ++a)
        (*slots[a])[node] = std::move(vals[a]);
    }
    return f;
  }

  Chart chart_;
  std::size_t rank_;
  double a_, b_;
  OneFormProvider omega_;
  OneFormProvider ds_omega_;
  TwoFormProvider exact_curvature_;
};

// grade-1 form holding the identity matrix in one axis slot; wedging with it
// prepends that axis differential with the correct sign bookkeeping
inline GradedMatrixForm axis_identity_form(const Chart& chart,
                                           std::size_t axis, std::size_t rank) {
  GradedMatrixForm f(chart, rank);
  auto& comp = f.component(1u << axis);
  const CMat id = CMat::identity(rank);
  for (auto& v : comp) v = id;
  return f;
}

// embed a form on the base chart into the cylinder (constant along t)
inline GradedMatrixForm cylinder_embed(const GradedMatrixForm& base_form,
                                       const Chart& cylinder) {
  const std::size_t d = cylinder.dim() - 1;
  if (base_form.chart().dim() != d)
    throw std::invalid_argument("cylinder_embed: dimension mismatch");
  const std::size_t nt = cylinder.axis(d).count;
  GradedMatrixForm r(cylinder, base_form.rank());
  for (const auto& [mask, data] : base_form.components()) {
    auto& out = r.component(mask);
    for (std::size_t bnode = 0; bnode < data.size(); ++bnode)
      for (std::size_t ti = 0; ti < nt; ++ti) out[bnode * nt + ti] = data[bnode];
  }
  return r;
}

// Family spread out over the product chart M x [a,b]. The connection form on
// the cylinder is omega^t in the base directions with no dt component; its
// curvature can be assembled structurally on the cylinder grid or from the
// per-slice data, and the two must agree.
class LiftedConnection {
 public:
  LiftedConnection(ConnectionFamily family, std::size_t t_samples)
      : family_(std::move(family)) {
    auto axes = family_.chart().axes();
    const double a = family_.s_begin(), b = family_.s_end();
    axes.push_back(
        Axis{t_samples, (b - a) / double(t_samples - 1), false, a});
    cylinder_ = Chart(std::move(axes), family_.chart().orientation());
  }

  const Chart& cylinder() const { return cylinder_; }
  const ConnectionFamily& family() const { return family_; }
  std::size_t t_axis() const { return cylinder_.dim() - 1; }

  GradedMatrixForm omega_bar() const {
    return assemble([&](double t) { return family_.omega_form(t); });
  }
  GradedMatrixForm dt_omega_bar() const {
    return assemble([&](double t) { return family_.ds_omega_form(t); });
  }

  GradedMatrixForm curvature_structural() const {
    GradedMatrixForm w = omega_bar();
    return d(w) + wedge(w, w);
  }

  // slice curvature plus dt wedge the t-derivative of the connection form
  GradedMatrixForm curvature_split() const {
    GradedMatrixForm r =
        assemble([&](double t) { return family_.curvature(t); });
    r += wedge(axis_identity_form(cylinder_, t_axis(), family_.rank()),
               dt_omega_bar());
    return r;
  }

  // stack per-parameter slices into a cylinder form (t-axis has stride 1);
  // the slice callback fixes the fiber rank, so scalar slices work too
  GradedMatrixForm assemble(
      const std::function<GradedMatrixForm(double)>& slice) const {
    GradedMatrixForm r;
    const Axis& t_ax = cylinder_.axis(t_axis());
    const std::size_t nt = t_ax.count;
    for (std::size_t ti = 0; ti < nt; ++ti) {
      GradedMatrixForm sl = slice(t_ax.coord(ti));
      if (ti == 0) r = GradedMatrixForm(cylinder_, sl.rank());
      for (const auto& [mask, data] : sl.components()) {
        auto& out = r.component(mask);
        for (std::size_t bnode = 0; bnode < data.size(); ++bnode)
          out[bnode * nt + ti] = data[bnode];
      }
    }
    return r;
  }

 private:
  ConnectionFamily family_;
  Chart cylinder_;
};

// spread the family over its parameter interval, reparametrized by phi
// (defaults to the flat-collared smoothstep); phi must be monotone
inline LiftedConnection lift(const ConnectionFamily& fam, std::size_t t_samples,
                             std::optional<SmoothMap1D> phi = std::nullopt) {
  SmoothMap1D map = phi.value_or(
      SmoothMap1D::smoothstep(fam.s_begin(), fam.s_end()));
  const int probes = 97;
  for (int i = 0; i <= probes; ++i) {
    const double t =
        map.dom_a + (map.dom_b - map.dom_a) * double(i) / double(probes);
    if (map.deriv(t) < -1e-12)
      throw std::invalid_argument("lift: reparametrization must be monotone");
  }
  return LiftedConnection(fam.reparametrized(map), t_samples);
}

}  // namespace sflab
