#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sflab {

// eigenvalues of a self-adjoint family restricted to [-half_width, half_width],
// returned ascending for any parameter value
struct WindowedSpectrum {
  double half_width = 0.0;
  std::function<std::vector<double>(double)> eval;
};

inline WindowedSpectrum windowed_from_branches(
    std::vector<std::function<double(double)>> branches, double half_width) {
  return {half_width, [branches = std::move(branches), half_width](double s) {
            std::vector<double> ev;
            for (const auto& br : branches) {
              const double v = br(s);
              if (std::abs(v) <= half_width) ev.push_back(v);
            }
            std::sort(ev.begin(), ev.end());
            return ev;
          }};
}

// one certified subinterval: no eigenvalue meets `level` anywhere inside it,
// so the count of eigenvalues in [0, level] can only change through zero
struct FlowLeaf {
  double s_lo = 0.0, s_hi = 0.0;
  double level = 0.0;
  double clearance = 0.0;  // worst sampled distance of the spectrum to level
  double margin = 0.0;     // certified excursion bound between samples
  long count_lo = 0, count_hi = 0;
};

struct FlowResult {
  long flow = 0;
  std::vector<FlowLeaf> leaves;
  std::size_t spectra_evaluated = 0;
  double min_leaf_width = 0.0;
};

struct FlowOptions {
  std::size_t samples_per_interval = 33;
  std::size_t max_depth = 12;
  double zero_snap = 1e-9;  // eigenvalues above -zero_snap count as >= 0
  double safety = 1.5;      // inflation of the between-sample excursion bound
};

namespace detail {

inline long count_band(const std::vector<double>& ev, double level,
                       double snap) {
  long c = 0;
  for (double v : ev)
    if (v >= -snap && v <= level) ++c;
  return c;
}

inline double nearest_distance(const std::vector<double>& sorted, double x) {
  if (sorted.empty()) return std::numeric_limits<double>::infinity();
  auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  double best = std::numeric_limits<double>::infinity();
  if (it != sorted.end()) best = std::min(best, std::abs(*it - x));
  if (it != sorted.begin()) best = std::min(best, std::abs(*(it - 1) - x));
  return best;
}

struct FlowWorker {
  const WindowedSpectrum& spec;
  FlowOptions opt;
  FlowResult result;

  void run(double u, double v, std::size_t depth) {
    const std::size_t m = opt.samples_per_interval;
    const double h = (v - u) / double(m - 1);
    std::vector<std::vector<double>> ev(m);
    for (std::size_t j = 0; j < m; ++j) {
      ev[j] = spec.eval(u + double(j) * h);
      ++result.spectra_evaluated;
    }

    // between-sample excursion estimate: nearest-neighbour movement of the
    // inner part of the spectrum across adjacent samples
    double move_max = 0.0;
    const double inner = 0.6 * spec.half_width;
    for (std::size_t j = 0; j + 1 < m; ++j)
      for (double x : ev[j]) {
        if (std::abs(x) > inner) continue;
        const double dmove = nearest_distance(ev[j + 1], x);
        if (std::isfinite(dmove)) move_max = std::max(move_max, dmove);
      }
    const double margin =
        opt.safety * 0.5 * move_max + 2.0 * opt.zero_snap;

    double min_abs = std::numeric_limits<double>::infinity();
    std::vector<double> pooled;
    for (const auto& list : ev)
      for (double x : list) {
        const double a = std::abs(x);
        if (a > opt.zero_snap) min_abs = std::min(min_abs, a);
        if (a <= 0.8 * spec.half_width) pooled.push_back(a);
      }

    std::vector<double> cands;
    if (std::isfinite(min_abs) && min_abs > 10.0 * opt.zero_snap)
      for (double f : {0.5, 0.25, 0.75}) cands.push_back(f * min_abs);
    // midpoints of the widest gaps in the pooled |lambda| profile
    std::sort(pooled.begin(), pooled.end());
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
    std::vector<std::pair<double, double>> gaps;  // (width, midpoint)
    for (std::size_t i = 0; i + 1 < pooled.size(); ++i)
      gaps.emplace_back(pooled[i + 1] - pooled[i],
                        0.5 * (pooled[i] + pooled[i + 1]));
    std::sort(gaps.rbegin(), gaps.rend());
    for (std::size_t i = 0; i < gaps.size() && i < 8; ++i)
      cands.push_back(gaps[i].second);
    cands.push_back(0.25 * spec.half_width);  // covers all-kernel spectra

    for (double a : cands) {
      if (!(a > 10.0 * opt.zero_snap) || a > 0.5 * spec.half_width) continue;
      double clearance = std::numeric_limits<double>::infinity();
      for (const auto& list : ev)
        for (double x : list) clearance = std::min(clearance, std::abs(x - a));
      if (clearance > margin) {
        result.leaves.push_back({u, v, a, clearance, margin,
                                 count_band(ev.front(), a, opt.zero_snap),
                                 count_band(ev.back(), a, opt.zero_snap)});
        return;
      }
    }

    if (depth >= opt.max_depth)
      throw std::runtime_error(
          "spectral_flow: no certifiable spectral gap at maximum bisection "
          "depth; spectrum may be too crowded for the sampling budget");
    const double mid = 0.5 * (u + v);
    run(u, mid, depth + 1);
    run(mid, v, depth + 1);
  }
};

}  // namespace detail

// net count of eigenvalues crossing zero, endpoints-closed at zero: computed
// as a telescoping sum of counts in [0, level] over certified subintervals
inline FlowResult spectral_flow(const WindowedSpectrum& spec, double s_a,
                                double s_b, FlowOptions opt = {}) {
  if (!(s_a < s_b)) throw std::invalid_argument("spectral_flow: empty interval");
  if (opt.samples_per_interval < 5)
    throw std::invalid_argument("spectral_flow: need at least 5 samples");
  if (!(spec.half_width > 0.0) || !spec.eval)
    throw std::invalid_argument("spectral_flow: invalid spectrum window");
  detail::FlowWorker w{spec, opt, {}};
  w.run(s_a, s_b, 0);
  FlowResult r = std::move(w.result);
  r.min_leaf_width = std::numeric_limits<double>::infinity();
  for (const auto& leaf : r.leaves) {
    r.flow += leaf.count_hi - leaf.count_lo;
    r.min_leaf_width = std::min(r.min_leaf_width, leaf.s_hi - leaf.s_lo);
  }
  return r;
}

// sign-indicator difference per eigenvalue branch; agrees with the certified
// flow whenever each branch stays inside the window
inline long crossing_flow(
    const std::vector<std::function<double(double)>>& branches, double s_a,
    double s_b, double snap = 1e-9) {
  long f = 0;
  for (const auto& br : branches) {
    const bool lo = br(s_a) >= -snap;
    const bool hi = br(s_b) >= -snap;
    f += long(hi) - long(lo);
  }
  return f;
}

}  // namespace sflab
