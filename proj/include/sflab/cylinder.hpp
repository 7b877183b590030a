#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace sflab {

// Index bookkeeping for d/dt + D(t) on [a,b] x (cross-section), one mode per
// eigenvalue branch of D. With spectral boundary conditions a branch carries
// a solution exactly when it changes sign the right way; ind_relaxed uses the
// slackened condition at the outgoing end that absorbs its kernel.
struct ApsCounts {
  long ind_aps = 0;
  long ind_relaxed = 0;
  long h_a = 0, h_b = 0;
  long kernel = 0, cokernel = 0;
};

inline ApsCounts aps_index(
    const std::vector<std::function<double(double)>>& branches, double a,
    double b, double snap = 1e-9) {
  if (!(a < b)) throw std::invalid_argument("aps_index: empty interval");
  ApsCounts c;
  for (const auto& br : branches) {
    const double la = br(a), lb = br(b);
    const bool a_neg = la < -snap, b_neg = lb < -snap;
    const bool a_zero = std::abs(la) <= snap, b_zero = std::abs(lb) <= snap;
    if (a_zero) ++c.h_a;
    if (b_zero) ++c.h_b;
    const bool b_pos = lb > snap;
    if (a_neg && b_pos) ++c.kernel;
    if (!a_neg && !b_pos) ++c.cokernel;
    if (a_neg && !b_neg) ++c.ind_relaxed;
    if (!a_neg && b_neg) --c.ind_relaxed;
  }
  c.ind_aps = c.kernel - c.cokernel;
  return c;
}

// branches traversed backwards in the parameter
inline std::vector<std::function<double(double)>> reversed_branches(
    const std::vector<std::function<double(double)>>& branches, double a,
    double b) {
  std::vector<std::function<double(double)>> out;
  out.reserve(branches.size());
  for (const auto& br : branches)
    out.push_back([br, a, b](double t) { return br(a + b - t); });
  return out;
}

}  // namespace sflab
