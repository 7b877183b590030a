#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace sflab {

// One grid axis: uniformly spaced samples, either periodic (samples cover
// [origin, origin + count*spacing), wrap-around) or a closed interval
// (samples cover [origin, origin + (count-1)*spacing], endpoints included).
struct Axis {
  std::size_t count = 0;
  double spacing = 0.0;
  bool periodic = false;
  double origin = 0.0;

  double length() const {
    return periodic ? count * spacing : (count - 1) * spacing;
  }
  double coord(std::size_t i) const { return origin + double(i) * spacing; }
};

// Product grid on a coordinate box, with an orientation sign and an optional
// per-node volume weight (defaults to 1 everywhere).
class Chart {
 public:
  Chart() = default;
  explicit Chart(std::vector<Axis> axes, int orientation = +1)
      : axes_(std::move(axes)), orientation_(orientation) {
    if (axes_.empty() || axes_.size() > 4)
      throw std::invalid_argument("Chart: dimension must be 1..4");
    if (orientation_ != 1 && orientation_ != -1)
      throw std::invalid_argument("Chart: orientation must be +-1");
    strides_.assign(axes_.size(), 1);
    for (std::size_t a = axes_.size(); a-- > 0;) {
      if (axes_[a].count < 4)
        throw std::invalid_argument("Chart: need at least 4 samples per axis");
      if (!(axes_[a].spacing > 0.0))
        throw std::invalid_argument("Chart: spacing must be positive");
      if (a + 1 < axes_.size())
        strides_[a] = strides_[a + 1] * axes_[a + 1].count;
    }
    n_nodes_ = strides_[0] * axes_[0].count;
  }

  static Chart circle(std::size_t n, double length = 6.283185307179586476925287,
                      double origin = 0.0) {
    return Chart({Axis{n, length / double(n), true, origin}});
  }
  static Chart torus(std::vector<std::size_t> counts,
                     double length = 6.283185307179586476925287) {
    std::vector<Axis> ax;
    for (auto n : counts) ax.push_back(Axis{n, length / double(n), true, 0.0});
    return Chart(std::move(ax));
  }
  static Chart interval(std::size_t n, double a, double b) {
    return Chart({Axis{n, (b - a) / double(n - 1), false, a}});
  }

  std::size_t dim() const { return axes_.size(); }
  std::size_t n_nodes() const { return n_nodes_; }
  const Axis& axis(std::size_t a) const { return axes_[a]; }
  const std::vector<Axis>& axes() const { return axes_; }
  int orientation() const { return orientation_; }

  void set_volume_weight(std::vector<double> w) {
    if (w.size() != n_nodes_)
      throw std::invalid_argument("Chart: weight size mismatch");
    weight_ = std::make_shared<const std::vector<double>>(std::move(w));
  }
  double volume_weight(std::size_t node) const {
    return weight_ ? (*weight_)[node] : 1.0;
  }

  std::size_t stride(std::size_t a) const { return strides_[a]; }
  std::size_t axis_index(std::size_t node, std::size_t a) const {
    return (node / strides_[a]) % axes_[a].count;
  }
  // flat index of the node shifted by `step` along axis a; periodic axes wrap,
  // closed axes must stay in range (callers handle boundary stencils)
  std::size_t shifted(std::size_t node, std::size_t a, long step) const {
    const long n = long(axes_[a].count);
    long i = long(axis_index(node, a)) + step;
    if (axes_[a].periodic) {
      i = ((i % n) + n) % n;
    } else if (i < 0 || i >= n) {
      throw std::out_of_range("Chart: shift leaves closed axis");
    }
    return node + (std::size_t(i) - axis_index(node, a)) * strides_[a];
  }

  std::vector<double> point(std::size_t node) const {
    std::vector<double> x(dim());
    for (std::size_t a = 0; a < dim(); ++a)
      x[a] = axes_[a].coord(axis_index(node, a));
    return x;
  }

  bool same_grid(const Chart& o) const {
    if (dim() != o.dim() || orientation_ != o.orientation_) return false;
    for (std::size_t a = 0; a < dim(); ++a) {
      const Axis &x = axes_[a], &y = o.axes_[a];
      if (x.count != y.count || x.periodic != y.periodic) return false;
      if (std::abs(x.spacing - y.spacing) > 1e-12 * (1.0 + std::abs(x.spacing)))
        return false;
      if (std::abs(x.origin - y.origin) > 1e-12 * (1.0 + std::abs(x.origin)))
        return false;
    }
    return true;
  }

 private:
  std::vector<Axis> axes_;
  int orientation_ = +1;
  std::vector<std::size_t> strides_;
  std::size_t n_nodes_ = 0;
  std::shared_ptr<const std::vector<double>> weight_;
};

// Multi-indices label antisymmetrized coordinate directions as bit masks;
// bit a set means dx_a is a factor, factors ordered by increasing axis.
namespace multi_index {

inline unsigned grade(std::uint32_t mask) { return std::popcount(mask); }

inline bool disjoint(std::uint32_t i, std::uint32_t j) { return (i & j) == 0; }

// sign of the shuffle merging the increasing lists I and J into increasing
// order: (-1)^{#{(a,b) in IxJ : a > b}}
inline int merge_sign(std::uint32_t i, std::uint32_t j) {
  int inv = 0;
  for (std::uint32_t b = j; b; b &= b - 1) {
    const int axis = std::countr_zero(b);
    inv += std::popcount(i >> (axis + 1));
  }
  return (inv % 2 == 0) ? 1 : -1;
}

inline std::vector<int> axes_of(std::uint32_t mask) {
  std::vector<int> v;
  for (std::uint32_t b = mask; b; b &= b - 1) v.push_back(std::countr_zero(b));
  return v;
}

inline std::uint32_t from_axes(const std::vector<int>& axes) {
  std::uint32_t m = 0;
  for (int a : axes) {
    const std::uint32_t bit = 1u << a;
    if (m & bit) throw std::invalid_argument("multi_index: repeated axis");
    m |= bit;
  }
  return m;
}

}  // namespace multi_index

}  // namespace sflab
