#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "chart.hpp"
#include "linalg.hpp"

namespace sflab {

// Matrix-valued differential form sampled on a chart: for each multi-index
// present, one fiber matrix per grid node. Absent components are zero.
class GradedMatrixForm {
 public:
  GradedMatrixForm() = default;
  GradedMatrixForm(Chart chart, std::size_t rank)
      : chart_(std::move(chart)), rank_(rank) {
    if (rank_ == 0) throw std::invalid_argument("GradedMatrixForm: rank 0");
  }

  const Chart& chart() const { return chart_; }
  std::size_t rank() const { return rank_; }

  bool has(std::uint32_t mask) const { return comps_.count(mask) != 0; }

  std::vector<CMat>& component(std::uint32_t mask) {
    check_mask(mask);
    auto it = comps_.find(mask);
    if (it == comps_.end()) {
      it = comps_.emplace(mask, std::vector<CMat>(chart_.n_nodes(), CMat(rank_)))
               .first;
    }
    return it->second;
  }
  const std::vector<CMat>& component(std::uint32_t mask) const {
    auto it = comps_.find(mask);
    if (it == comps_.end())
      throw std::out_of_range("GradedMatrixForm: component absent");
    return it->second;
  }

  const std::map<std::uint32_t, std::vector<CMat>>& components() const {
    return comps_;
  }

  void drop_negligible(double tol = 0.0) {
    for (auto it = comps_.begin(); it != comps_.end();) {
      double m = 0.0;
      for (const auto& v : it->second) m = std::max(m, v.norm_inf());
      it = (m <= tol) ? comps_.erase(it) : ++it;
    }
  }

  GradedMatrixForm& operator+=(const GradedMatrixForm& o) {
    check_compatible(o);
    for (const auto& [mask, data] : o.comps_) {
      auto& mine = component(mask);
      for (std::size_t i = 0; i < data.size(); ++i) mine[i] += data[i];
    }
    return *this;
  }
  GradedMatrixForm& operator-=(const GradedMatrixForm& o) {
    check_compatible(o);
    for (const auto& [mask, data] : o.comps_) {
      auto& mine = component(mask);
      for (std::size_t i = 0; i < data.size(); ++i) mine[i] -= data[i];
    }
    return *this;
  }
  GradedMatrixForm& operator*=(cplx c) {
    for (auto& [mask, data] : comps_)
      for (auto& v : data) v *= c;
    return *this;
  }

  friend GradedMatrixForm operator+(GradedMatrixForm a, const GradedMatrixForm& b) {
    return a += b;
  }
  friend GradedMatrixForm operator-(GradedMatrixForm a, const GradedMatrixForm& b) {
    return a -= b;
  }
  friend GradedMatrixForm operator*(cplx c, GradedMatrixForm a) { return a *= c; }

  GradedMatrixForm dagger() const {
    GradedMatrixForm r(chart_, rank_);
    for (const auto& [mask, data] : comps_) {
      auto& out = r.component(mask);
      for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].dagger();
    }
    return r;
  }

  double norm_inf() const {
    double m = 0.0;
    for (const auto& [mask, data] : comps_)
      for (const auto& v : data) m = std::max(m, v.norm_inf());
    return m;
  }

  void check_compatible(const GradedMatrixForm& o) const {
    if (rank_ != o.rank_)
      throw std::invalid_argument("GradedMatrixForm: rank mismatch");
    if (!chart_.same_grid(o.chart_))
      throw std::invalid_argument("GradedMatrixForm: chart mismatch");
  }

 private:
  void check_mask(std::uint32_t mask) const {
    if (mask >> chart_.dim())
      throw std::invalid_argument("GradedMatrixForm: axis outside chart");
  }
  Chart chart_;
  std::size_t rank_ = 1;
  std::map<std::uint32_t, std::vector<CMat>> comps_;
};

// trace-valued forms are the rank-1 case
using ScalarForm = GradedMatrixForm;

// Sample a form from per-point component callbacks. The provider receives the
// node coordinates and fills one matrix per listed multi-index.
inline GradedMatrixForm sample_form(
    const Chart& chart, std::size_t rank, const std::vector<std::uint32_t>& masks,
    const std::function<std::vector<CMat>(const std::vector<double>&)>& provider) {
  GradedMatrixForm f(chart, rank);
  std::vector<std::vector<CMat>*> slots;
  for (auto m : masks) slots.push_back(&f.component(m));
  for (std::size_t node = 0; node < chart.n_nodes(); ++node) {
    auto vals = provider(chart.point(node));
    if (vals.size() != masks.size())
      throw std::invalid_argument("sample_form: provider arity mismatch");
    for (std::size_t k = 0; k < masks.size(); ++k)
      (*slots[k])[node] = std::move(vals[k]);
  }
  return f;
}

inline ScalarForm constant_scalar(const Chart& chart, cplx value,
                                  std::uint32_t mask = 0) {
  ScalarForm f(chart, 1);
  auto& data = f.component(mask);
  for (auto& v : data) v(0, 0) = value;
  return f;
}

}  // namespace sflab
