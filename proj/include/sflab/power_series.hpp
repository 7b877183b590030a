#pragma once

#include <cstddef>
#include <vector>

namespace sflab {

// Real power series q(x) = sum_k coeff[k] x^k, truncated as needed by the
// caller (on a d-dimensional chart only terms with 2k <= d survive anyway).
struct CharPowerSeries {
  std::vector<double> coeff;

  CharPowerSeries derivative() const {
    CharPowerSeries q;
    for (std::size_t k = 1; k < coeff.size(); ++k)
      q.coeff.push_back(double(k) * coeff[k]);
    return q;
  }

  static CharPowerSeries exponential(std::size_t order) {
    CharPowerSeries q;
    double f = 1.0;
    q.coeff.push_back(1.0);
    for (std::size_t k = 1; k <= order; ++k) {
      f /= double(k);
      q.coeff.push_back(f);
    }
    return q;
  }

  static CharPowerSeries monomial(std::size_t k) {
    CharPowerSeries q;
    q.coeff.assign(k + 1, 0.0);
    q.coeff[k] = 1.0;
    return q;
  }
};

}  // namespace sflab
