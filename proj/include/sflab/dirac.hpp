#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "connection.hpp"
#include "linalg.hpp"
#include "spectral_flow.hpp"

namespace sflab {

struct SpectrumSlice {
  double s = 0.0;
  std::vector<double> values;  // ascending

  // (value, multiplicity) groups under the given resolution
  std::vector<std::pair<double, int>> clustered(double tol) const {
    std::vector<std::pair<double, int>> out;
    for (double v : values) {
      if (!out.empty() && v - out.back().first <= tol) {
        auto& [rep, mult] = out.back();
        rep = (rep * mult + v) / double(mult + 1);
        ++mult;
      } else {
        out.emplace_back(v, 1);
      }
    }
    return out;
  }
};

// Operator sigma * (-i) (d/dtheta + omega^s(d_theta)) on sections over the
// circle, cut off to Fourier modes |k| <= K. The spin offset selects the mode
// ladder: 0 for periodic sections, 1/2 for antiperiodic ones.
class CircleDiracFamily {
 public:
  CircleDiracFamily(ConnectionFamily fam, int cutoff, double spin_offset,
                    int sigma)
      : fam_(std::move(fam)),
        cutoff_(cutoff),
        spin_offset_(spin_offset),
        sigma_(sigma) {
    if (fam_.chart().dim() != 1 || !fam_.chart().axis(0).periodic)
      throw std::invalid_argument("CircleDiracFamily: family must live on a circle");
    if (cutoff_ < 1) throw std::invalid_argument("CircleDiracFamily: cutoff >= 1");
    if (sigma_ != 1 && sigma_ != -1)
      throw std::invalid_argument("CircleDiracFamily: sigma must be +-1");
    if (spin_offset_ != 0.0 && spin_offset_ != 0.5)
      throw std::invalid_argument("CircleDiracFamily: spin offset must be 0 or 1/2");
    const std::size_t n = fam_.chart().axis(0).count;
    if (n < 4 * std::size_t(cutoff_) + 1)
      throw std::invalid_argument(
          "CircleDiracFamily: grid too coarse for the mode cutoff (aliasing)");
  }

  const ConnectionFamily& family() const { return fam_; }
  int cutoff() const { return cutoff_; }
  double spin_offset() const { return spin_offset_; }
  int sigma() const { return sigma_; }
  std::size_t matrix_dim() const {
    return std::size_t(2 * cutoff_ + 1) * fam_.rank();
  }
  // eigenvalues beyond this can be distorted by the mode cutoff
  double trust_half_width() const {
    return 0.5 * (double(cutoff_) + spin_offset_) * base_frequency();
  }

  CMat matrix(double s) const {
    const std::size_t n_rank = fam_.rank();
    const int k_max = cutoff_;
    const double nu = base_frequency();
    const Chart& ch = fam_.chart();
    const std::size_t n = ch.axis(0).count;

    std::vector<CMat> w_nodes;
    w_nodes.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
      w_nodes.push_back(fam_.omega_at(s, ch.point(j))[0]);

    // twist coefficients W_m = (1/n) sum_j W(theta_j) e^{-i m nu theta_j}
    std::vector<CMat> what;
    what.reserve(std::size_t(4 * k_max + 1));
    const double theta0 = ch.axis(0).origin;
    for (int m = -2 * k_max; m <= 2 * k_max; ++m) {
      CMat acc(n_rank);
      for (std::size_t j = 0; j < n; ++j) {
        const double phase =
            -double(m) * nu * (theta0 + double(j) * ch.axis(0).spacing);
        acc += w_nodes[j] * std::polar(1.0, phase);
      }
      acc *= cplx(1.0 / double(n));
      what.push_back(std::move(acc));
    }
    auto coeff = [&](int m) -> const CMat& { return what[std::size_t(m + 2 * k_max)]; };

    const std::size_t dim = matrix_dim();
    CMat a(dim);
    const cplx minus_i(0.0, -1.0);
    for (int kj = -k_max; kj <= k_max; ++kj) {
      for (int kl = -k_max; kl <= k_max; ++kl) {
        const CMat& w = coeff(kj - kl);
        const std::size_t row0 = std::size_t(kj + k_max) * n_rank;
        const std::size_t col0 = std::size_t(kl + k_max) * n_rank;
        for (std::size_t al = 0; al < n_rank; ++al)
          for (std::size_t be = 0; be < n_rank; ++be) {
            cplx val = minus_i * w(al, be);
            if (kj == kl && al == be)
              val += (double(kj) + spin_offset_) * nu;
            a(row0 + al, col0 + be) = double(sigma_) * val;
          }
      }
    }

    const double defect = hermiticity_defect(a);
    if (defect > 1e-12 * std::max(1.0, a.norm_inf()))
      throw std::runtime_error("CircleDiracFamily: assembled matrix is not Hermitian");
    // fold in the defect so the eigensolver sees an exactly Hermitian matrix
    CMat sym = (a + a.dagger()) * cplx(0.5);
    return sym;
  }

  std::vector<double> eigenvalues(double s) const {
    return hermitian_eigenvalues(matrix(s));
  }

  SpectrumSlice window(double s, double half_width) const {
    if (half_width > trust_half_width() + 1e-12)
      throw std::invalid_argument(
          "CircleDiracFamily: window exceeds the trusted part of the spectrum");
    SpectrumSlice slice{s, {}};
    for (double v : eigenvalues(s))
      if (std::abs(v) <= half_width) slice.values.push_back(v);
    return slice;
  }

  // refuses to answer when eigenvalues sit in the ambiguous shell between
  // zero_tol and 2*zero_tol
  std::size_t kernel_dim(double s, double zero_tol = 1e-8) const {
    std::size_t dim = 0;
    for (double v : eigenvalues(s)) {
      const double a = std::abs(v);
      if (a <= zero_tol)
        ++dim;
      else if (a <= 2.0 * zero_tol)
        throw std::runtime_error(
            "CircleDiracFamily: eigenvalue in the ambiguous kernel shell");
    }
    return dim;
  }

  WindowedSpectrum windowed(double half_width) const {
    if (half_width > trust_half_width() + 1e-12)
      throw std::invalid_argument(
          "CircleDiracFamily: window exceeds the trusted part of the spectrum");
    auto self = *this;
    return {half_width, [self, half_width](double s) {
              return self.window(s, half_width).values;
            }};
  }

 private:
  double base_frequency() const {
    return 2.0 * pi_circle / fam_.chart().axis(0).length();
  }
  static constexpr double pi_circle = 3.141592653589793238462643;

  ConnectionFamily fam_;
  int cutoff_;
  double spin_offset_;
  int sigma_;
};

}  // namespace sflab
