#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sflab {

using cplx = std::complex<double>;

// Dense square complex matrix, row major. Small ranks throughout (fiber
// matrices are NxN with N <= ~4, operator matrices a few hundred rows).
class CMat {
 public:
  CMat() : n_(0) {}
  explicit CMat(std::size_t n, cplx fill = cplx(0.0, 0.0))
      : n_(n), a_(n * n, fill) {}

  static CMat identity(std::size_t n) {
    CMat m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static CMat scalar(std::size_t n, cplx v) {
    CMat m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = v;
    return m;
  }

  std::size_t rows() const { return n_; }
  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return a_[i * n_ + j];
  }

  CMat& operator+=(const CMat& o) {
    check_same(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  CMat& operator-=(const CMat& o) {
    check_same(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  CMat& operator*=(cplx c) {
    for (auto& v : a_) v *= c;
    return *this;
  }

  friend CMat operator+(CMat a, const CMat& b) { return a += b; }
  friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
  friend CMat operator*(cplx c, CMat a) { return a *= c; }
  friend CMat operator*(CMat a, cplx c) { return a *= c; }

  friend CMat operator*(const CMat& a, const CMat& b) {
    a.check_same(b);
    const std::size_t n = a.n_;
    CMat r(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx(0.0, 0.0)) continue;
        for (std::size_t j = 0; j < n; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  CMat dagger() const {
    CMat r(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }

  double norm_inf() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  void check_same(const CMat& o) const {
    if (n_ != o.n_) throw std::invalid_argument("CMat: dimension mismatch");
  }
  std::size_t n_;
  std::vector<cplx> a_;
};

inline double hermiticity_defect(const CMat& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.rows(); ++j)
      m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
  return m;
}

// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations. Each sweep
// annihilates every off-diagonal pair once; convergence is quadratic, so a
// handful of sweeps reaches the termination threshold (largest off-diagonal
// modulus below 1e-13 relative to the diagonal scale). Values only, ascending.
inline std::vector<double> hermitian_eigenvalues(CMat a) {
  const std::size_t n = a.rows();
  if (n == 0) return {};
  if (hermiticity_defect(a) > 1e-10 * std::max(1.0, a.norm_inf()))
    throw std::invalid_argument("hermitian_eigenvalues: matrix not Hermitian");
  // fold roundoff asymmetry away so rotations see an exactly Hermitian block
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx m = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = m;
      a(j, i) = std::conj(m);
    }

  auto off_max = [&]() {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        m = std::max(m, std::abs(a(i, j)));
    return m;
  };
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    scale = std::max(scale, std::abs(a(i, i).real()));
  const double tol = 1e-13 * scale;

  const int max_sweeps = 60;
  double prev_off = off_max();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (prev_off <= tol) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double abs_apq = std::abs(apq);
        if (abs_apq <= tol * 1e-2) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // phase that makes the pivot real, then a real Jacobi rotation
        const cplx phase = apq / abs_apq;
        const double tau = (app - aqq) / (2.0 * abs_apq);
        const double t =
            (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx u_pq = -s * phase;  // U = [[c, -s*phase],[s*conj(phase), c]]
        const cplx u_qp = s * std::conj(phase);
        // A <- U^dagger A U, touching rows/cols p and q only
        for (std::size_t i = 0; i < n; ++i) {
          const cplx aip = a(i, p), aiq = a(i, q);
          a(i, p) = aip * c + aiq * u_qp;
          a(i, q) = aip * u_pq + aiq * c;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const cplx apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj + std::conj(u_qp) * aqj;
          a(q, j) = std::conj(u_pq) * apj + c * aqj;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = cplx(a(p, p).real(), 0.0);
        a(q, q) = cplx(a(q, q).real(), 0.0);
      }
    }
    const double cur = off_max();
    if (cur <= tol) {
      prev_off = cur;
      break;
    }
    if (cur > 0.9 * prev_off && sweep > 4)
      throw std::runtime_error("hermitian_eigenvalues: Jacobi stalled");
    prev_off = cur;
  }
  if (prev_off > tol)
    throw std::runtime_error("hermitian_eigenvalues: no convergence");

  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i).real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Singular values of a real matrix via the Hermitian eigensolver applied to
// M^T M. Adequate at the small dimensions used for operator-norm bounds.
inline std::vector<double> singular_values(const std::vector<std::vector<double>>& m) {
  const std::size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n) throw std::invalid_argument("singular_values: not square");
  CMat g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += m[k][i] * m[k][j];
      g(i, j) = s;
    }
  auto ev = hermitian_eigenvalues(g);
  std::vector<double> sv(n);
  for (std::size_t i = 0; i < n; ++i)
    sv[n - 1 - i] = std::sqrt(std::max(0.0, ev[i]));
  return sv;  // descending
}

}  // namespace sflab
