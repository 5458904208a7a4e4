#pragma once

// Small dense complex matrices for spatial covariance work (M <= 6
// microphones). Storage is inline so per-bin matrices can live in flat
// vectors without heap traffic.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <type_traits>

#include "sccount/errors.hpp"

namespace sccount {

using cplx = std::complex<double>;

inline constexpr std::size_t kMaxChannels = 6;

class CMatrix {
 public:
  CMatrix() = default;
  explicit CMatrix(std::size_t n) : n_(n) {
    detail::require(n >= 1 && n <= kMaxChannels, "matrix dimension must be in [1, 6]");
  }

  static CMatrix identity(std::size_t n, double scale = 1.0) {
    CMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
    return m;
  }

  // y y^H
  static CMatrix outer(std::span<const cplx> y) {
    CMatrix m(y.size());
    m.add_outer(y, 1.0);
    return m;
  }

  std::size_t dim() const { return n_; }

  cplx& operator()(std::size_t r, std::size_t c) { return a_[r * kMaxChannels + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return a_[r * kMaxChannels + c]; }

  // this += w * y y^H
  void add_outer(std::span<const cplx> y, double w) {
    for (std::size_t r = 0; r < n_; ++r) {
      const cplx yr = w * y[r];
      for (std::size_t c = 0; c < n_; ++c) (*this)(r, c) += yr * std::conj(y[c]);
    }
  }

  CMatrix& operator+=(const CMatrix& o) {
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t c = 0; c < n_; ++c) (*this)(r, c) += o(r, c);
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t c = 0; c < n_; ++c) (*this)(r, c) -= o(r, c);
    return *this;
  }
  CMatrix& operator*=(double s) {
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t c = 0; c < n_; ++c) (*this)(r, c) *= s;
    return *this;
  }
  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(double s, CMatrix a) { return a *= s; }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.n_);
    for (std::size_t r = 0; r < a.n_; ++r)
      for (std::size_t k = 0; k < a.n_; ++k) {
        const cplx ark = a(r, k);
        for (std::size_t c = 0; c < a.n_; ++c) out(r, c) += ark * b(k, c);
      }
    return out;
  }

  CMatrix adjoint() const {
    CMatrix out(n_);
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t c = 0; c < n_; ++c) out(r, c) = std::conj((*this)(c, r));
    return out;
  }

  // (A + A^H) / 2, diagonal forced real.
  void symmetrize() {
    for (std::size_t r = 0; r < n_; ++r) {
      (*this)(r, r) = cplx((*this)(r, r).real(), 0.0);
      for (std::size_t c = r + 1; c < n_; ++c) {
        const cplx v = 0.5 * ((*this)(r, c) + std::conj((*this)(c, r)));
        (*this)(r, c) = v;
        (*this)(c, r) = std::conj(v);
      }
    }
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i).real();
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t c = 0; c < n_; ++c) s += std::norm((*this)(r, c));
    return std::sqrt(s);
  }

  double max_hermitian_defect() const {
    double d = 0.0;
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t c = 0; c < n_; ++c)
        d = std::max(d, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
    return d;
  }

 private:
  std::size_t n_ = 0;
  std::array<cplx, kMaxChannels * kMaxChannels> a_{};
};

// Upper Cholesky factor C with A = C^H C. Returns nullopt on a non-positive
// pivot. Only the upper triangle of A is read.
inline std::optional<CMatrix> cholesky_upper(const CMatrix& a) {
  const std::size_t n = a.dim();
  CMatrix c(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = a(i, i).real();
    for (std::size_t k = 0; k < i; ++k) d -= std::norm(c(k, i));
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    const double cii = std::sqrt(d);
    c(i, i) = cii;
    for (std::size_t j = i + 1; j < n; ++j) {
      cplx s = a(i, j);
      for (std::size_t k = 0; k < i; ++k) s -= std::conj(c(k, i)) * c(k, j);
      c(i, j) = s / cii;
    }
  }
  return c;
}

// Solves C^H X = B for X, C upper triangular (forward substitution on the
// lower-triangular C^H).
inline CMatrix solve_upper_adjoint(const CMatrix& c, const CMatrix& b) {
  const std::size_t n = c.dim();
  CMatrix x(n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = b(i, col);
      for (std::size_t k = 0; k < i; ++k) s -= std::conj(c(k, i)) * x(k, col);
      x(i, col) = s / c(i, i).real();
    }
  }
  return x;
}

// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
// Returned in ascending order. Intended for the tiny matrices used here.
inline std::array<double, kMaxChannels> hermitian_eigenvalues(CMatrix a) {
  const std::size_t n = a.dim();
  std::array<double, kMaxChannels> ev{};
  if (n == 1) {
    ev[0] = a(0, 0).real();
    return ev;
  }
  if (n == 2) {
    const double m = 0.5 * (a(0, 0).real() + a(1, 1).real());
    const double h = 0.5 * (a(0, 0).real() - a(1, 1).real());
    const double r = std::sqrt(h * h + std::norm(0.5 * (a(0, 1) + std::conj(a(1, 0)))));
    ev[0] = m - r;
    ev[1] = m + r;
    return ev;
  }

  a.symmetrize();
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) total += std::norm(a(r, c));
  // Off-diagonal mass below ~1e-11 of the norm perturbs eigenvalues at the
  // 1e-22 relative level.
  const double tol = 1e-22 * total;

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (off <= tol) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::sqrt(std::norm(apq));
        if (mag == 0.0) continue;
        // Unitary similarity: phase e^{-i phi} on index q, then a real Jacobi
        // rotation in the (p, q) plane that annihilates a(p, q).
        const cplx ph = std::conj(apq) / mag;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * cs;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const cplx arp = a(r, p);
          const cplx arq = a(r, q) * ph;
          const cplx np = cs * arp - sn * arq;
          const cplx nq = sn * arp + cs * arq;
          a(r, p) = np;
          a(p, r) = std::conj(np);
          a(r, q) = nq;
          a(q, r) = std::conj(nq);
        }
        a(p, p) = app - t * mag;
        a(q, q) = aqq + t * mag;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i).real();
  std::sort(ev.begin(), ev.begin() + static_cast<std::ptrdiff_t>(n));
  return ev;
}

namespace detail {

// Calls f(std::integral_constant<std::size_t, n>{}) so hot loops see a
// compile-time dimension.
template <typename F>
decltype(auto) with_dim(std::size_t n, F&& f) {
  switch (n) {
    case 1: return f(std::integral_constant<std::size_t, 1>{});
    case 2: return f(std::integral_constant<std::size_t, 2>{});
    case 3: return f(std::integral_constant<std::size_t, 3>{});
    case 4: return f(std::integral_constant<std::size_t, 4>{});
    case 5: return f(std::integral_constant<std::size_t, 5>{});
    case 6: return f(std::integral_constant<std::size_t, 6>{});
    default: throw UsageError("matrix dimension must be in [1, 6]");
  }
}

template <std::size_t n>
void tridiagonalize_fixed(CMatrix& a, std::array<double, kMaxChannels>& d, std::array<double, kMaxChannels>& e2) {
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double sub = 0.0;
    for (std::size_t i = k + 2; i < n; ++i) sub += std::norm(a(i, k));
    if (sub == 0.0) continue;
    const cplx x0 = a(k + 1, k);
    const double xnorm = std::sqrt(sub + std::norm(x0));
    const double x0abs = std::sqrt(std::norm(x0));
    const cplx phase = x0abs > 0.0 ? x0 / x0abs : cplx(1.0);
    // v = x + phase * |x| e1, avoiding cancellation.
    std::array<cplx, kMaxChannels> v{};
    v[k + 1] = x0 + phase * xnorm;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
    double vv = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vv += std::norm(v[i]);
    const double tau = 2.0 / vv;

    // p = tau A22 v, w = p - (tau/2)(v^H p) v, A22 -= v w^H + w v^H
    std::array<cplx, kMaxChannels> w{};
    for (std::size_t i = k + 1; i < n; ++i) {
      cplx s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      w[i] = tau * s;
    }
    cplx vp = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vp += std::conj(v[i]) * w[i];
    const cplx kk = 0.5 * tau * vp;
    for (std::size_t i = k + 1; i < n; ++i) w[i] -= kk * v[i];
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= v[i] * std::conj(w[j]) + w[i] * std::conj(v[j]);

    a(k + 1, k) = -phase * xnorm;
    a(k, k + 1) = std::conj(a(k + 1, k));
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = a(k, i) = 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i).real();
  for (std::size_t i = 0; i + 1 < n; ++i) e2[i] = std::norm(a(i + 1, i));
}

// Largest root of det(xI - T) for the symmetric tridiagonal T = (d, e2), by
// Laguerre iteration from an upper eigenvalue bound. For real-rooted
// polynomials the iterates decrease monotonically onto the largest root.
template <std::size_t n>
double tridiagonal_max_root(const std::array<double, kMaxChannels>& d, const std::array<double, kMaxChannels>& e2) {
  double x = -std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double el = i > 0 ? std::sqrt(e2[i - 1]) : 0.0;
    const double er = i + 1 < n ? std::sqrt(e2[i]) : 0.0;
    x = std::max(x, d[i] + el + er);
    scale = std::max(scale, std::abs(d[i]) + el + er);
  }
  if (scale == 0.0) return 0.0;
  // Also lambda_max <= m + s sqrt(n - 1), m = tr/n, s^2 = |T|_F^2/n - m^2.
  {
    double tr = 0.0, fro = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      tr += d[i];
      fro += d[i] * d[i] + (i + 1 < n ? 2.0 * e2[i] : 0.0);
    }
    const double m = tr / static_cast<double>(n);
    const double s2 = std::max(fro / static_cast<double>(n) - m * m, 0.0);
    const double ws = m + std::sqrt(s2 * static_cast<double>(n - 1));
    x = std::min(x, ws + 4.0 * std::numeric_limits<double>::epsilon() * scale);
  }

  constexpr double dn = static_cast<double>(n);
  for (int it = 0; it < 100; ++it) {
    // Pivots r_i of det(xI - T) = prod r_i and their first two derivatives;
    // g = p'/p, h = -(log p)''.
    double inv = 0.0, r1 = 0.0, r2 = 0.0, g = 0.0, h = 0.0;
    bool inside = false;
    for (std::size_t i = 0; i < n; ++i) {
      double ri = x - d[i], ri1 = 1.0, ri2 = 0.0;
      if (i > 0) {
        const double q = e2[i - 1] * inv;
        ri -= q;
        ri1 += q * r1 * inv;
        ri2 += q * inv * (r2 - 2.0 * r1 * r1 * inv);
      }
      if (!(ri > 0.0)) {
        inside = true;
        break;
      }
      inv = 1.0 / ri;
      r1 = ri1;
      r2 = ri2;
      const double gi = r1 * inv;
      g += gi;
      h += gi * gi - r2 * inv;
    }
    if (inside) break;  // rounding put x on or below the root
    const double disc = std::max((dn - 1.0) * (dn * h - g * g), 0.0);
    const double step = dn / (g + std::sqrt(disc));
    x -= step;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * scale) break;
  }
  return x;
}

// a is overwritten.
template <std::size_t n>
double max_eigenvalue_fixed(CMatrix& a) {
  if constexpr (n == 1) {
    return a(0, 0).real();
  } else if constexpr (n == 2) {
    const double m = 0.5 * (a(0, 0).real() + a(1, 1).real());
    const double h = 0.5 * (a(0, 0).real() - a(1, 1).real());
    return m + std::sqrt(h * h + std::norm(0.5 * (a(0, 1) + std::conj(a(1, 0)))));
  } else {
    std::array<double, kMaxChannels> d{}, e2{};
    tridiagonalize_fixed<n>(a, d, e2);
    return tridiagonal_max_root<n>(d, e2);
  }
}

}  // namespace detail

// Householder reduction of a Hermitian matrix to real symmetric tridiagonal
// form: diagonal d and squared off-diagonal moduli e2 (e2[i] couples i, i+1).
inline void hermitian_tridiagonalize(CMatrix a, std::array<double, kMaxChannels>& d,
                                     std::array<double, kMaxChannels>& e2) {
  a.symmetrize();
  detail::with_dim(a.dim(), [&](auto n) { detail::tridiagonalize_fixed<n>(a, d, e2); });
}

// Largest eigenvalue: tridiagonal reduction, then Laguerre on the
// characteristic polynomial. Closed form for n <= 2.
inline double hermitian_max_eigenvalue(CMatrix a) {
  a.symmetrize();
  return detail::with_dim(a.dim(), [&](auto n) { return detail::max_eigenvalue_fixed<n>(a); });
}

}  // namespace sccount
