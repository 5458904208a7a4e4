#pragma once

// Whitened generalized magnitude squared coherence (GMSC) features.
//
// Activation:   R_w = C_v^{-H} R_y(t)     C_v^{-1},  C_v = chol(R_y(t - t_v))   (recursive estimator)
// Deactivation: R_w = C_y^{-H} R_y(t-t_v) C_y^{-1},  C_y = chol(R_y(t))         (sliding estimator)
//
// gamma = (lambda_max(D^{-1/2} R_w D^{-1/2}) - 1) / (M - 1), D = diag(R_w).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sccount/covariance.hpp"
#include "sccount/errors.hpp"
#include "sccount/hermitian.hpp"

namespace sccount {

struct WhitenedMatrix {
  CMatrix R_w;
  double trace = 0.0;
};

inline constexpr double kSilentDiagonal = 1e-30;
inline constexpr double kEscalatedLoad = 1e-3;
// Loading floor for an all-zero reference (digital silence).
inline constexpr double kAbsoluteLoadFloor = 1e-20;

namespace detail {

// Hermitian work matrix with split real and imaginary parts.
template <std::size_t n>
struct SplitMatrix {
  double re[n][n];
  double im[n][n];
};

// R_w = C^{-H} N C^{-1}, C the upper Cholesky factor of ref + load * mean_diag * I
// with the escalation ladder. Fills the lower triangle of r; returns its trace.
template <std::size_t n>
double whiten_split(const CMatrix& num, const CMatrix& ref, double diag_load, SplitMatrix<n>& r) {
  const double mean_diag = std::max(ref.trace() / static_cast<double>(n), kAbsoluteLoadFloor);
  double cr[n][n], ci[n][n], cinv[n];
  bool ok = false;
  for (double load : {diag_load, kEscalatedLoad}) {
    const double shift = load * mean_diag;
    ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      double dd = ref(i, i).real() + shift;
      for (std::size_t k = 0; k < i; ++k) dd -= cr[k][i] * cr[k][i] + ci[k][i] * ci[k][i];
      if (!(dd > 0.0) || !std::isfinite(dd)) {
        ok = false;
        break;
      }
      const double cii = std::sqrt(dd);
      const double inv = 1.0 / cii;
      cr[i][i] = cii;
      ci[i][i] = 0.0;
      cinv[i] = inv;
      for (std::size_t j = i + 1; j < n; ++j) {
        double sr = ref(i, j).real(), si = ref(i, j).imag();
        for (std::size_t k = 0; k < i; ++k) {
          sr -= cr[k][i] * cr[k][j] + ci[k][i] * ci[k][j];
          si -= cr[k][i] * ci[k][j] - ci[k][i] * cr[k][j];
        }
        cr[i][j] = sr * inv;
        ci[i][j] = si * inv;
      }
    }
    if (ok) break;
  }
  if (!ok) throw NumericError("whiten: reference not positive definite");

  // X = C^{-H} N, then R_w = C^{-H} X^H (N is Hermitian).
  double xr[n][n], xi[n][n];
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      double sr = num(i, j).real(), si = num(i, j).imag();
      for (std::size_t k = 0; k < i; ++k) {
        sr -= cr[k][i] * xr[k][j] + ci[k][i] * xi[k][j];
        si -= cr[k][i] * xi[k][j] - ci[k][i] * xr[k][j];
      }
      xr[i][j] = sr * cinv[i];
      xi[i][j] = si * cinv[i];
    }
  // Lower triangle only; above the diagonal of column j, R_w(k, j) = conj(R_w(j, k)).
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j; i < n; ++i) {
      double sr = xr[j][i], si = -xi[j][i];
      for (std::size_t k = 0; k < j; ++k) {
        sr -= cr[k][i] * r.re[j][k] - ci[k][i] * r.im[j][k];
        si -= -cr[k][i] * r.im[j][k] - ci[k][i] * r.re[j][k];
      }
      for (std::size_t k = j; k < i; ++k) {
        sr -= cr[k][i] * r.re[k][j] + ci[k][i] * r.im[k][j];
        si -= cr[k][i] * r.im[k][j] - ci[k][i] * r.re[k][j];
      }
      r.re[i][j] = sr * cinv[i];
      r.im[i][j] = si * cinv[i];
    }
  double tr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.im[i][i] = 0.0;
    tr += r.re[i][i];
  }
  return tr;
}

// gamma from the lower triangle of a Hermitian matrix; a is overwritten.
template <std::size_t n>
double gmsc_split(SplitMatrix<n>& a) {
  double isq[n];
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a.re[i][i];
    if (!(d > kSilentDiagonal)) return 0.0;
    isq[i] = 1.0 / std::sqrt(d);
  }
  for (std::size_t i = 0; i < n; ++i) {
    a.re[i][i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double s = isq[i] * isq[j];
      a.re[i][j] *= s;
      a.im[i][j] *= s;
    }
  }
  double lmax;
  if constexpr (n == 1) {
    return 0.0;
  } else if constexpr (n == 2) {
    lmax = 1.0 + std::sqrt(a.re[1][0] * a.re[1][0] + a.im[1][0] * a.im[1][0]);
  } else {
    // Householder tridiagonalization on the trailing lower triangle.
    for (std::size_t k = 0; k + 2 < n; ++k) {
      double sub = 0.0;
      for (std::size_t i = k + 2; i < n; ++i) sub += a.re[i][k] * a.re[i][k] + a.im[i][k] * a.im[i][k];
      if (sub == 0.0) continue;
      const double x0r = a.re[k + 1][k], x0i = a.im[k + 1][k];
      const double x0abs = std::sqrt(x0r * x0r + x0i * x0i);
      const double xnorm = std::sqrt(sub + x0abs * x0abs);
      const double pr = x0abs > 0.0 ? x0r / x0abs : 1.0;
      const double pi = x0abs > 0.0 ? x0i / x0abs : 0.0;
      double vr[n] = {}, vi[n] = {};
      vr[k + 1] = x0r + pr * xnorm;
      vi[k + 1] = x0i + pi * xnorm;
      for (std::size_t i = k + 2; i < n; ++i) {
        vr[i] = a.re[i][k];
        vi[i] = a.im[i][k];
      }
      double vv = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) vv += vr[i] * vr[i] + vi[i] * vi[i];
      const double tau = 2.0 / vv;
      double wr[n] = {}, wi[n] = {};
      for (std::size_t i = k + 1; i < n; ++i) {
        double sr = 0.0, si = 0.0;
        for (std::size_t j = k + 1; j < n; ++j) {
          const double ar = j <= i ? a.re[i][j] : a.re[j][i];
          const double ai = j <= i ? a.im[i][j] : -a.im[j][i];
          sr += ar * vr[j] - ai * vi[j];
          si += ar * vi[j] + ai * vr[j];
        }
        wr[i] = tau * sr;
        wi[i] = tau * si;
      }
      double vpr = 0.0, vpi = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) {
        vpr += vr[i] * wr[i] + vi[i] * wi[i];
        vpi += vr[i] * wi[i] - vi[i] * wr[i];
      }
      const double kr = 0.5 * tau * vpr, ki = 0.5 * tau * vpi;
      for (std::size_t i = k + 1; i < n; ++i) {
        wr[i] -= kr * vr[i] - ki * vi[i];
        wi[i] -= kr * vi[i] + ki * vr[i];
      }
      // A22 -= v w^H + w v^H, lower triangle only.
      for (std::size_t i = k + 1; i < n; ++i)
        for (std::size_t j = k + 1; j <= i; ++j) {
          a.re[i][j] -= vr[i] * wr[j] + vi[i] * wi[j] + wr[i] * vr[j] + wi[i] * vi[j];
          a.im[i][j] -= vi[i] * wr[j] - vr[i] * wi[j] + wi[i] * vr[j] - wr[i] * vi[j];
        }
      a.re[k + 1][k] = -pr * xnorm;
      a.im[k + 1][k] = -pi * xnorm;
    }
    std::array<double, kMaxChannels> d{}, e2{};
    for (std::size_t i = 0; i < n; ++i) d[i] = a.re[i][i];
    for (std::size_t i = 0; i + 1 < n; ++i)
      e2[i] = a.re[i + 1][i] * a.re[i + 1][i] + a.im[i + 1][i] * a.im[i + 1][i];
    lmax = tridiagonal_max_root<n>(d, e2);
  }
  return std::clamp((lmax - 1.0) / static_cast<double>(n - 1), 0.0, 1.0);
}

}  // namespace detail

inline WhitenedMatrix whiten(const CMatrix& numerator, const CMatrix& reference, double diag_load) {
  const std::size_t n = reference.dim();
  detail::require(numerator.dim() == n, "whiten: dimension mismatch");
  WhitenedMatrix out{CMatrix(n), 0.0};
  detail::with_dim(n, [&](auto nn) {
    detail::SplitMatrix<nn> r;
    out.trace = detail::whiten_split<nn>(numerator, reference, diag_load, r);
    for (std::size_t i = 0; i < nn; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        out.R_w(i, j) = cplx(r.re[i][j], r.im[i][j]);
        out.R_w(j, i) = std::conj(out.R_w(i, j));
      }
  });
  return out;
}

inline double gmsc(const CMatrix& r_w) {
  const std::size_t n = r_w.dim();
  detail::require(n >= 2, "gmsc: need at least 2 channels");
  CMatrix work = r_w;
  work.symmetrize();
  return detail::with_dim(n, [&](auto nn) {
    detail::SplitMatrix<nn> a;
    for (std::size_t i = 0; i < nn; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        a.re[i][j] = work(i, j).real();
        a.im[i][j] = work(i, j).imag();
      }
    return detail::gmsc_split<nn>(a);
  });
}

inline double gmsc(const WhitenedMatrix& w) { return gmsc(w.R_w); }

struct GmscFeatures {
  std::vector<double> activation;
  std::vector<double> deactivation;
  std::vector<double> act_traces;
  std::vector<double> deact_traces;

  // zeta_t: activation bins DC..Nyquist, then deactivation bins DC..Nyquist.
  std::vector<double> combined() const {
    std::vector<double> z(activation);
    z.insert(z.end(), deactivation.begin(), deactivation.end());
    return z;
  }
};

// GMSC of the whitened pair, or the silent-bin value when the numerator
// carries no power.
inline double whitened_gmsc(const CMatrix& numerator, const CMatrix& reference, double diag_load,
                            double& trace_out) {
  if (!(numerator.trace() > kSilentDiagonal)) {
    trace_out = 0.0;
    return 0.0;
  }
  const std::size_t n = reference.dim();
  return detail::with_dim(n, [&](auto nn) {
    detail::SplitMatrix<nn> r_w;
    trace_out = std::max(detail::whiten_split<nn>(numerator, reference, diag_load, r_w), 0.0);
    return detail::gmsc_split<nn>(r_w);
  });
}

// Fills `out` with per-bin features from the tracker's current state. When
// `with_deactivation` is false the deactivation vectors are left empty.
inline void extract(const CovarianceTracker& tracker, bool with_deactivation, GmscFeatures& out) {
  const std::size_t nb = tracker.num_bins();
  const double load = tracker.config().diag_load;
  out.activation.resize(nb);
  out.act_traces.resize(nb);
  out.deactivation.resize(with_deactivation ? nb : 0);
  out.deact_traces.resize(with_deactivation ? nb : 0);
  for (std::size_t f = 0; f < nb; ++f) {
    out.activation[f] = whitened_gmsc(tracker.recursive(f), tracker.reference_recursive(f), load,
                                      out.act_traces[f]);
    if (with_deactivation) {
      const auto pair = tracker.pair_deactivation(f);
      out.deactivation[f] = whitened_gmsc(pair.past, pair.current, load, out.deact_traces[f]);
    }
  }
}

inline GmscFeatures extract(const CovarianceTracker& tracker, bool with_deactivation = true) {
  GmscFeatures out;
  extract(tracker, with_deactivation, out);
  return out;
}

}  // namespace sccount
