#pragma once

// Adaptive Gauss-Kronrod (G7/K15) quadrature for scalar and fixed-size
// Eigen-valued integrands. Subintervals are refined depth-first and summed
// in a fixed left-to-right order, so results are bitwise reproducible.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <type_traits>
#include <vector>

namespace vpatch::quad {

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_depth = 40;
};

template <typename T>
struct Result {
  T value;
  double error_estimate = 0.0;
  bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
double norm_of(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) {
    return std::abs(v);
  } else {
    return v.cwiseAbs().maxCoeff();
  }
}

template <typename T>
T zero_like(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) {
    return T(0);
  } else {
    return T::Zero(v.rows(), v.cols());
  }
}

template <typename T, typename F>
void gk15(F& f, double a, double b, T& kronrod, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T gauss = fc * kGauss[3];
  kronrod = fc * kKronrod[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kNodes[j];
    const T f1 = f(c - dx);
    const T f2 = f(c + dx);
    kronrod += (f1 + f2) * kKronrod[j];
    if (j % 2 == 1) gauss += (f1 + f2) * kGauss[j / 2];
  }
  kronrod *= h;
  gauss *= h;
  err = norm_of(T(kronrod - gauss));
}

template <typename T, typename F>
void adapt(F& f, double a, double b, double tol, int depth, const Options& opt, T& sum,
           double& err_sum, bool& converged) {
  T k;
  double err = 0.0;
  gk15<T>(f, a, b, k, err);
  if (err <= tol || depth >= opt.max_depth || b - a < 1e-15 * (1.0 + std::abs(a))) {
    if (err > tol) converged = false;
    sum += k;
    err_sum += err;
    return;
  }
  const double m = 0.5 * (a + b);
  adapt<T>(f, a, m, 0.5 * tol, depth + 1, opt, sum, err_sum, converged);
  adapt<T>(f, m, b, 0.5 * tol, depth + 1, opt, sum, err_sum, converged);
}

}  // namespace detail

/// Integrate f over [a, b]. The tolerance is max(abs_tol, rel_tol * |coarse estimate|).
template <typename F>
auto integrate(F&& f, double a, double b, const Options& opt = {})
    -> Result<std::decay_t<decltype(f(a))>> {
  using T = std::decay_t<decltype(f(a))>;
  T coarse;
  double err0 = 0.0;
  detail::gk15<T>(f, a, b, coarse, err0);
  const double tol = std::max(opt.abs_tol, opt.rel_tol * detail::norm_of(coarse));
  T sum = detail::zero_like(coarse);
  double err = 0.0;
  bool converged = true;
  detail::adapt<T>(f, a, b, tol, 0, opt, sum, err, converged);
  // A leaf may miss its halved share near an endpoint singularity; the global
  // estimate is what counts.
  return {sum, err, converged || err <= tol};
}

/// Integrate over [a, b] split at the given breakpoints (unsorted, may lie outside).
template <typename F>
auto integrate_with_breaks(F&& f, double a, double b, std::vector<double> breaks,
                           const Options& opt = {}) -> Result<std::decay_t<decltype(f(a))>> {
  using T = std::decay_t<decltype(f(a))>;
  std::vector<double> cuts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks) {
    if (x > cuts.back() + 1e-14 && x < b - 1e-14) cuts.push_back(x);
  }
  cuts.push_back(b);
  Result<T> total{detail::zero_like(f(a)), 0.0, true};
  const double n = static_cast<double>(cuts.size() - 1);
  Options local = opt;
  local.abs_tol = opt.abs_tol / n;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto r = integrate(f, cuts[i], cuts[i + 1], local);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.converged = total.converged && r.converged;
  }
  return total;
}

}  // namespace vpatch::quad
