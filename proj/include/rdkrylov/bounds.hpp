#pragma once

// Error bounds for the restricted-denominator rational Arnoldi approximation
// of phi_k(hL)v, with F(L) contained in the sector |arg(-z)| <= theta.
//
// All products of factorials, powers of tau and (m+k+1)^(m+k+1) are formed
// in log space; bounds past the double range come back as +inf.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "rdkrylov/errors.hpp"
#include "rdkrylov/laguerre.hpp"

namespace rdkrylov {

/// Default Crouzeix constant; 1 for self-adjoint operators.
inline constexpr double crouzeix_default = 11.08;

/// Upper limit of theta for the a-priori rate bound (root of rho = 1).
inline constexpr double theta_star = 0.48124;

struct BoundInputs {
  int k = 0;
  int m = 1;
  double tau = 1.0;
  double theta = 0.0;
  double crouzeix = crouzeix_default;
  double subdiag_product = 1.0;
};

struct AposterioriBounds {
  double fe1;
  double fe2;
};

namespace detail {

inline double log_factorial(int n) { return std::lgamma(n + 1.0); }

inline double safe_exp(double x) {
  return x > std::log(std::numeric_limits<double>::max())
             ? std::numeric_limits<double>::infinity()
             : std::exp(x);
}

inline void require_theta_below(double theta, double limit, const char* where) {
  if (!(theta >= 0.0) || !(theta < limit)) {
    throw ThetaOutOfRange(std::string(where) + ": theta = " + std::to_string(theta));
  }
}

} // namespace detail

/// c_j(theta) = (1 + sqrt(2(1 - cos theta)))^j.
inline double c_coeff(int j, double theta) {
  return std::pow(1.0 + std::sqrt(2.0 * (1.0 - std::cos(theta))), j);
}

/// C_{k,m}(tau, theta) = (m-1)!/(m+k)! sum_{j<m} |L^(k)_{m-1-j}(tau)| c_j(theta).
inline double ckm(int k, int m, double tau, double theta) {
  if (m < 1 || k < 0) {
    throw InvalidArgument("ckm: need m >= 1, k >= 0");
  }
  double sum = 0.0;
  for (int j = 0; j < m; ++j) {
    sum += std::abs(laguerre(m - 1 - j, k, tau)) * c_coeff(j, theta);
  }
  return detail::safe_exp(detail::log_factorial(m - 1) - detail::log_factorial(m + k) +
                          std::log(sum));
}

/// C'_{k,m}(theta) = (m-1)!/(m+k)! sum_{j<m} binom(m+k-j-1, k) c_j(theta).
inline double ckm_prime(int k, int m, double theta) {
  if (m < 1 || k < 0) {
    throw InvalidArgument("ckm_prime: need m >= 1, k >= 0");
  }
  double sum = 0.0;
  for (int j = 0; j < m; ++j) {
    sum += detail::binomial(m + k - j - 1, k) * c_coeff(j, theta);
  }
  return detail::safe_exp(detail::log_factorial(m - 1) - detail::log_factorial(m + k) +
                          std::log(sum));
}

/// Logs of the a-posteriori bounds; -inf when the subdiagonal product is 0.
inline AposterioriBounds log_bound_aposteriori(const BoundInputs& in) {
  detail::require_theta_below(in.theta, std::numbers::pi / 3.0, "bound_aposteriori");
  if (!(in.tau > 0.0) || in.m < 1 || in.k < 0 || in.subdiag_product < 0.0) {
    throw InvalidArgument("bound_aposteriori: bad inputs");
  }
  if (in.subdiag_product == 0.0) {
    const double ninf = -std::numeric_limits<double>::infinity();
    return {ninf, ninf};
  }
  const int mk = in.m + in.k;
  const double cos_t = std::cos(in.theta);
  const double common = std::log(in.crouzeix) - (mk + 1) - mk * std::log(in.tau) +
                        (mk + 1) * std::log(2.0 * (mk + 1) / (2.0 * cos_t - 1.0)) +
                        std::log(in.subdiag_product);
  const double lfe1 =
      common + in.tau * (cos_t - 0.5) + std::log(ckm(in.k, in.m, in.tau, in.theta));
  const double lfe2 = common + in.tau * cos_t + std::log(ckm_prime(in.k, in.m, in.theta));
  return {lfe1, lfe2};
}

/// Sector bounds (fe1, fe2) on ||phi_k(hL)v - y_m||, valid for theta < pi/3.
inline AposterioriBounds bound_aposteriori(const BoundInputs& in) {
  const auto lb = log_bound_aposteriori(in);
  return {detail::safe_exp(lb.fe1), detail::safe_exp(lb.fe2)};
}

/// The exponential (k = 0) form of the fe2 bound, written with the plain sum
/// of c_j(theta).
inline double bound_exponential(int m, double tau, double theta, double crouzeix,
                                double subdiag_product) {
  detail::require_theta_below(theta, std::numbers::pi / 3.0, "bound_exponential");
  if (subdiag_product == 0.0) {
    return 0.0;
  }
  const double cos_t = std::cos(theta);
  double csum = 0.0;
  for (int j = 0; j < m; ++j) {
    csum += c_coeff(j, theta);
  }
  const double l = std::log(crouzeix) + tau * cos_t - m - 1 - std::log(double(m)) -
                   m * std::log(tau) +
                   (m + 1) * std::log(2.0 * (m + 1) / (2.0 * cos_t - 1.0)) +
                   std::log(csum) + std::log(subdiag_product);
  return detail::safe_exp(l);
}

/// Bound for F(L) inside the sector and the disk |z| <= R; `hR` is h*R.
///
/// The maximum over s in [0, hR] is located on a 512-point grid and then
/// refined by golden-section search inside the best grid cell.
inline double bound_bounded_sector(const BoundInputs& in, double hR) {
  if (!(hR >= 0.0) || !(in.tau > 0.0) || in.m < 1 || in.k < 0) {
    throw InvalidArgument("bound_bounded_sector: bad inputs");
  }
  if (in.subdiag_product == 0.0) {
    return 0.0;
  }
  const int mk1 = in.m + in.k + 1;
  const std::complex<double> dir = std::polar(1.0, in.theta);
  const double cos_t = std::cos(in.theta);
  auto log_maximand = [&](double s) {
    const double lag = std::abs(laguerre(in.m - 1, in.k + 1, in.tau + s * dir));
    if (lag == 0.0) {
      return -std::numeric_limits<double>::infinity();
    }
    return -s * cos_t + mk1 * std::log1p(s / in.tau) + std::log(lag);
  };

  constexpr int grid = 512;
  double best = log_maximand(0.0);
  int best_i = 0;
  if (hR > 0.0) {
    for (int i = 1; i < grid; ++i) {
      const double s = hR * i / (grid - 1);
      const double v = log_maximand(s);
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    double a = hR * std::max(0, best_i - 1) / (grid - 1);
    double b = hR * std::min(grid - 1, best_i + 1) / (grid - 1);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - ratio * (b - a);
    double x2 = a + ratio * (b - a);
    double f1 = log_maximand(x1);
    double f2 = log_maximand(x2);
    while (b - a > 1e-6 * std::max(b, 1e-300)) {
      if (f1 > f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - ratio * (b - a);
        f1 = log_maximand(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + ratio * (b - a);
        f2 = log_maximand(x2);
      }
    }
    const double s = 0.5 * (a + b);
    const double v = log_maximand(s);
    if (v > best) {
      best = v;
    }
  }
  const double l = std::log(in.crouzeix) + best + std::log(in.tau) +
                   detail::log_factorial(in.m - 1) - detail::log_factorial(in.m + in.k) +
                   std::log(in.subdiag_product);
  return detail::safe_exp(l);
}

/// Convergence factor rho(theta); below 1 on [0, theta_star).
inline double rho(double theta) {
  const double c = std::cos(theta);
  return (1.0 + std::sqrt(2.0 * (1.0 - c))) * c / (4.0 * c - 2.0) * std::numbers::pi /
         (std::numbers::pi - theta);
}

/// A-priori bound 11 K rho(theta)^m for tau = (m+k)/cos(theta).
inline double bound_apriori(int k, int m, double theta,
                            double crouzeix = crouzeix_default) {
  (void)k;
  detail::require_theta_below(theta, theta_star, "bound_apriori");
  return 11.0 * crouzeix * std::pow(rho(theta), m);
}

/// Self-adjoint form of the a-priori bound: (8/k!) (2/e)^k (1/2)^m.
inline double bound_apriori_symmetric(int k, int m) {
  return 8.0 / std::tgamma(k + 1.0) * std::pow(2.0 / std::numbers::e, k) *
         std::pow(0.5, m);
}

/// Logarithmic capacity 1/(2(2 - nu)), nu = 2 theta/pi, of the image of the
/// sector under lambda -> 1/(1 - delta lambda).
inline double capacity(double theta) {
  const double nu = 2.0 * theta / std::numbers::pi;
  return 1.0 / (2.0 * (2.0 - nu));
}

/// Capacity bound 2 gamma^m on the subdiagonal product.
inline double capacity_bound(int m, double theta) {
  if (!(theta >= 0.0) || !(theta < std::numbers::pi / 2.0)) {
    throw ThetaOutOfRange("capacity_bound");
  }
  return 2.0 * std::pow(capacity(theta), m);
}

/// Superlinear bound (eta e p / m)^(m/p), eta = ((1+p)/p) sum sigma_j^p.
inline double bound_superlinear(int m, std::span<const double> singular_values, double p) {
  if (m < 1 || !(p > 0.0) || p > 1.0) {
    throw InvalidArgument("bound_superlinear: need m >= 1 and p in (0, 1]");
  }
  double sum = 0.0;
  for (double s : singular_values) {
    if (!(s > 0.0)) {
      throw InvalidArgument("bound_superlinear: singular values must be positive");
    }
    sum += std::pow(s, p);
  }
  const double eta = (1.0 + p) / p * sum;
  return detail::safe_exp(m / p * std::log(eta * std::numbers::e * p / m));
}

/// Closed form of sum_j 1/(1 + delta (j pi)^2), the trace of Z for the
/// self-adjoint model problem: arctan(1/(sqrt(delta) pi)) / (sqrt(delta) pi).
inline double model_trace_closed_form(double delta) {
  const double a = std::sqrt(delta) * std::numbers::pi;
  return std::atan(1.0 / a) / a;
}

/// (C / (sqrt(delta) m))^m for second-order elliptic operators.
inline double bound_elliptic(int m, double delta, double constant) {
  return detail::safe_exp(m * std::log(constant / (std::sqrt(delta) * m)));
}

struct IdentitySides {
  std::complex<double> lhs;
  std::complex<double> rhs;
};

/// Evaluates both sides of
///   d^{m+k}/dz^{m+k} [f_0(z) z^k] / (tau^k (m+k)!)
///     = (-1)^{m+1} tau / z^{m+k+1} f_0(z) (m-1)!/(m+k)! L^(k+1)_{m-1}(tau/z)
/// with f_0(z) = exp(tau - tau/z). The left side is the Taylor coefficient of
/// order m+k at z, extracted from the power series of exp(-tau/(z+t)).
inline IdentitySides derivative_identity_check(int k, int m, double tau,
                                               std::complex<double> z) {
  if (m < 1 || k < 0 || z == std::complex<double>{}) {
    throw InvalidArgument("derivative_identity_check: need m >= 1, z != 0");
  }
  const int order = m + k;
  using cplx = std::complex<double>;
  // -tau/(z+t) = sum_n a_n t^n, a_n = -(tau/z)(-1/z)^n.
  std::vector<cplx> a(static_cast<std::size_t>(order + 1));
  for (int n = 0; n <= order; ++n) {
    a[static_cast<std::size_t>(n)] = -(tau / z) * std::pow(-1.0 / z, n);
  }
  // exp(sum_{n>=1} a_n t^n) via E_n = (1/n) sum_{j=1}^n j a_j E_{n-j}.
  std::vector<cplx> e(static_cast<std::size_t>(order + 1));
  e[0] = 1.0;
  for (int n = 1; n <= order; ++n) {
    cplx s{};
    for (int j = 1; j <= n; ++j) {
      s += static_cast<double>(j) * a[static_cast<std::size_t>(j)] *
           e[static_cast<std::size_t>(n - j)];
    }
    e[static_cast<std::size_t>(n)] = s / static_cast<double>(n);
  }
  // Multiply by (z + t)^k.
  cplx coeff{};
  for (int i = 0; i <= std::min(k, order); ++i) {
    coeff += detail::binomial(k, i) * std::pow(z, k - i) *
             e[static_cast<std::size_t>(order - i)];
  }
  const cplx f0 = std::exp(tau - tau / z);
  const cplx lhs = f0 * coeff / std::pow(tau, k);

  const double sign = (m % 2 == 1) ? 1.0 : -1.0; // (-1)^{m+1}
  const double fact_ratio =
      std::exp(detail::log_factorial(m - 1) - detail::log_factorial(m + k));
  const cplx rhs = sign * tau / std::pow(z, order + 1) * f0 * fact_ratio *
                   laguerre(m - 1, k + 1, tau / z);
  return {lhs, rhs};
}

} // namespace rdkrylov
