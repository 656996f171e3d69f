#pragma once

// Generalized Laguerre polynomials L_n^(alpha)(z) for real alpha and complex z.

#include <cmath>
#include <complex>

#include "rdkrylov/errors.hpp"

namespace rdkrylov {

namespace detail {

/// Generalized binomial coefficient binom(x, r) for real x and integer r >= 0.
inline double binomial(double x, int r) {
  if (r < 0) {
    return 0.0;
  }
  double b = 1.0;
  for (int i = 0; i < r; ++i) {
    b *= (x - i) / static_cast<double>(i + 1);
  }
  return b;
}

inline std::complex<double> laguerre_recurrence(int n, double alpha,
                                                std::complex<double> z) {
  std::complex<double> prev{1.0, 0.0};
  if (n == 0) {
    return prev;
  }
  std::complex<double> cur = 1.0 + alpha - z;
  for (int j = 1; j < n; ++j) {
    const std::complex<double> next =
        ((2.0 * j + 1.0 + alpha - z) * cur - (j + alpha) * prev) / (j + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

} // namespace detail

/// L_n^(alpha)(z) by the three-term recurrence. Superscripts alpha = -1-k
/// (k a nonnegative integer) with n > k go through the connection formula
///   L_n^(-1-k)(z) = (-1)^(k+1) z^(k+1) (n-k-1)!/n! L_(n-k-1)^(k+1)(z).
inline std::complex<double> laguerre(int n, double alpha, std::complex<double> z) {
  if (n < 0 || n > 200) {
    throw InvalidArgument("laguerre: degree must be in [0, 200]");
  }
  const double k1 = -alpha; // k + 1 when alpha = -1-k
  if (alpha < 0.0 && k1 == std::floor(k1) && n >= static_cast<int>(k1)) {
    const int kp1 = static_cast<int>(k1);
    const int reduced = n - kp1;
    const double ratio = std::exp(std::lgamma(reduced + 1.0) - std::lgamma(n + 1.0));
    const double sign = (kp1 % 2 == 0) ? 1.0 : -1.0;
    return sign * std::pow(z, kp1) * ratio *
           detail::laguerre_recurrence(reduced, static_cast<double>(kp1), z);
  }
  return detail::laguerre_recurrence(n, alpha, z);
}

/// Direct evaluation of the defining sum
///   sum_j (-1)^j binom(n+alpha, n-j) z^j / j!.
/// Suffers cancellation for large |z|; meant as a cross-check for n <= 25.
inline std::complex<double> laguerre_sum_oracle(int n, double alpha,
                                                std::complex<double> z) {
  if (n < 0 || n > 25) {
    throw InvalidArgument("laguerre_sum_oracle: degree must be in [0, 25]");
  }
  std::complex<double> sum{};
  std::complex<double> zpow{1.0, 0.0};
  double factorial = 1.0;
  for (int j = 0; j <= n; ++j) {
    if (j > 0) {
      zpow *= z;
      factorial *= j;
    }
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    sum += sign * detail::binomial(n + alpha, n - j) * zpow / factorial;
  }
  return sum;
}

} // namespace rdkrylov
