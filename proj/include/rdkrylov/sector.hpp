#pragma once

// Numerical-range geometry: boundary samples of F(A) by the rotation method,
// the semiangle of the smallest sector |arg(-z)| <= theta containing them,
// and the check that F((I - delta A)^{-1}) lies in the image region G_theta.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "rdkrylov/errors.hpp"
#include "rdkrylov/operators.hpp"
#include "rdkrylov/smalldense.hpp"

namespace rdkrylov {

struct SectorInfo {
  double theta = 0.0;
  std::optional<double> radius;
  std::vector<complex> fov_points;
  /// Added to theta before it is used in bounds, since F(L) has to sit in the
  /// interior of the sector.
  double margin = 0.01;

  double theta_used() const { return theta + margin; }
};

namespace detail {

inline std::vector<double> rotation_angles(int n_angles) {
  if (n_angles < 8) {
    throw InvalidArgument("field_of_values_boundary: need at least 8 angles");
  }
  std::vector<double> angles(static_cast<std::size_t>(n_angles));
  for (int i = 0; i < n_angles; ++i) {
    angles[static_cast<std::size_t>(i)] = 2.0 * std::numbers::pi * i / n_angles;
  }
  return angles;
}

/// Largest eigenpair of the Hermitian tridiagonal matrix with real diagonal
/// `d` and superdiagonal `e`, by Sturm bisection plus inverse iteration.
inline HermitianEigenpair tridiagonal_max_eigenpair(const std::vector<double>& d,
                                                    const std::vector<complex>& e) {
  const std::size_t n = d.size();
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(e[i - 1]);
    if (i + 1 < n) r += std::abs(e[i]);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  const double tiny = std::max(scale, 1.0) * std::numeric_limits<double>::min() * 4.0;

  // Number of eigenvalues strictly below x.
  auto count_below = [&](double x) {
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double off = (i > 0) ? std::norm(e[i - 1]) : 0.0;
      q = d[i] - x - (i > 0 ? off / q : 0.0);
      if (q == 0.0) q = -tiny;
      if (q < 0.0) ++count;
    }
    return count;
  };

  double a = lo;
  double b = hi + std::max(scale, 1.0) * 1e-15;
  for (int it = 0; it < 200 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * scale;
       ++it) {
    const double mid = 0.5 * (a + b);
    if (count_below(mid) == n) {
      b = mid;
    } else {
      a = mid;
    }
  }
  const double lambda = 0.5 * (a + b);

  // Inverse iteration with a shift just above lambda: T - sigma I is then
  // negative definite and the unpivoted tridiagonal solve is stable.
  const double sigma = lambda + std::max(scale, 1.0) * 1e-12;
  ComplexVector x = ComplexVector::Ones(static_cast<Eigen::Index>(n));
  std::vector<double> piv(n);
  std::vector<complex> rhs(n);
  for (int it = 0; it < 4; ++it) {
    for (std::size_t i = 0; i < n; ++i) rhs[i] = x(static_cast<Eigen::Index>(i));
    // LDL^H elimination of T - sigma I.
    piv[0] = d[0] - sigma;
    for (std::size_t i = 1; i < n; ++i) {
      const complex l = std::conj(e[i - 1]) / piv[i - 1];
      piv[i] = d[i] - sigma - std::real(l * e[i - 1]);
      rhs[i] -= l * rhs[i - 1];
    }
    x(static_cast<Eigen::Index>(n - 1)) = rhs[n - 1] / piv[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
      x(static_cast<Eigen::Index>(i)) =
          (rhs[i] - e[i] * x(static_cast<Eigen::Index>(i + 1))) / piv[i];
    }
    x.normalize();
  }
  return {lambda, x};
}

inline complex rayleigh_quotient_banded(const SectorialOperator& op, const ComplexVector& x) {
  const Eigen::Index n = op.dimension();
  complex s{};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - op.lower_bandwidth());
         j <= std::min(n - 1, i + op.upper_bandwidth()); ++j) {
      s += std::conj(x(i)) * op(i, j) * x(j);
    }
  }
  return s / x.squaredNorm();
}

} // namespace detail

/// Boundary points of F(A): for each rotation angle alpha the top eigenvector
/// of the Hermitian part of e^{i alpha} A gives a support point of F(A).
inline std::vector<complex> field_of_values_boundary(const DenseMatrix& a, int n_angles) {
  require_square(a, "field_of_values_boundary");
  if (a.rows() > 500) {
    throw DimensionTooLarge("field_of_values_boundary: dimension above 500");
  }
  std::vector<complex> points;
  points.reserve(static_cast<std::size_t>(n_angles));
  for (double alpha : detail::rotation_angles(n_angles)) {
    const DenseMatrix rotated = std::polar(1.0, alpha) * a;
    const DenseMatrix herm = 0.5 * (rotated + rotated.adjoint());
    const auto pair = hermitian_max_eigenpair(herm);
    const ComplexVector& x = pair.vector;
    points.push_back(x.dot(a * x) / x.squaredNorm());
  }
  return points;
}

/// Same as the dense overload; tridiagonal operators of any size go through a
/// Sturm-bisection path, other band operators are densified (M <= 500).
inline std::vector<complex> field_of_values_boundary(const SectorialOperator& op,
                                                     int n_angles) {
  if (op.lower_bandwidth() > 1 || op.upper_bandwidth() > 1) {
    return field_of_values_boundary(op.dense_complex(), n_angles);
  }
  const auto n = static_cast<std::size_t>(op.dimension());
  std::vector<complex> points;
  points.reserve(static_cast<std::size_t>(n_angles));
  std::vector<double> d(n);
  std::vector<complex> e(n > 0 ? n - 1 : 0);
  for (double alpha : detail::rotation_angles(n_angles)) {
    const complex rot = std::polar(1.0, alpha);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      d[i] = std::real(rot * op(ii, ii));
      if (i + 1 < n) {
        // (rot A + (rot A)^H)/2 at (i, i+1).
        e[i] = 0.5 * (rot * op(ii, ii + 1) + std::conj(rot * op(ii + 1, ii)));
      }
    }
    const auto pair = detail::tridiagonal_max_eigenpair(d, e);
    points.push_back(detail::rayleigh_quotient_banded(op, pair.vector));
  }
  return points;
}

/// max |arg(-p)| over the points; points at the origin are ignored.
inline double sector_semiangle(const std::vector<complex>& points) {
  double scale = 0.0;
  for (const auto& p : points) {
    scale = std::max(scale, std::abs(p));
  }
  double theta = 0.0;
  for (const auto& p : points) {
    if (std::abs(p) <= 1e-12 * scale) {
      continue;
    }
    if (p.real() > -1e-12 * scale) {
      throw NotSectorial("sector_semiangle: point with nonnegative real part");
    }
    theta = std::max(theta, std::atan2(std::abs(p.imag()), -p.real()));
  }
  if (!(theta < std::numbers::pi / 2.0)) {
    throw NotSectorial("sector_semiangle: semiangle reaches pi/2");
  }
  return theta;
}

inline double field_of_values_radius(const std::vector<complex>& points) {
  double r = 0.0;
  for (const auto& p : points) {
    r = std::max(r, std::abs(p));
  }
  return r;
}

inline SectorInfo compute_sector(const SectorialOperator& op, int n_angles = 256,
                                 double margin = 0.01, bool with_radius = false) {
  SectorInfo info;
  info.fov_points = field_of_values_boundary(op, n_angles);
  info.theta = sector_semiangle(info.fov_points);
  info.margin = margin;
  if (with_radius) {
    info.radius = field_of_values_radius(info.fov_points);
  }
  return info;
}

/// Whether w lies in G_theta, the image of the sector under
/// lambda -> 1/(1 - delta lambda).
inline bool in_g_theta(complex w, double delta, double theta, double slack = 1e-8) {
  if (std::abs(w) <= slack) {
    return true; // the vertex at infinity maps to 0
  }
  const complex lambda = (1.0 - 1.0 / w) / delta;
  if (std::abs(lambda) * delta <= slack) {
    return true;
  }
  return std::atan2(std::abs(lambda.imag()), -lambda.real()) <= theta + slack;
}

/// Samples F((I - delta A)^{-1}) and checks every sample against G_theta.
inline bool verify_fz_in_gtheta(const DenseMatrix& a, double delta, double theta,
                                int n_samples) {
  require_square(a, "verify_fz_in_gtheta");
  if (a.rows() > 200) {
    throw DimensionTooLarge("verify_fz_in_gtheta: dimension above 200");
  }
  if (sector_semiangle(field_of_values_boundary(a, n_samples)) > theta + 1e-8) {
    throw NotSectorial("verify_fz_in_gtheta: F(A) is not inside the sector");
  }
  const Eigen::Index n = a.rows();
  const DenseMatrix z = inverse(DenseMatrix::Identity(n, n) - delta * a);
  const auto points = field_of_values_boundary(z, n_samples);
  return std::all_of(points.begin(), points.end(),
                     [&](complex w) { return in_g_theta(w, delta, theta); });
}

} // namespace rdkrylov
