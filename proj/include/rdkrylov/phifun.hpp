#pragma once

#include <cmath>
#include <complex>

#include "rdkrylov/errors.hpp"
#include "rdkrylov/smalldense.hpp"

namespace rdkrylov {

/// Largest phi index accepted; bounds the augmented exponential size.
inline constexpr int max_phi_index = 6;

/// Problem statement for y = phi_k(h L) v with pole parameter delta = h / tau.
struct PhiRequest {
  int k = 0;
  double h = 1.0;
  RealVector v;
  double delta = 1.0;
  double tau = 1.0;

  static PhiRequest from_tau(int k, double h, double tau, RealVector v) {
    return make(k, h, h / tau, tau, std::move(v));
  }

  static PhiRequest from_delta(int k, double h, double delta, RealVector v) {
    return make(k, h, delta, h / delta, std::move(v));
  }

private:
  static PhiRequest make(int k, double h, double delta, double tau, RealVector v) {
    if (k < 0 || k > max_phi_index) {
      throw InvalidArgument("PhiRequest: k must be in [0, 6]");
    }
    if (!(h > 0.0) || !(delta > 0.0) || !(tau > 0.0) || !std::isfinite(tau)) {
      throw InvalidArgument("PhiRequest: h, delta and tau must be positive");
    }
    return PhiRequest{k, h, std::move(v), delta, tau};
  }
};

/// phi_k(z); phi_0 = exp, phi_{k+1}(z) = (phi_k(z) - 1/k!)/z.
///
/// Inside |z| < max(0.5, k/2) the Taylor series sum_j z^j/(j+k)! is used
/// instead of the recurrence. Each recurrence step loses about (j+1)/|z| to
/// cancellation, so k!/|z|^k overall; the larger radius keeps that near 1.
inline complex phi_scalar(int k, complex z) {
  if (k < 0) {
    throw InvalidArgument("phi_scalar: k must be nonnegative");
  }
  if (std::abs(z) < std::max(0.5, 0.5 * k)) {
    double inv_fact = 1.0;
    for (int i = 2; i <= k; ++i) {
      inv_fact /= i;
    }
    complex term = inv_fact;
    complex sum = term;
    for (int j = 1; j < 80; ++j) {
      term *= z / static_cast<double>(j + k);
      sum += term;
      if (std::abs(term) <= 1e-17 * std::abs(sum)) {
        break;
      }
    }
    return sum;
  }
  complex phi = std::exp(z);
  double inv_fact = 1.0;
  for (int j = 0; j < k; ++j) {
    if (j > 0) {
      inv_fact /= j;
    }
    phi = (phi - inv_fact) / z;
  }
  return phi;
}

/// phi_k(A) b through one exponential of the (n+k) x (n+k) matrix
///   [[A, b, 0], [0, 0, I_{k-1}], [0, 0, 0]],
/// whose last column holds phi_k(A) b in its first n rows.
inline ComplexVector phi_times_vector(int k, const DenseMatrix& a, const ComplexVector& b) {
  require_square(a, "phi_times_vector");
  if (b.size() != a.rows()) {
    throw DimensionMismatch("phi_times_vector: vector length");
  }
  if (k < 0 || k > max_phi_index) {
    throw InvalidArgument("phi_times_vector: k must be in [0, 6]");
  }
  const Eigen::Index n = a.rows();
  if (k == 0) {
    return expm(a) * b;
  }
  DenseMatrix aug = DenseMatrix::Zero(n + k, n + k);
  aug.topLeftCorner(n, n) = a;
  aug.block(0, n, n, 1) = b;
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    aug(n + i, n + i + 1) = 1.0;
  }
  return expm(aug).block(0, n + k - 1, n, 1);
}

/// phi_k(A) for a small square A, read from the top-right block of the
/// exponential of the block matrix with A in the corner and identities on
/// the block superdiagonal.
inline DenseMatrix phi_matrix_small(int k, const DenseMatrix& a) {
  require_square(a, "phi_matrix_small");
  if (a.rows() > 200) {
    throw DimensionTooLarge("phi_matrix_small: dimension above 200");
  }
  if (k < 0 || k > max_phi_index) {
    throw InvalidArgument("phi_matrix_small: k must be in [0, 6]");
  }
  const Eigen::Index n = a.rows();
  if (k == 0) {
    return expm(a);
  }
  const Eigen::Index size = n * (k + 1);
  DenseMatrix aug = DenseMatrix::Zero(size, size);
  aug.topLeftCorner(n, n) = a;
  for (Eigen::Index i = 0; i < k; ++i) {
    aug.block(i * n, (i + 1) * n, n, n).setIdentity();
  }
  return expm(aug).block(0, k * n, n, n);
}

/// f_k(H) e_1 with f_k(z) = phi_k(tau (1 - 1/z)), evaluated as
/// phi_k(S) e_1 for S = tau (I - H^{-1}).
inline ComplexVector fk_on_hessenberg(const PhiRequest& req, const RealMatrix& h) {
  const Eigen::Index m = h.rows();
  if (m < 1 || h.cols() != m) {
    throw DimensionMismatch("fk_on_hessenberg: H must be square and nonempty");
  }
  DenseMatrix h_inv;
  try {
    h_inv = inverse(h.cast<complex>());
  } catch (const SingularMatrix& e) {
    throw SingularHessenberg(std::string("fk_on_hessenberg: ") + e.what());
  }
  const DenseMatrix s = req.tau * (DenseMatrix::Identity(m, m) - h_inv);
  ComplexVector e1 = ComplexVector::Zero(m);
  e1(0) = 1.0;
  return phi_times_vector(req.k, s, e1);
}

/// Reference value phi_k(h L) v from the full dense matrix.
inline RealVector phi_oracle_dense(int k, double h, const RealMatrix& l_dense,
                                   const RealVector& v) {
  if (l_dense.rows() > 400) {
    throw DimensionTooLarge("phi_oracle_dense: dimension above 400");
  }
  const DenseMatrix hl = (h * l_dense).cast<complex>();
  return phi_times_vector(k, hl, v.cast<complex>()).real();
}

} // namespace rdkrylov
