#pragma once

// Dense kernels for the small matrices that appear inside the Krylov
// process (projected Hessenberg matrices, augmented exponentials, dense
// oracles). Everything is stored as complex; real inputs carry zero
// imaginary parts.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rdkrylov/errors.hpp"

namespace rdkrylov {

using complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline void require_finite(const DenseMatrix& a, const char* where) {
  if (!a.allFinite()) {
    throw NonFiniteEntry(std::string(where) + ": matrix has NaN/Inf entries");
  }
}

inline void require_square(const DenseMatrix& a, const char* where) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch(std::string(where) + ": matrix is not square");
  }
}

/// Builds a matrix from row-major entries, rejecting size mismatches and
/// non-finite values.
inline DenseMatrix make_dense(Eigen::Index rows, Eigen::Index cols,
                              std::span<const complex> entries) {
  if (rows <= 0 || cols <= 0 ||
      static_cast<std::size_t>(rows * cols) != entries.size()) {
    throw DimensionMismatch("make_dense: rows*cols must equal entry count");
  }
  DenseMatrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      a(i, j) = entries[static_cast<std::size_t>(i * cols + j)];
    }
  }
  require_finite(a, "make_dense");
  return a;
}

inline double norm_1(const DenseMatrix& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

inline double max_abs(const DenseMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// Solves A X = B by LU with partial pivoting.
///
/// A pivot below 1e-14 * max|A| is reported as SingularMatrix rather than
/// silently producing a huge solution.
inline DenseMatrix lu_solve(const DenseMatrix& a, const DenseMatrix& b) {
  require_square(a, "lu_solve");
  if (b.rows() != a.rows()) {
    throw DimensionMismatch("lu_solve: right-hand side row count");
  }
  require_finite(a, "lu_solve");
  require_finite(b, "lu_solve");

  const Eigen::Index n = a.rows();
  const double scale = max_abs(a);
  const double threshold = 1e-14 * scale;
  DenseMatrix lu = a;
  DenseMatrix x = b;

  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot_row = col;
    lu.col(col).tail(n - col).cwiseAbs().maxCoeff(&pivot_row);
    pivot_row += col;
    const double pivot = std::abs(lu(pivot_row, col));
    if (scale == 0.0 || pivot < threshold) {
      throw SingularMatrix("lu_solve: pivot " + std::to_string(pivot) +
                           " in column " + std::to_string(col));
    }
    if (pivot_row != col) {
      lu.row(col).swap(lu.row(pivot_row));
      x.row(col).swap(x.row(pivot_row));
    }
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const complex factor = lu(r, col) / lu(col, col);
      if (factor == complex{}) {
        continue;
      }
      lu.row(r).tail(n - col - 1) -= factor * lu.row(col).tail(n - col - 1);
      x.row(r) -= factor * x.row(col);
    }
  }
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    if (r + 1 < n) {
      x.row(r) -= lu.row(r).tail(n - r - 1) * x.bottomRows(n - r - 1);
    }
    x.row(r) /= lu(r, r);
  }
  return x;
}

inline DenseMatrix inverse(const DenseMatrix& a) {
  return lu_solve(a, DenseMatrix::Identity(a.rows(), a.cols()));
}

namespace detail {

// Diagonal Padé coefficients b_0..b_m used by the scaling-and-squaring
// exponential (Higham 2005).
constexpr double pade3[] = {120.0, 60.0, 12.0, 1.0};
constexpr double pade5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr double pade7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                            25200.0,    1512.0,    56.0,      1.0};
constexpr double pade9[] = {17643225600.0, 8821612800.0, 2075673600.0,
                            302702400.0,   30270240.0,   2162160.0,
                            110880.0,      3960.0,       90.0,
                            1.0};
constexpr double pade13[] = {64764752532480000.0,
                             32382376266240000.0,
                             7771770303897600.0,
                             1187353796428800.0,
                             129060195264000.0,
                             10559470521600.0,
                             670442572800.0,
                             33522128640.0,
                             1323241920.0,
                             40840800.0,
                             960960.0,
                             16380.0,
                             182.0,
                             1.0};

// Backward-error thresholds on ||A||_1 for degrees 3, 5, 7, 9, 13.
constexpr double theta3 = 1.495585217958292e-2;
constexpr double theta5 = 2.539398330063230e-1;
constexpr double theta7 = 9.504178996162932e-1;
constexpr double theta9 = 2.097847961257068e0;
constexpr double theta13 = 5.371920351148152e0;

inline std::pair<DenseMatrix, DenseMatrix>
pade_low_degree(const DenseMatrix& a, std::span<const double> b) {
  const Eigen::Index n = a.rows();
  const DenseMatrix id = DenseMatrix::Identity(n, n);
  const DenseMatrix a2 = a * a;
  DenseMatrix power = id;
  DenseMatrix u_even = DenseMatrix::Zero(n, n);
  DenseMatrix v = DenseMatrix::Zero(n, n);
  for (std::size_t j = 0; j + 1 < b.size(); j += 2) {
    v += b[j] * power;
    u_even += b[j + 1] * power;
    power = power * a2;
  }
  return {a * u_even, v};
}

inline std::pair<DenseMatrix, DenseMatrix> pade_degree13(const DenseMatrix& a) {
  const auto& b = pade13;
  const Eigen::Index n = a.rows();
  const DenseMatrix id = DenseMatrix::Identity(n, n);
  const DenseMatrix a2 = a * a;
  const DenseMatrix a4 = a2 * a2;
  const DenseMatrix a6 = a4 * a2;
  DenseMatrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
  u_inner += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  DenseMatrix u = a * u_inner;
  DenseMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
  v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return {std::move(u), std::move(v)};
}

} // namespace detail

/// Matrix exponential by scaling and squaring with diagonal Padé
/// approximants of degree 3..13.
inline DenseMatrix expm(const DenseMatrix& a) {
  require_square(a, "expm");
  require_finite(a, "expm");
  const Eigen::Index n = a.rows();
  if (n == 0) {
    return a;
  }
  const double norm = norm_1(a);

  auto finish = [&](const std::pair<DenseMatrix, DenseMatrix>& uv) {
    return lu_solve(uv.second - uv.first, uv.second + uv.first);
  };

  if (norm <= detail::theta3) {
    return finish(detail::pade_low_degree(a, detail::pade3));
  }
  if (norm <= detail::theta5) {
    return finish(detail::pade_low_degree(a, detail::pade5));
  }
  if (norm <= detail::theta7) {
    return finish(detail::pade_low_degree(a, detail::pade7));
  }
  if (norm <= detail::theta9) {
    return finish(detail::pade_low_degree(a, detail::pade9));
  }

  int squarings = 0;
  if (norm > detail::theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / detail::theta13)));
  }
  if (squarings > 60) {
    throw Overflow("expm: norm " + std::to_string(norm) +
                   " needs more than 60 squarings");
  }
  const DenseMatrix scaled = a / std::ldexp(1.0, squarings);
  DenseMatrix result = finish(detail::pade_degree13(scaled));
  for (int i = 0; i < squarings; ++i) {
    result = result * result;
  }
  if (!result.allFinite()) {
    throw Overflow("expm: result overflowed during squaring");
  }
  return result;
}

/// Eigenvalues of an upper Hessenberg matrix by shifted QR iteration.
inline std::vector<complex> hessenberg_eigenvalues(const DenseMatrix& h) {
  require_square(h, "hessenberg_eigenvalues");
  require_finite(h, "hessenberg_eigenvalues");
  const Eigen::Index n = h.rows();
  const double scale = std::max(max_abs(h), 1e-300);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 2; i < n; ++i) {
      if (std::abs(h(i, j)) > 1e-12 * scale) {
        throw InvalidArgument("hessenberg_eigenvalues: input not Hessenberg");
      }
    }
  }
  if (n == 0) {
    return {};
  }
  DenseMatrix hess = h.triangularView<Eigen::Upper>();
  for (Eigen::Index i = 1; i < n; ++i) {
    hess(i, i - 1) = h(i, i - 1);
  }
  Eigen::ComplexSchur<DenseMatrix> schur(n);
  schur.setMaxIterations(100 * n);
  schur.computeFromHessenberg(hess, DenseMatrix::Identity(n, n), false);
  if (schur.info() != Eigen::Success) {
    throw NoConvergence("hessenberg_eigenvalues: QR sweeps exhausted");
  }
  std::vector<complex> eig(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    eig[static_cast<std::size_t>(i)] = schur.matrixT()(i, i);
  }
  return eig;
}

namespace detail {

inline void require_hermitian(const DenseMatrix& a, const char* where) {
  require_square(a, where);
  require_finite(a, where);
  const double scale = max_abs(a);
  if (max_abs(a - a.adjoint()) > 1e-12 * std::max(scale, 1e-300)) {
    throw NotHermitian(std::string(where) + ": symmetry check failed");
  }
}

} // namespace detail

struct EigenExtremes {
  double min_eig;
  double max_eig;
};

inline EigenExtremes hermitian_eigen_extremes(const DenseMatrix& a) {
  detail::require_hermitian(a, "hermitian_eigen_extremes");
  const DenseMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NoConvergence("hermitian_eigen_extremes");
  }
  const auto& w = solver.eigenvalues();
  return {w.minCoeff(), w.maxCoeff()};
}

struct HermitianEigenpair {
  double value;
  ComplexVector vector;
};

/// Largest eigenvalue of a Hermitian matrix together with a unit eigenvector.
inline HermitianEigenpair hermitian_max_eigenpair(const DenseMatrix& a) {
  detail::require_hermitian(a, "hermitian_max_eigenpair");
  const DenseMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NoConvergence("hermitian_max_eigenpair");
  }
  const Eigen::Index last = sym.rows() - 1;
  return {solver.eigenvalues()(last), solver.eigenvectors().col(last)};
}

} // namespace rdkrylov
