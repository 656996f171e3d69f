#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "rdkrylov/errors.hpp"
#include "rdkrylov/smalldense.hpp"

namespace rdkrylov {

/// Largest lower/upper bandwidth accepted for general operators. Anything
/// wider would need a sparse direct solver.
inline constexpr Eigen::Index max_bandwidth = 32;

struct Triplet {
  Eigen::Index row; // 0-based
  Eigen::Index col; // 0-based
  double value;
};

/// A real M x M operator L stored in band form, with apply (x -> Lx) and
/// shifted-solve capability through ShiftedFactorization.
class SectorialOperator {
public:
  SectorialOperator() = default;

  /// Band storage: `bands[i * (kl + ku + 1) + (j - i + kl)] = L(i, j)`.
  SectorialOperator(Eigen::Index dim, Eigen::Index kl, Eigen::Index ku,
                    std::vector<double> bands)
      : dim_{dim}, kl_{kl}, ku_{ku}, band_{std::move(bands)} {
    if (dim_ < 1 || kl_ < 0 || ku_ < 0) {
      throw InvalidArgument("SectorialOperator: bad dimension or bandwidth");
    }
    if (band_.size() != static_cast<std::size_t>(dim_ * width())) {
      throw DimensionMismatch("SectorialOperator: band array size");
    }
    for (double x : band_) {
      if (!std::isfinite(x)) {
        throw NonFiniteEntry("SectorialOperator: non-finite band entry");
      }
    }
  }

  static SectorialOperator from_triplets(Eigen::Index dim,
                                         const std::vector<Triplet>& entries) {
    if (dim < 1) {
      throw InvalidArgument("from_triplets: dimension must be positive");
    }
    Eigen::Index kl = 0;
    Eigen::Index ku = 0;
    for (const auto& t : entries) {
      if (t.row < 0 || t.row >= dim || t.col < 0 || t.col >= dim) {
        throw InvalidArgument("from_triplets: index out of range");
      }
      kl = std::max(kl, t.row - t.col);
      ku = std::max(ku, t.col - t.row);
    }
    if (kl > max_bandwidth || ku > max_bandwidth) {
      throw NotSupported("from_triplets: bandwidth " +
                         std::to_string(std::max(kl, ku)) + " exceeds " +
                         std::to_string(max_bandwidth));
    }
    std::vector<double> bands(static_cast<std::size_t>(dim * (kl + ku + 1)), 0.0);
    for (const auto& t : entries) {
      bands[static_cast<std::size_t>(t.row * (kl + ku + 1) + t.col - t.row + kl)] +=
          t.value;
    }
    return SectorialOperator(dim, kl, ku, std::move(bands));
  }

  static SectorialOperator zero(Eigen::Index dim) {
    return SectorialOperator(dim, 0, 0, std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  }

  static SectorialOperator diagonal(const RealVector& d) {
    return SectorialOperator(d.size(), 0, 0, std::vector<double>(d.begin(), d.end()));
  }

  Eigen::Index dimension() const { return dim_; }
  Eigen::Index lower_bandwidth() const { return kl_; }
  Eigen::Index upper_bandwidth() const { return ku_; }

  double operator()(Eigen::Index i, Eigen::Index j) const {
    if (j - i > ku_ || i - j > kl_) {
      return 0.0;
    }
    return band_[static_cast<std::size_t>(i * width() + j - i + kl_)];
  }

  RealVector apply(const RealVector& x) const {
    if (x.size() != dim_) {
      throw DimensionMismatch("SectorialOperator::apply");
    }
    RealVector y = RealVector::Zero(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, i - kl_);
      const Eigen::Index hi = std::min(dim_ - 1, i + ku_);
      double s = 0.0;
      for (Eigen::Index j = lo; j <= hi; ++j) {
        s += (*this)(i, j) * x(j);
      }
      y(i) = s;
    }
    return y;
  }

  RealMatrix dense() const {
    RealMatrix a = RealMatrix::Zero(dim_, dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) {
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - kl_);
           j <= std::min(dim_ - 1, i + ku_); ++j) {
        a(i, j) = (*this)(i, j);
      }
    }
    return a;
  }

  DenseMatrix dense_complex() const { return dense().cast<complex>(); }

  double max_abs_entry() const {
    double m = 0.0;
    for (double x : band_) {
      m = std::max(m, std::abs(x));
    }
    return m;
  }

private:
  Eigen::Index width() const { return kl_ + ku_ + 1; }

  Eigen::Index dim_ = 0;
  Eigen::Index kl_ = 0;
  Eigen::Index ku_ = 0;
  std::vector<double> band_;
};

/// Tridiagonal discretization of u'' - c u' on (0,1), homogeneous Dirichlet,
/// central differences on M interior nodes. This is the negative of
/// -u'' + c u', so its field of values lies in the left half-plane.
inline SectorialOperator make_advection_diffusion(Eigen::Index dim, double c) {
  if (dim < 1) {
    throw InvalidArgument("make_advection_diffusion: M must be >= 1");
  }
  if (!(c >= 0.0)) {
    throw InvalidArgument("make_advection_diffusion: c must be nonnegative");
  }
  const double dx = 1.0 / static_cast<double>(dim + 1);
  const double diffusion = 1.0 / (dx * dx);
  const double advection = c / (2.0 * dx);
  std::vector<double> bands(static_cast<std::size_t>(3 * dim), 0.0);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto row = static_cast<std::size_t>(3 * i);
    if (i > 0) {
      bands[row + 0] = diffusion + advection;
    }
    bands[row + 1] = -2.0 * diffusion;
    if (i + 1 < dim) {
      bands[row + 2] = diffusion - advection;
    }
  }
  return SectorialOperator(dim, 1, 1, std::move(bands));
}

/// Banded LU factorization (partial pivoting) of I - delta L. Immutable once
/// built; solve() is safe to call concurrently.
class ShiftedFactorization {
public:
  ShiftedFactorization(const SectorialOperator& op, double delta)
      : dim_{op.dimension()}, kl_{op.lower_bandwidth()},
        ku_{op.lower_bandwidth() + op.upper_bandwidth()}, delta_{delta} {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
      throw InvalidArgument("factor_shift: delta must be positive");
    }
    const Eigen::Index w = width();
    lu_.assign(static_cast<std::size_t>(dim_ * w), 0.0);
    pivots_.assign(static_cast<std::size_t>(dim_), 0);

    double scale = 0.0;
    for (Eigen::Index i = 0; i < dim_; ++i) {
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - op.lower_bandwidth());
           j <= std::min(dim_ - 1, i + op.upper_bandwidth()); ++j) {
        double v = -delta * op(i, j);
        if (i == j) {
          v += 1.0;
        }
        at(i, j) = v;
        scale = std::max(scale, std::abs(v));
      }
    }

    const double threshold = 1e-14 * scale;
    for (Eigen::Index col = 0; col < dim_; ++col) {
      const Eigen::Index last_row = std::min(dim_ - 1, col + kl_);
      const Eigen::Index last_col = std::min(dim_ - 1, col + ku_);
      Eigen::Index p = col;
      for (Eigen::Index r = col + 1; r <= last_row; ++r) {
        if (std::abs(at(r, col)) > std::abs(at(p, col))) {
          p = r;
        }
      }
      if (std::abs(at(p, col)) <= threshold) {
        throw SingularShift("factor_shift: pivot failure in column " +
                            std::to_string(col) + " for delta " +
                            std::to_string(delta));
      }
      pivots_[static_cast<std::size_t>(col)] = p;
      if (p != col) {
        for (Eigen::Index j = col; j <= last_col; ++j) {
          std::swap(at(col, j), at(p, j));
        }
      }
      const double pivot = at(col, col);
      for (Eigen::Index r = col + 1; r <= last_row; ++r) {
        const double l = at(r, col) / pivot;
        at(r, col) = l;
        if (l == 0.0) {
          continue;
        }
        for (Eigen::Index j = col + 1; j <= last_col; ++j) {
          at(r, j) -= l * at(col, j);
        }
      }
    }
  }

  double delta() const { return delta_; }
  Eigen::Index dimension() const { return dim_; }

  /// Returns (I - delta L)^{-1} b.
  RealVector solve(const RealVector& b) const {
    if (b.size() != dim_) {
      throw DimensionMismatch("ShiftedFactorization::solve");
    }
    RealVector x = b;
    for (Eigen::Index col = 0; col < dim_; ++col) {
      const Eigen::Index p = pivots_[static_cast<std::size_t>(col)];
      if (p != col) {
        std::swap(x(col), x(p));
      }
      const Eigen::Index last_row = std::min(dim_ - 1, col + kl_);
      for (Eigen::Index r = col + 1; r <= last_row; ++r) {
        x(r) -= at(r, col) * x(col);
      }
    }
    for (Eigen::Index i = dim_ - 1; i >= 0; --i) {
      double s = x(i);
      const Eigen::Index last_col = std::min(dim_ - 1, i + ku_);
      for (Eigen::Index j = i + 1; j <= last_col; ++j) {
        s -= at(i, j) * x(j);
      }
      x(i) = s / at(i, i);
    }
    return x;
  }

private:
  // Row i keeps columns [i - kl, i + kl + ku]; U fills in up to kl + ku.
  Eigen::Index width() const { return kl_ + ku_ + 1; }

  double& at(Eigen::Index i, Eigen::Index j) {
    return lu_[static_cast<std::size_t>(i * width() + j - i + kl_)];
  }
  double at(Eigen::Index i, Eigen::Index j) const {
    return lu_[static_cast<std::size_t>(i * width() + j - i + kl_)];
  }

  Eigen::Index dim_;
  Eigen::Index kl_;
  Eigen::Index ku_; // upper bandwidth of U, i.e. kl + ku of the operator
  double delta_;
  std::vector<double> lu_;
  std::vector<Eigen::Index> pivots_;
};

inline ShiftedFactorization factor_shift(const SectorialOperator& op, double delta) {
  return ShiftedFactorization(op, delta);
}

inline RealVector apply_Z(const ShiftedFactorization& fact, const RealVector& x) {
  return fact.solve(x);
}

/// Reads the coordinate text format: a header line "M nnz" followed by nnz
/// lines "row col value" with 1-based indices. Blank lines and lines starting
/// with '#' or '%' are skipped.
inline SectorialOperator read_coordinate(std::istream& in,
                                         const std::string& source = "<stream>") {
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ParseError(source + ":" + std::to_string(line_no) + ": " + msg);
  };
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#' || line[first] == '%') {
        continue;
      }
      return true;
    }
    return false;
  };

  if (!next_line()) {
    fail("missing header line 'M nnz'");
  }
  long long dim = 0;
  long long nnz = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> dim >> nnz) || (header >> extra) || dim < 1 || nnz < 0) {
      fail("bad header, expected 'M nnz'");
    }
  }
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  for (long long n = 0; n < nnz; ++n) {
    if (!next_line()) {
      fail("expected " + std::to_string(nnz) + " entries, got " + std::to_string(n));
    }
    std::istringstream row(line);
    long long i = 0;
    long long j = 0;
    double value = 0.0;
    std::string extra;
    if (!(row >> i >> j >> value) || (row >> extra)) {
      fail("expected 'row col value'");
    }
    if (i < 1 || i > dim || j < 1 || j > dim) {
      fail("index out of range");
    }
    if (!std::isfinite(value)) {
      fail("non-finite value");
    }
    entries.push_back({i - 1, j - 1, value});
  }
  if (next_line()) {
    fail("trailing content after " + std::to_string(nnz) + " entries");
  }
  return SectorialOperator::from_triplets(dim, entries);
}

inline SectorialOperator read_coordinate_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path + ": cannot open");
  }
  return read_coordinate(in, path);
}

} // namespace rdkrylov
