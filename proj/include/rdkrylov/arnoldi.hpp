#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "rdkrylov/errors.hpp"
#include "rdkrylov/operators.hpp"
#include "rdkrylov/smalldense.hpp"

namespace rdkrylov {

/// Action of Z = (I - delta L)^{-1} on a vector.
using ZApply = std::function<RealVector(const RealVector&)>;

/// Incremental Arnoldi decomposition Z V_m = V_m H_m + h_{m+1,m} v_{m+1} e_m^T.
///
/// Each new column is orthogonalized by modified Gram-Schmidt followed by a
/// second full pass. H is kept at (m+1) x m so that h_{m+1,m} stays available
/// after the step that produced it.
class ArnoldiDecomposition {
public:
  ArnoldiDecomposition(ZApply apply_z, const RealVector& v)
      : apply_z_{std::move(apply_z)}, dim_{v.size()} {
    const double norm = v.norm();
    if (!(norm >= 1e-300)) {
      throw ZeroVector("arnoldi_init: starting vector has zero norm");
    }
    if (std::abs(norm - 1.0) > 1e-6) {
      throw InvalidArgument("arnoldi_init: starting vector must have unit norm");
    }
    basis_.push_back(v / norm);
    h_.resize(1, 0);
  }

  Eigen::Index size() const { return m_; }
  Eigen::Index dimension() const { return dim_; }
  bool breakdown() const { return breakdown_; }

  /// Orthonormal basis vectors v_1..v_m (plus v_{m+1} when it exists).
  const std::vector<RealVector>& vectors() const { return basis_; }

  RealMatrix basis() const {
    RealMatrix v(dim_, m_);
    for (Eigen::Index j = 0; j < m_; ++j) {
      v.col(j) = basis_[static_cast<std::size_t>(j)];
    }
    return v;
  }

  /// The (m+1) x m Hessenberg matrix.
  const RealMatrix& extended_hessenberg() const { return h_; }

  /// The square m x m Hessenberg matrix H_m.
  RealMatrix hessenberg() const { return h_.topRows(m_); }

  double next_subdiagonal() const { return m_ == 0 ? 0.0 : h_(m_, m_ - 1); }

  /// Running product of h_{i+1,i}, i = 1..m.
  double subdiagonal_product() const { return product_; }

  double subdiagonal_product(Eigen::Index m) const {
    if (m < 0 || m > m_) {
      throw InvalidArgument("subdiagonal_product: m exceeds current dimension");
    }
    double p = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      p *= h_(i + 1, i);
    }
    return p;
  }

  void extend() {
    if (breakdown_) {
      throw BreakdownReached("arnoldi_extend: decomposition already broke down");
    }
    if (m_ >= dim_) {
      throw AtFullDimension("arnoldi_extend: m equals the operator dimension");
    }
    const Eigen::Index j = m_;
    RealVector w = apply_z_(basis_[static_cast<std::size_t>(j)]);
    const double z_norm = w.norm();

    h_.conservativeResize(j + 2, j + 1);
    h_.row(j + 1).setZero();
    h_.col(j).setZero();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        const RealVector& vi = basis_[static_cast<std::size_t>(i)];
        const double hij = vi.dot(w);
        h_(i, j) += hij;
        w -= hij * vi;
      }
    }
    const double h_next = w.norm();
    ++m_;
    if (h_next <= 1e-14 * z_norm) {
      breakdown_ = true;
      h_(j + 1, j) = 0.0;
      product_ = 0.0;
      return;
    }
    h_(j + 1, j) = h_next;
    product_ *= h_next;
    basis_.push_back(w / h_next);
  }

private:
  ZApply apply_z_;
  Eigen::Index dim_;
  Eigen::Index m_ = 0;
  bool breakdown_ = false;
  double product_ = 1.0;
  std::vector<RealVector> basis_;
  RealMatrix h_;
};

inline ZApply z_action(std::shared_ptr<const ShiftedFactorization> fact) {
  return [f = std::move(fact)](const RealVector& x) { return f->solve(x); };
}

inline ArnoldiDecomposition arnoldi_init(std::shared_ptr<const ShiftedFactorization> fact,
                                         const RealVector& v) {
  if (fact->dimension() != v.size()) {
    throw DimensionMismatch("arnoldi_init: vector length");
  }
  return ArnoldiDecomposition(z_action(std::move(fact)), v);
}

inline ArnoldiDecomposition arnoldi_init(const ShiftedFactorization& fact,
                                         const RealVector& v) {
  return arnoldi_init(std::make_shared<const ShiftedFactorization>(fact), v);
}

inline ArnoldiDecomposition& arnoldi_extend(ArnoldiDecomposition& dec) {
  dec.extend();
  return dec;
}

inline double subdiagonal_product(const ArnoldiDecomposition& dec, Eigen::Index m) {
  return dec.subdiagonal_product(m);
}

} // namespace rdkrylov
