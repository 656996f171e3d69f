#pragma once

// Restricted-denominator rational Arnoldi driver: y_m = ||v|| V_m f_k(H_m) e_1
// built on the Krylov spaces of Z = (I - delta L)^{-1}.

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "rdkrylov/arnoldi.hpp"
#include "rdkrylov/bounds.hpp"
#include "rdkrylov/errors.hpp"
#include "rdkrylov/operators.hpp"
#include "rdkrylov/phifun.hpp"
#include "rdkrylov/residual.hpp"

namespace rdkrylov {

struct SolveOptions {
  StoppingRule stop;
  /// Sector semiangle used for the a-posteriori bounds; bounds are recorded
  /// only when this is set and below pi/3.
  std::optional<double> theta;
  double crouzeix = crouzeix_default;
  /// Reference value of phi_k(hL)v; enables the true-error column.
  std::optional<RealVector> reference;
};

struct PhiApproximation {
  RealVector y;
  int m = 0;
  bool breakdown = false;
  bool converged = false;
  std::vector<IterationRecord> history;
};

/// Raised when max_m is reached without meeting the tolerance. Carries the
/// last iterate and its history.
class MaxIterations : public error {
public:
  explicit MaxIterations(PhiApproximation best)
      : error("MaxIterations: tolerance not met within max_m = " +
              std::to_string(best.m) + " iterations"),
        best_{std::move(best)} {}

  const PhiApproximation& best() const { return best_; }

private:
  PhiApproximation best_;
};

inline PhiApproximation rd_arnoldi_phi(const PhiRequest& req,
                                       std::shared_ptr<const ShiftedFactorization> fact,
                                       const SolveOptions& options) {
  const Eigen::Index dim = fact->dimension();
  if (req.v.size() != dim) {
    throw DimensionMismatch("rd_arnoldi_phi: vector length");
  }
  if (std::abs(fact->delta() - req.delta) > 1e-14 * req.delta) {
    throw InvalidArgument("rd_arnoldi_phi: factorization delta differs from request");
  }
  options.stop.validate(dim);
  const bool bounds_available =
      options.theta && *options.theta >= 0.0 && *options.theta < std::numbers::pi / 3.0;
  if ((options.stop.mode == StopMode::bound_fe1 || options.stop.mode == StopMode::bound_fe2) &&
      !bounds_available) {
    throw ThetaOutOfRange("rd_arnoldi_phi: bound stopping needs theta < pi/3");
  }
  if (options.stop.mode == StopMode::oracle && !options.reference) {
    throw InvalidArgument("rd_arnoldi_phi: oracle stopping needs a reference vector");
  }
  if (options.reference && options.reference->size() != dim) {
    throw DimensionMismatch("rd_arnoldi_phi: reference length");
  }

  const double beta = req.v.norm();
  if (!(beta >= 1e-300)) {
    throw ZeroVector("rd_arnoldi_phi: input vector is zero");
  }
  // Stopping is relative to ||v||; every recorded estimate is absolute.
  StoppingRule scaled = options.stop;
  scaled.tolerance = options.stop.tolerance * beta;

  ArnoldiDecomposition dec = arnoldi_init(std::move(fact), req.v / beta);
  PhiApproximation out;

  while (true) {
    dec.extend();
    const int m = static_cast<int>(dec.size());
    const bool last_possible = dec.breakdown() || m == options.stop.max_m || m == dim;
    if (m % options.stop.check_every != 0 && !last_possible) {
      continue;
    }

    const ComplexVector fk = fk_on_hessenberg(req, dec.hessenberg());
    out.y = beta * (dec.basis() * fk.real());
    out.m = m;
    out.breakdown = dec.breakdown();

    IterationRecord rec;
    rec.m = m;
    rec.residual = beta * generalized_residual(dec, fk);
    rec.subdiag_product = dec.subdiagonal_product();
    if (bounds_available) {
      const auto b = bound_aposteriori({req.k, m, req.tau, *options.theta, options.crouzeix,
                                        rec.subdiag_product});
      rec.bound_fe1 = beta * b.fe1;
      rec.bound_fe2 = beta * b.fe2;
    }
    if (options.reference) {
      rec.true_error = (out.y - *options.reference).norm();
    }
    out.history.push_back(rec);

    if (should_stop(scaled, out.history)) {
      out.converged = true;
      return out;
    }
    // After a happy breakdown, or with the full space spanned, the iterate is
    // exact up to rounding.
    if (dec.breakdown() || m == dim) {
      out.converged = true;
      return out;
    }
    if (m >= options.stop.max_m) {
      throw MaxIterations(std::move(out));
    }
  }
}

inline PhiApproximation rd_arnoldi_phi(const PhiRequest& req, const SectorialOperator& op,
                                       const SolveOptions& options) {
  return rd_arnoldi_phi(req, std::make_shared<const ShiftedFactorization>(op, req.delta),
                        options);
}

} // namespace rdkrylov
