#pragma once

// Choice of tau = h / delta: closed-form optima, calibration on a coarse
// discretization, the robustness window around tau_opt and the predicate
// deciding whether an existing factorization of I - delta L can be kept.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>

#include "rdkrylov/bounds.hpp"
#include "rdkrylov/errors.hpp"
#include "rdkrylov/operators.hpp"
#include "rdkrylov/phifun.hpp"
#include "rdkrylov/rd_arnoldi.hpp"

namespace rdkrylov {

namespace detail {
inline double checked_cos(double theta, const char* where) {
  if (!(theta >= 0.0) || !(theta < std::numbers::pi / 2.0)) {
    throw ThetaOutOfRange(std::string(where) + ": theta must be in [0, pi/2)");
  }
  return std::cos(theta);
}
} // namespace detail

/// Minimizer in tau of the fe2 bound at fixed m.
inline double tau_optimal(int m, int k, double theta) {
  return (m + k) / detail::checked_cos(theta, "tau_optimal");
}

/// Smaller optimum obtained when the subdiagonal product decays superlinearly.
inline double tau_optimal_revised(int m, int k, double theta) {
  return (m + 2 * k) / (2.0 * detail::checked_cos(theta, "tau_optimal_revised"));
}

/// Approximate minimizer of the bounded-sector bound, h R = hR.
inline double tau_bounded_sector(int m, int k, double h, double radius) {
  if (!(h > 0.0) || !(radius > 0.0)) {
    throw InvalidArgument("tau_bounded_sector: h and R must be positive");
  }
  return std::sqrt(2.0 * h * radius * (m + k + 1));
}

struct TauWindow {
  double tau_lo = 0.0;
  double tau_hi = 0.0;
  /// Iteration counts n whose equation each endpoint solves.
  int n_lo = 0;
  int n_hi = 0;
  /// Set when a root could not be bracketed; the window then collapses to
  /// (tau_opt, tau_opt).
  bool bracket_failure = false;
};

struct TauPolicy {
  double theta = 0.0;
  int k = 0;
  int target_m = 0;
  double tau_opt = 0.0;
  double tau_lo = 0.0;
  double tau_hi = 0.0;
  bool bracket_failure = false;
};

/// Policy around tau_opt with the indicative window [tau_opt/2, 2 tau_opt].
inline TauPolicy default_policy(int m, int k, double theta) {
  TauPolicy p;
  p.theta = theta;
  p.k = k;
  p.target_m = m;
  p.tau_opt = tau_optimal(m, k, theta);
  p.tau_lo = 0.5 * p.tau_opt;
  p.tau_hi = 2.0 * p.tau_opt;
  return p;
}

/// log of the tau- and m-dependent part of the fe2 bound, with the product of
/// subdiagonal entries modelled as capacity(theta)^m. The Crouzeix constant
/// and ||v|| cancel from the window equation and are left out.
inline double log_window_model(int m, int k, double tau, double theta) {
  const double cos_t = std::cos(theta);
  const int mk = m + k;
  return tau * cos_t - (mk + 1) - mk * std::log(tau) +
         (mk + 1) * std::log(2.0 * (mk + 1) / (2.0 * cos_t - 1.0)) +
         m * std::log(capacity(theta));
}

/// log of (model at (m + extra, tau)) / (model at (m, tau_opt)); the window
/// is where this is <= 0.
inline double window_equation(int m, int k, double theta, int extra, double tau) {
  const double tau_opt = tau_optimal(m, k, theta);
  return log_window_model(m + extra, k, tau, theta) - log_window_model(m, k, tau_opt, theta);
}

/// Endpoints of the set of tau for which at most m + extra iterations match
/// what m iterations achieve with tau_opt. Each endpoint is a root, found by
/// bisection on one side of tau_opt, of the equation for some n in
/// (m, m + extra]; the model is not monotone in n for small tau, so the
/// outermost root over n is taken.
inline TauWindow tau_window(int m, int k, double theta, int extra) {
  if (m < 1 || k < 0 || extra < 1 || extra > 2) {
    throw InvalidArgument("tau_window: need m >= 1, k >= 0, extra in {1, 2}");
  }
  detail::require_theta_below(theta, std::numbers::pi / 3.0, "tau_window");
  const double tau_opt = tau_optimal(m, k, theta);

  auto solve = [&](int e, double a, double b, double& root) {
    auto g = [&](double tau) { return window_equation(m, k, theta, e, tau); };
    double ga = g(a);
    const double gb = g(b);
    if (!(ga * gb < 0.0)) {
      return false;
    }
    for (int it = 0; it < 200 && b - a > 1e-14 * tau_opt; ++it) {
      const double mid = 0.5 * (a + b);
      const double gm = g(mid);
      if ((gm < 0.0) == (ga < 0.0)) {
        a = mid;
        ga = gm;
      } else {
        b = mid;
      }
    }
    root = 0.5 * (a + b);
    return true;
  };

  TauWindow w{tau_opt, tau_opt, m, m, false};
  bool any = false;
  for (int e = 1; e <= extra; ++e) {
    double lo = 0.0;
    double hi = 0.0;
    // No sign change: with this n the model never reaches the level of m
    // iterations at tau_opt, so n contributes nothing to the window.
    if (!solve(e, tau_opt / 10.0, tau_opt, lo) || !solve(e, tau_opt, 10.0 * tau_opt, hi)) {
      continue;
    }
    any = true;
    if (lo < w.tau_lo) {
      w.tau_lo = lo;
      w.n_lo = m + e;
    }
    if (hi > w.tau_hi) {
      w.tau_hi = hi;
      w.n_hi = m + e;
    }
  }
  w.bracket_failure = !any;
  return w;
}

/// Keep the factorization built for delta_old when the new step gives a tau
/// inside the policy window.
inline bool reuse_decision(const TauPolicy& policy, double h_new, double delta_old) {
  if (!(h_new > 0.0) || !(delta_old > 0.0)) {
    throw InvalidArgument("reuse_decision: inputs must be positive");
  }
  const double tau_new = h_new / delta_old;
  return tau_new >= policy.tau_lo && tau_new <= policy.tau_hi;
}

using OperatorFactory = std::function<SectorialOperator(Eigen::Index)>;

struct CalibrationOptions {
  Eigen::Index m_coarse = 50;
  double tolerance = 1e-12;
  /// Stop on the generalized residual instead of the dense reference.
  bool use_residual = false;
  /// Window width parameter passed to tau_window.
  int window_extra = 2;
};

/// Smallest m such that RD Arnoldi with tau = (m+k)/cos(theta) reaches the
/// tolerance on the coarse operator within m iterations.
inline TauPolicy calibrate_on_coarse(const OperatorFactory& make_op, int k, double h,
                                     double theta, const CalibrationOptions& opt = {}) {
  const SectorialOperator op = make_op(opt.m_coarse);
  const Eigen::Index dim = op.dimension();
  const RealVector v = RealVector::Ones(dim) / std::sqrt(static_cast<double>(dim));
  SolveOptions solve;
  solve.stop.tolerance = opt.tolerance;
  if (opt.use_residual) {
    solve.stop.mode = StopMode::residual;
  } else {
    solve.stop.mode = StopMode::oracle;
    solve.reference = phi_oracle_dense(k, h, op.dense(), v);
  }

  for (int m = 1; m <= dim; ++m) {
    const auto req = PhiRequest::from_tau(k, h, tau_optimal(m, k, theta), v);
    solve.stop.max_m = m;
    try {
      const auto result = rd_arnoldi_phi(req, op, solve);
      if (result.converged) {
        TauPolicy p;
        p.theta = theta;
        p.k = k;
        p.target_m = m;
        p.tau_opt = req.tau;
        if (theta < std::numbers::pi / 3.0) {
          const auto w = tau_window(m, k, theta, opt.window_extra);
          p.tau_lo = w.tau_lo;
          p.tau_hi = w.tau_hi;
          p.bracket_failure = w.bracket_failure;
        } else {
          p.tau_lo = 0.5 * p.tau_opt;
          p.tau_hi = 2.0 * p.tau_opt;
        }
        return p;
      }
    } catch (const MaxIterations&) {
    }
  }
  throw NoConvergence("calibrate_on_coarse: no m <= M_coarse reaches the tolerance");
}

} // namespace rdkrylov
