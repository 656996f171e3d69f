#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "rdkrylov/arnoldi.hpp"
#include "rdkrylov/errors.hpp"
#include "rdkrylov/phifun.hpp"

namespace rdkrylov {

enum class StopMode { residual, bound_fe1, bound_fe2, oracle };

inline std::string to_string(StopMode mode) {
  switch (mode) {
  case StopMode::residual: return "residual";
  case StopMode::bound_fe1: return "bound_fe1";
  case StopMode::bound_fe2: return "bound_fe2";
  case StopMode::oracle: return "oracle";
  }
  return "?";
}

inline StopMode parse_stop_mode(const std::string& s) {
  if (s == "residual") return StopMode::residual;
  if (s == "bound_fe1") return StopMode::bound_fe1;
  if (s == "bound_fe2") return StopMode::bound_fe2;
  if (s == "oracle") return StopMode::oracle;
  throw InvalidArgument("unknown stopping mode '" + s + "'");
}

struct StoppingRule {
  double tolerance = 1e-12;
  int max_m = 50;
  StopMode mode = StopMode::residual;
  int check_every = 1;

  void validate(Eigen::Index dimension) const {
    if (!(tolerance >= 1e-15)) {
      throw InvalidArgument("StoppingRule: tolerance must be >= 1e-15");
    }
    if (max_m < 1 || max_m > dimension) {
      throw InvalidArgument("StoppingRule: max_m must be in [1, M]");
    }
    if (check_every < 1) {
      throw InvalidArgument("StoppingRule: check_every must be >= 1");
    }
  }
};

/// Quantities recorded at one checked Krylov dimension m. Error estimates are
/// absolute, i.e. already scaled by the norm of the input vector.
struct IterationRecord {
  int m = 0;
  double residual = 0.0;
  double subdiag_product = 0.0;
  std::optional<double> bound_fe1;
  std::optional<double> bound_fe2;
  std::optional<double> true_error;
};

/// h_{m+1,m} |e_m^T f_k(H_m) e_1| given f_k(H_m) e_1.
inline double generalized_residual(const ArnoldiDecomposition& dec,
                                   const ComplexVector& fk_e1) {
  if (dec.size() < 1 || fk_e1.size() != dec.size()) {
    throw DimensionMismatch("generalized_residual: need f_k(H_m)e_1 of length m");
  }
  return dec.next_subdiagonal() * std::abs(fk_e1(fk_e1.size() - 1));
}

inline double generalized_residual(const ArnoldiDecomposition& dec, const PhiRequest& req) {
  if (dec.size() < 1) {
    throw InvalidArgument("generalized_residual: need m >= 1");
  }
  return generalized_residual(dec, fk_on_hessenberg(req, dec.hessenberg()));
}

/// Stopping test on the checked-iteration history. The residual mode asks for
/// two consecutive hits since the residual can underestimate the error early.
inline bool should_stop(const StoppingRule& rule, std::span<const IterationRecord> history) {
  if (history.empty()) {
    return false;
  }
  const auto& last = history.back();
  switch (rule.mode) {
  case StopMode::residual:
    return history.size() >= 2 && last.residual <= rule.tolerance &&
           history[history.size() - 2].residual <= rule.tolerance;
  case StopMode::bound_fe1:
    return last.bound_fe1 && *last.bound_fe1 <= rule.tolerance;
  case StopMode::bound_fe2:
    return last.bound_fe2 && *last.bound_fe2 <= rule.tolerance;
  case StopMode::oracle:
    return last.true_error && *last.true_error <= rule.tolerance;
  }
  return false;
}

} // namespace rdkrylov
