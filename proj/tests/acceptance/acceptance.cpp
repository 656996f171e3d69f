// Acceptance gate: one PASS/FAIL line per criterion. With an argument N only
// criterion N runs. Exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rdkrylov/arnoldi.hpp"
#include "rdkrylov/bounds.hpp"
#include "rdkrylov/laguerre.hpp"
#include "rdkrylov/rd_arnoldi.hpp"
#include "rdkrylov/sector.hpp"
#include "rdkrylov/smalldense.hpp"
#include "rdkrylov/tauselect.hpp"
#include "support/oracles.hpp"

using namespace rdkrylov;
using cplx = std::complex<double>;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Clock {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RealVector unit_ones(Eigen::Index n) { return RealVector::Ones(n) / std::sqrt(double(n)); }

SectorialOperator advdiff(double c, Eigen::Index m) { return make_advection_diffusion(m, c); }

// Iterations until the oracle error first drops to tol, or -1.
int iterations_to(const PhiApproximation& r, double tol) {
  for (const auto& rec : r.history) {
    if (rec.true_error && *rec.true_error <= tol) return rec.m;
  }
  return -1;
}

PhiApproximation run_or_best(const PhiRequest& req, const SectorialOperator& op,
                             const SolveOptions& opt) {
  try {
    return rd_arnoldi_phi(req, op, opt);
  } catch (const MaxIterations& e) {
    return e.best();
  }
}

// ---------------------------------------------------------------------------
// Criteria 1 and 2 share the same runs.

struct OracleRun {
  double c = 0.0, h = 0.0, theta = 0.0, tau = 0.0;
  int k = 0, target_m = 0;
  double final_error = 0.0;
  PhiApproximation approx;
};

struct OracleSuite {
  std::vector<OracleRun> runs;
  double seconds = 0.0;
};

const OracleSuite& oracle_suite() {
  static const OracleSuite suite = [] {
    OracleSuite s;
    Clock clock;
    const Eigen::Index m_grid = 50;
    for (double c : {0.0, 2.0, 4.0}) {
      const auto op = advdiff(c, m_grid);
      const RealMatrix dense = op.dense();
      const double theta = compute_sector(op).theta_used();
      const RealVector v = unit_ones(m_grid);
      for (double h : {0.05, 0.5}) {
        for (int k = 0; k <= 2; ++k) {
          OracleRun r;
          r.c = c;
          r.h = h;
          r.k = k;
          r.theta = theta;
          const auto policy =
              calibrate_on_coarse([c](Eigen::Index n) { return advdiff(c, n); }, k, h, theta);
          r.target_m = policy.target_m;
          r.tau = policy.tau_opt;
          SolveOptions opt;
          opt.stop.tolerance = 1e-13;
          opt.stop.max_m = static_cast<int>(m_grid);
          opt.stop.mode = StopMode::residual;
          opt.theta = theta;
          opt.crouzeix = c == 0.0 ? 1.0 : crouzeix_default;
          opt.reference = phi_oracle_dense(k, h, dense, v);
          r.approx = run_or_best(PhiRequest::from_tau(k, h, r.tau, v), op, opt);
          r.final_error = (r.approx.y - *opt.reference).norm();
          s.runs.push_back(std::move(r));
        }
      }
    }
    s.seconds = clock.seconds();
    return s;
  }();
  return suite;
}

Outcome criterion1() {
  const auto& s = oracle_suite();
  Outcome o;
  double worst = 0.0;
  for (const auto& r : s.runs) {
    worst = std::max(worst, r.final_error);
    if (!(r.final_error <= 1e-10)) {
      o.pass = false;
    }
  }
  if (!(s.seconds < 10.0)) o.pass = false;
  std::ostringstream d;
  d << s.runs.size() << " runs (M=50, c in {0,2,4}, h in {0.05,0.5}, k in {0,1,2}), worst final error "
    << worst << " (limit 1e-10), " << s.seconds << " s (limit 10 s)";
  o.detail = d.str();
  return o;
}

Outcome criterion2() {
  const auto& s = oracle_suite();
  Outcome o;
  int checked = 0, violations = 0;
  double min_ratio = INFINITY;
  for (const auto& r : s.runs) {
    if (!(r.theta < std::numbers::pi / 3.0)) continue;
    for (const auto& rec : r.approx.history) {
      const double err = *rec.true_error;
      if (err < 1e-13) break;
      ++checked;
      if (!rec.bound_fe1 || !rec.bound_fe2) {
        ++violations;
        continue;
      }
      if (!(*rec.bound_fe1 >= err)) ++violations;
      if (!(*rec.bound_fe2 >= err)) ++violations;
      min_ratio = std::min({min_ratio, *rec.bound_fe1 / err, *rec.bound_fe2 / err});
    }
  }
  o.pass = violations == 0 && checked > 0;
  std::ostringstream d;
  d << checked << " iterates checked, " << violations << " violations, smallest bound/error "
    << min_ratio;
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion3() {
  Clock clock;
  Outcome o;
  std::ostringstream d;
  const std::map<double, double> expected{{2.0, 0.201}, {4.0, 0.425}};
  for (auto [c, want] : expected) {
    const double fine = compute_sector(advdiff(c, 1000)).theta;
    const double coarse = compute_sector(advdiff(c, 50)).theta;
    const bool ok_value = std::abs(fine - want) <= 0.02;
    const bool ok_mesh = std::abs(fine - coarse) <= 0.02;
    o.pass = o.pass && ok_value && ok_mesh;
    d << "c=" << c << ": theta(M=1000)=" << fine << " (expected " << want << " +-0.02"
      << (ok_value ? "" : ", off") << "), theta(M=50)=" << coarse << (ok_mesh ? "" : " (mesh drift)")
      << "; ";
  }
  const double t = clock.seconds();
  if (!(t < 60.0)) o.pass = false;
  d << t << " s";
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------
// Criteria 4 and 5: c = 2, h = 0.1, k = 1.

struct Calibration {
  double theta = 0.0;
  TauPolicy policy;
};

const Calibration& calibration() {
  static const Calibration cal = [] {
    Calibration c;
    c.theta = compute_sector(advdiff(2.0, 50)).theta_used();
    c.policy = calibrate_on_coarse([](Eigen::Index n) { return advdiff(2.0, n); }, 1, 0.1, c.theta);
    return c;
  }();
  return cal;
}

Outcome criterion4() {
  const auto& cal = calibration();
  const double ref_tau = 15.0 / std::cos(cal.theta);
  const double rel = std::abs(cal.policy.tau_opt - ref_tau) / ref_tau;
  Outcome o;
  o.pass = cal.policy.target_m >= 12 && cal.policy.target_m <= 16 && rel <= 0.15;
  std::ostringstream d;
  d << "target_m=" << cal.policy.target_m << " (range [12,16]), tau=" << cal.policy.tau_opt
    << " vs 15/cos(theta)=" << ref_tau << " (" << 100.0 * rel << "% off, limit 15%)";
  o.detail = d.str();
  return o;
}

Outcome criterion5() {
  const auto& cal = calibration();
  const auto op = advdiff(2.0, 200);
  const RealVector v = unit_ones(200);
  SolveOptions opt;
  opt.stop.tolerance = 1e-12;
  opt.stop.max_m = 60;
  opt.stop.mode = StopMode::oracle;
  opt.reference = phi_oracle_dense(1, 0.1, op.dense(), v);
  const auto fact_for = [&](double tau) {
    return run_or_best(PhiRequest::from_tau(1, 0.1, tau, v), op, opt);
  };
  const double tau = cal.policy.tau_opt;
  const int n1 = iterations_to(fact_for(tau), 1e-12);
  const int nh = iterations_to(fact_for(0.5 * tau), 1e-12);
  const int n2 = iterations_to(fact_for(2.0 * tau), 1e-12);
  const int limit = cal.policy.target_m + 3;
  Outcome o;
  o.pass = n1 > 0 && nh > 0 && n2 > 0 && nh <= limit && n2 <= limit && nh <= n1 + 1;
  std::ostringstream d;
  d << "M=200 iterations to 1e-12: tau*=" << n1 << ", tau*/2=" << nh << ", 2tau*=" << n2
    << " (limit target_m+3=" << limit << "; tau*/2 at most tau* + 1)";
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion6() {
  Outcome o;
  std::ostringstream d;
  const Eigen::Index m_grid = 200;
  const RealVector v = unit_ones(m_grid);
  for (double c : {2.0, 4.0}) {
    const auto op = advdiff(c, m_grid);
    const RealMatrix dense = op.dense();
    const double theta = compute_sector(advdiff(c, 50)).theta_used();
    for (int k = 0; k <= 2; ++k) {
      int its[2] = {0, 0};
      const double hs[2] = {0.05, 0.5};
      for (int i = 0; i < 2; ++i) {
        const auto policy =
            calibrate_on_coarse([c](Eigen::Index n) { return advdiff(c, n); }, k, hs[i], theta);
        SolveOptions opt;
        opt.stop.tolerance = 1e-12;
        opt.stop.max_m = 80;
        opt.stop.mode = StopMode::oracle;
        opt.reference = phi_oracle_dense(k, hs[i], dense, v);
        its[i] = iterations_to(run_or_best(PhiRequest::from_tau(k, hs[i], policy.tau_opt, v), op, opt),
                               1e-12);
      }
      const bool ok = its[0] > 0 && its[1] > 0 && its[0] > its[1];
      o.pass = o.pass && ok;
      d << "c=" << c << " k=" << k << ": " << its[0] << " (h=0.05) vs " << its[1] << " (h=0.5)"
        << (ok ? "" : " NOT slower") << "; ";
    }
  }
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion7() {
  Outcome o;
  const Eigen::Index m_grid = 100;
  const auto op = advdiff(0.0, m_grid);
  const RealMatrix dense = op.dense();
  const RealVector v = unit_ones(m_grid);
  int checked = 0, violations = 0;
  double worst = 0.0;
  for (double h : {0.05, 0.5}) {
    for (int k = 0; k <= 2; ++k) {
      const RealVector ref = phi_oracle_dense(k, h, dense, v);
      for (int m = 1; m <= 25; ++m) {
        SolveOptions opt;
        opt.stop.tolerance = 1e-15;
        opt.stop.max_m = m;
        opt.reference = ref;
        const auto r = run_or_best(PhiRequest::from_tau(k, h, double(m + k), v), op, opt);
        const double err = (r.y - ref).norm();
        const double bound = 8.0 / std::tgamma(k + 1.0) * std::pow(2.0 / std::numbers::e, k) *
                             std::pow(0.5, m);
        ++checked;
        worst = std::max(worst, err / bound);
        if (!(err <= bound)) ++violations;
      }
    }
  }
  o.pass = violations == 0;
  std::ostringstream d;
  d << checked << " (h, k, m) cases at M=100, c=0, " << violations
    << " violations, largest error/bound " << worst;
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------

double binom(double top, int r) {
  return std::exp(std::lgamma(top + 1.0) - std::lgamma(r + 1.0) - std::lgamma(top - r + 1.0));
}

Outcome criterion8() {
  Clock clock;
  Outcome o;
  int fails[4] = {0, 0, 0, 0};
  oracle::Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const int n = rng.integer(0, 10);
    const double a = rng.uniform(0.0, 3.0), b = rng.uniform(0.0, 3.0);
    const cplx z1 = rng.complex_in_disk(5.0), z2 = rng.complex_in_disk(5.0);
    cplx sum{};
    double mag = 0.0;
    for (int j = 0; j <= n; ++j) {
      const cplx term = laguerre(j, a, z1) * laguerre(n - j, b, z2);
      sum += term;
      mag += std::abs(term);
    }
    if (!(std::abs(laguerre(n, a + b + 1.0, z1 + z2) - sum) <= 1e-9 * std::max(mag, 1.0))) ++fails[0];
  }
  for (int t = 0; t < 200; ++t) {
    const int n = rng.integer(0, 10);
    const double a = rng.uniform(0.0, 3.0);
    const cplx z1 = rng.complex_in_disk(5.0), z2 = rng.complex_in_disk(5.0);
    cplx sum{};
    double mag = 0.0;
    for (int j = 0; j <= n; ++j) {
      const cplx term =
          binom(n + a, n - j) * laguerre(j, a, z1) * std::pow(z2, j) * std::pow(1.0 - z2, n - j);
      sum += term;
      mag += std::abs(term);
    }
    if (!(std::abs(laguerre(n, a, z1 * z2) - sum) <= 1e-9 * std::max(mag, 1.0))) ++fails[1];
  }
  for (int t = 0; t < 200; ++t) {
    const int n = rng.integer(0, 30);
    const double a = rng.integer(0, 3);
    const double x = rng.uniform(0.0, 100.0);
    const double bound = std::tgamma(n + a + 1.0) / (std::tgamma(n + 1.0) * std::tgamma(a + 1.0));
    if (!(std::exp(-x / 2.0) * std::abs(laguerre(n, a, x)) <= bound * (1.0 + 1e-12))) ++fails[2];
  }
  for (int t = 0; t < 200; ++t) {
    const int m = rng.integer(1, 10);
    const int k = rng.integer(0, 3);
    const double x = rng.uniform(1e-3, 20.0);
    const double sign = (k % 2 == 0) ? -1.0 : 1.0;
    const cplx rhs = sign * std::pow(x, k + 1) * std::tgamma(m) / std::tgamma(m + k + 1.0) *
                     laguerre(m - 1, k + 1.0, x);
    const cplx lhs = laguerre(m + k, -1.0 - k, x);
    const cplx direct = oracle::laguerre_explicit(m + k, -1.0 - k, x);
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
    if (!(std::abs(lhs - rhs) <= 1e-9 * scale) || !(std::abs(direct - rhs) <= 1e-9 * scale)) ++fails[3];
  }
  const double t = clock.seconds();
  o.pass = fails[0] + fails[1] + fails[2] + fails[3] == 0 && t < 5.0;
  std::ostringstream d;
  d << "failures L1=" << fails[0] << " L2=" << fails[1] << " L3=" << fails[2]
    << " connection=" << fails[3] << " (200 cases each), " << t << " s (limit 5 s)";
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion9() {
  Outcome o;
  oracle::Rng rng(9);
  double worst_orth = 0.0, worst_rel = 0.0, worst_prod = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = rng.integer(10, 20);
    const auto op = advdiff(rng.uniform(0.0, 6.0), n);
    const double delta = rng.uniform(1e-3, 0.1);
    const RealMatrix z = oracle::dense_z(op.dense(), delta);
    RealVector v = rng.vector(n);
    v /= v.norm();
    auto dec = arnoldi_init(std::make_shared<const ShiftedFactorization>(op, delta), v);
    for (int m = 1; m <= 8 && !dec.breakdown(); ++m) {
      dec.extend();
      const RealMatrix vm = dec.basis();
      worst_orth = std::max(worst_orth, (vm.transpose() * vm - RealMatrix::Identity(m, m)).norm());
      RealMatrix res = z * vm - vm * dec.hessenberg();
      res.col(m - 1) -= dec.extended_hessenberg()(m, m - 1) * dec.vectors()[std::size_t(m)];
      for (int j = 0; j < m; ++j) worst_rel = std::max(worst_rel, res.col(j).norm() / z.norm());
      Eigen::VectorXcd w = v.cast<cplx>();
      for (auto lambda : hessenberg_eigenvalues(dec.hessenberg().cast<cplx>())) {
        w = z.cast<cplx>() * w - lambda * w;
      }
      worst_prod = std::max(worst_prod, std::abs(dec.subdiagonal_product() - w.norm()) / w.norm());
    }
  }
  o.pass = worst_orth <= 1e-12 && worst_rel <= 1e-10 && worst_prod <= 1e-8;
  std::ostringstream d;
  d << "orthonormality " << worst_orth << " (1e-12), relation " << worst_rel
    << "*||Z|| (1e-10), subdiagonal product vs ||q_m(Z)v|| " << worst_prod << " (1e-8)";
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------

// log of (e^{tau-n-1}/tau^n)(2(n+1))^{n+1}(1/4)^n, written out directly.
double log_window_side(int n, double tau) {
  return tau - n - 1 - n * std::log(tau) + (n + 1) * std::log(2.0 * (n + 1)) + n * std::log(0.25);
}

Outcome criterion10() {
  Outcome o;
  double worst = 0.0;
  int failures = 0, nested = 0;
  for (int m = 2; m <= 40; ++m) {
    const double rhs = log_window_side(m, double(m));
    const auto w1 = tau_window(m, 0, 0.0, 1);
    const auto w2 = tau_window(m, 0, 0.0, 2);
    for (const auto* w : {&w1, &w2}) {
      if (w->bracket_failure) {
        ++failures;
        continue;
      }
      worst = std::max(worst, std::abs(std::expm1(log_window_side(w->n_lo, w->tau_lo) - rhs)));
      worst = std::max(worst, std::abs(std::expm1(log_window_side(w->n_hi, w->tau_hi) - rhs)));
    }
    if (!w1.bracket_failure && !w2.bracket_failure && w2.tau_lo <= w1.tau_lo && w2.tau_hi >= w1.tau_hi) {
      ++nested;
    }
  }
  o.pass = failures == 0 && worst <= 1e-6 && nested == 39;
  std::ostringstream d;
  d << "m=2..40, extra 1 and 2: worst relative residual " << worst << " (1e-6), bracket failures "
    << failures << ", nested windows " << nested << "/39";
  o.detail = d.str();
  return o;
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle equivalence", criterion1},   {"bound validity", criterion2},
      {"sector angles", criterion3},        {"calibration", criterion4},
      {"tau robustness", criterion5},       {"h dependence", criterion6},
      {"a-priori rate", criterion7},        {"Laguerre identities", criterion8},
      {"Arnoldi invariants", criterion9},   {"window equation", criterion10},
  };
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [1-%zu]\n", argv[0], criteria.size());
      return 2;
    }
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("C%-2zu %s  %s: %s\n", i + 1, out.pass ? "PASS" : "FAIL", criteria[i].first,
                out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
