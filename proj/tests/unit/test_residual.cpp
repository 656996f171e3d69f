#include <catch2/catch_amalgamated.hpp>

#include "rdkrylov/rd_arnoldi.hpp"
#include "rdkrylov/residual.hpp"
#include "rdkrylov/sector.hpp"

using namespace rdkrylov;

namespace {

RealVector unit_ones(Eigen::Index n) { return RealVector::Ones(n) / std::sqrt(double(n)); }

IterationRecord rec_residual(double r) {
  IterationRecord rec;
  rec.residual = r;
  return rec;
}

} // namespace

TEST_CASE("stop mode names") {
  for (auto mode : {StopMode::residual, StopMode::bound_fe1, StopMode::bound_fe2, StopMode::oracle}) {
    CHECK(parse_stop_mode(to_string(mode)) == mode);
  }
  CHECK_THROWS_AS(parse_stop_mode("sometimes"), InvalidArgument);
}

TEST_CASE("StoppingRule validation") {
  StoppingRule r;
  CHECK_NOTHROW(r.validate(50));
  r.tolerance = 1e-16;
  CHECK_THROWS_AS(r.validate(50), InvalidArgument);
  r = {};
  r.max_m = 51;
  CHECK_THROWS_AS(r.validate(50), InvalidArgument);
  r = {};
  r.check_every = 0;
  CHECK_THROWS_AS(r.validate(50), InvalidArgument);
}

TEST_CASE("should_stop rules") {
  StoppingRule rule;
  rule.tolerance = 1e-12;
  std::vector<IterationRecord> h{rec_residual(1e-13)};
  CHECK_FALSE(should_stop(rule, h));
  h.push_back(rec_residual(1e-14));
  CHECK(should_stop(rule, h));
  h = {rec_residual(1e-13), rec_residual(1e-11), rec_residual(1e-13)};
  CHECK_FALSE(should_stop(rule, h));
  CHECK_FALSE(should_stop(rule, std::vector<IterationRecord>{}));

  rule.mode = StopMode::bound_fe1;
  IterationRecord b;
  b.bound_fe1 = 5e-13;
  CHECK(should_stop(rule, std::vector<IterationRecord>{b}));
  rule.mode = StopMode::bound_fe2;
  CHECK_FALSE(should_stop(rule, std::vector<IterationRecord>{b}));
  b.bound_fe2 = 2e-12;
  CHECK_FALSE(should_stop(rule, std::vector<IterationRecord>{b}));
  rule.mode = StopMode::oracle;
  b.true_error = 1e-12;
  CHECK(should_stop(rule, std::vector<IterationRecord>{b}));
}

TEST_CASE("generalized residual is zero at breakdown") {
  auto dec = arnoldi_init(std::make_shared<const ShiftedFactorization>(SectorialOperator::zero(5), 0.1),
                          unit_ones(5));
  dec.extend();
  const auto req = PhiRequest::from_tau(1, 0.1, 1.0, unit_ones(5));
  CHECK(generalized_residual(dec, req) == 0.0);

  RealVector d(6);
  d << -1, -2, -3, -4, -5, -6;
  RealVector v = RealVector::Zero(6);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  auto dec2 = arnoldi_init(std::make_shared<const ShiftedFactorization>(SectorialOperator::diagonal(d), 0.1), v);
  dec2.extend();
  CHECK(generalized_residual(dec2, req) > 0.0);
  dec2.extend();
  CHECK(dec2.breakdown());
  CHECK(generalized_residual(dec2, req) == 0.0);

  auto empty = arnoldi_init(std::make_shared<const ShiftedFactorization>(SectorialOperator::zero(5), 0.1),
                            unit_ones(5));
  CHECK_THROWS_AS(generalized_residual(empty, req), InvalidArgument);
}

TEST_CASE("generalized residual on the coarse calibration problem") {
  const auto op = make_advection_diffusion(50, 2.0);
  const double theta = compute_sector(op).theta_used();
  const RealVector v = unit_ones(50);
  const auto req = PhiRequest::from_tau(1, 0.1, 15.0 / std::cos(theta), v);
  SolveOptions opt;
  opt.stop.tolerance = 1e-15;
  opt.stop.max_m = 20;
  opt.stop.mode = StopMode::oracle;
  opt.reference = phi_oracle_dense(1, 0.1, op.dense(), v);
  PhiApproximation r;
  try {
    r = rd_arnoldi_phi(req, op, opt);
  } catch (const MaxIterations& e) {
    r = e.best();
  }
  for (const auto& rec : r.history) {
    // The angle this grid produces is wider than the one behind the
    // m >= 13 observation, so the residual settles one step later.
    if (rec.m >= 14) CHECK(rec.residual <= 1e-12);
    // Once the error is small the residual tracks it within two decades.
    if (*rec.true_error <= 1e-4 && *rec.true_error > 1e-13) {
      const double ratio = rec.residual / *rec.true_error;
      CHECK(ratio >= 1e-2);
      CHECK(ratio <= 1e2);
    }
  }
}
