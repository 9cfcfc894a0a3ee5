#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rhslearn/dynamics.hpp"
#include "rhslearn/errors.hpp"

using namespace rhslearn;
using dynamics::RhsSystem;

namespace {

RhsSystem make_exp_decay() {
  for (auto& s : dynamics::test_systems()) {
    if (s.id == "exp_decay") return s;
  }
  throw std::logic_error("exp_decay missing");
}

}  // namespace

TEST(Dynamics, EvalRhsClosedForms) {
  const auto xcosx = dynamics::find_builtin("xcosx");
  EXPECT_DOUBLE_EQ(dynamics::eval_rhs(xcosx, 0.0, {0.0})[0], 0.0);

  const auto lv = dynamics::find_builtin("lotka_volterra");
  const auto eq = dynamics::eval_rhs(lv, 0.0, {3.0, 1.5});
  EXPECT_DOUBLE_EQ(eq[0], 0.0);
  EXPECT_DOUBLE_EQ(eq[1], 0.0);

  const auto pend = dynamics::find_builtin("pendulum");
  const auto f = dynamics::eval_rhs(pend, 0.0, {0.0, 0.0});
  EXPECT_DOUBLE_EQ(f[0], 0.0);
  EXPECT_DOUBLE_EQ(f[1], 1.0);
}

TEST(Dynamics, EvalRhsInputErrors) {
  const auto xcosx = dynamics::find_builtin("xcosx");
  EXPECT_THROW(dynamics::eval_rhs(xcosx, 0.0, {1.0, 2.0}), std::invalid_argument);
  const auto explog = dynamics::find_builtin("explog");
  EXPECT_THROW(dynamics::eval_rhs(explog, 0.0, {1.0}), std::domain_error);
  EXPECT_THROW(dynamics::eval_rhs(explog, -0.5, {1.0}), std::domain_error);
  EXPECT_NEAR(dynamics::eval_rhs(explog, 1.0, {0.0})[0], -1.0, 1e-15);
}

TEST(Dynamics, BuiltinCatalog) {
  const auto systems = dynamics::builtin_systems();
  ASSERT_EQ(systems.size(), 4u);

  const auto xcosx = dynamics::find_builtin("xcosx");
  EXPECT_DOUBLE_EQ(xcosx.dt, 0.5);
  EXPECT_DOUBLE_EQ(xcosx.t_start, 0.0);
  EXPECT_DOUBLE_EQ(xcosx.t_end, 3.0);
  EXPECT_EQ(xcosx.n_ic, 200u);
  EXPECT_DOUBLE_EQ(xcosx.ic_box[0][0], -2.5);
  EXPECT_DOUBLE_EQ(xcosx.ic_box[0][1], 2.5);
  EXPECT_EQ(dynamics::num_samples(xcosx), 7u);

  const auto pend = dynamics::find_builtin("pendulum");
  EXPECT_EQ(pend.dim, 2u);
  EXPECT_EQ(pend.n_ic, 1000u);
  EXPECT_DOUBLE_EQ(pend.t_end, 2.0);

  EXPECT_EQ(dynamics::num_samples(dynamics::find_builtin("explog")), 4u);
  EXPECT_EQ(dynamics::num_samples(dynamics::find_builtin("lotka_volterra")), 9u);
  EXPECT_THROW(dynamics::find_builtin("nope"), std::invalid_argument);
}

TEST(Dynamics, IntegrateExpDecay) {
  const auto sys = make_exp_decay();
  const auto traj = dynamics::integrate(sys, {1.0});
  ASSERT_EQ(traj.times.size(), 3u);
  EXPECT_DOUBLE_EQ(traj.states(0, 0), 1.0);
  EXPECT_NEAR(traj.states(2, 0), std::exp(-1.0), 1e-6);
}

TEST(Dynamics, IntegrateZeroRhsIsConstant) {
  auto sys = dynamics::test_systems()[1];
  ASSERT_EQ(sys.id, "zero");
  const auto traj = dynamics::integrate(sys, {0.37});
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    EXPECT_DOUBLE_EQ(traj.states(j, 0), 0.37);
  }
}

TEST(Dynamics, XcosxFixedPointAtHalfPi) {
  const auto sys = dynamics::find_builtin("xcosx");
  const double half_pi = std::numbers::pi / 2.0;
  const auto traj = dynamics::integrate(sys, {half_pi});
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    EXPECT_NEAR(traj.states(j, 0), half_pi, 1e-12);
  }
}

TEST(Dynamics, LotkaVolterraEquilibriumStays) {
  const auto sys = dynamics::find_builtin("lotka_volterra");
  const auto traj = dynamics::integrate(sys, {3.0, 1.5});
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    EXPECT_NEAR(traj.states(j, 0), 3.0, 1e-6);
    EXPECT_NEAR(traj.states(j, 1), 1.5, 1e-6);
  }
}

TEST(Dynamics, TimeGridIsConstructedExactly) {
  const auto sys = dynamics::find_builtin("lotka_volterra");
  const auto traj = dynamics::integrate(sys, {2.0, 2.0});
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    EXPECT_DOUBLE_EQ(traj.times[j], sys.t_start + static_cast<double>(j) * sys.dt);
  }
}

TEST(Dynamics, FourthOrderConvergence) {
  const auto sys = make_exp_decay();
  double prev_err = 0.0;
  for (std::size_t n_sub : {1u, 2u, 4u, 8u}) {
    const auto traj = dynamics::integrate(sys, {1.0}, n_sub);
    double err = 0.0;
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
      err = std::max(err, std::fabs(traj.states(j, 0) - std::exp(-traj.times[j])));
    }
    if (n_sub > 1) {
      // halving the step must cut the error by at least 2^3 = 8
      EXPECT_GE(prev_err / err, 8.0) << "n_sub=" << n_sub;
    }
    prev_err = err;
  }
}

TEST(Dynamics, BlowUpRaisesIntegrationError) {
  RhsSystem sys;
  sys.id = "blowup";
  sys.dim = 1;
  sys.rhs = [](double, const std::vector<double>& x) {
    return std::vector<double>{x[0] * x[0]};
  };
  sys.t_start = 0.0;
  sys.t_end = 4.0;
  sys.dt = 0.5;
  sys.ic_box = {{1.0, 1.0}};
  try {
    dynamics::integrate(sys, {1.0});
    FAIL() << "expected integration_error";
  } catch (const integration_error& e) {
    EXPECT_GT(e.failing_time(), 0.0);
    EXPECT_LE(e.failing_time(), 4.0);
  }
}

TEST(Dynamics, NumSamplesValidation) {
  RhsSystem sys = make_exp_decay();
  sys.dt = -1.0;
  EXPECT_THROW(dynamics::num_samples(sys), std::invalid_argument);
  sys.dt = 0.5;
  sys.t_end = sys.t_start;
  EXPECT_THROW(dynamics::num_samples(sys), std::invalid_argument);
}
