#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "rhslearn/datagen.hpp"
#include "rhslearn/dynamics.hpp"
#include "rhslearn/rng.hpp"

using namespace rhslearn;
using datagen::NoiseSpec;

namespace {

dynamics::Trajectory traj_from_values(const std::vector<double>& values) {
  dynamics::Trajectory t;
  t.times.resize(values.size());
  t.states = Matrix(values.size(), 1);
  for (std::size_t j = 0; j < values.size(); ++j) {
    t.times[j] = 0.5 * static_cast<double>(j);
    t.states(j, 0) = values[j];
  }
  t.ic = {values.front()};
  return t;
}

}  // namespace

TEST(Datagen, SampleInitialConditionsBox) {
  const auto sys = dynamics::find_builtin("xcosx");
  const auto points = datagen::sample_initial_conditions(sys, 7);
  ASSERT_EQ(points.size(), 200u);
  for (const auto& p : points) {
    EXPECT_GE(p[0], -2.5);
    EXPECT_LE(p[0], 2.5);
  }
  // determinism
  EXPECT_EQ(points, datagen::sample_initial_conditions(sys, 7));
}

TEST(Datagen, SampleInitialConditionsDegenerateBox) {
  dynamics::RhsSystem sys = dynamics::find_builtin("xcosx");
  sys.ic_box = {{1.25, 1.25}};
  sys.n_ic = 10;
  for (const auto& p : datagen::sample_initial_conditions(sys, 1)) {
    EXPECT_DOUBLE_EQ(p[0], 1.25);
  }
}

TEST(Datagen, SampleInitialConditionsLawOfLargeNumbers) {
  dynamics::RhsSystem sys = dynamics::find_builtin("xcosx");
  sys.ic_box = {{0.0, 1.0}};
  sys.n_ic = 100000;
  double mean = 0.0;
  for (const auto& p : datagen::sample_initial_conditions(sys, 99)) mean += p[0];
  mean /= static_cast<double>(sys.n_ic);
  EXPECT_NEAR(mean, 0.5, 0.01);
}

TEST(Datagen, MeanRangeExamples) {
  EXPECT_DOUBLE_EQ(datagen::mean_range({traj_from_values({0.0, 1.0, 3.0})}, 0), 3.0);
  EXPECT_DOUBLE_EQ(
      datagen::mean_range({traj_from_values({0.0, 2.0}), traj_from_values({1.0, 5.0})}, 0), 3.0);
  EXPECT_DOUBLE_EQ(datagen::mean_range({traj_from_values({4.0, 4.0, 4.0})}, 0), 0.0);
  EXPECT_THROW(datagen::mean_range({}, 0), std::invalid_argument);
}

TEST(Datagen, NoiseLevelZeroIsIdentity) {
  const auto sys = dynamics::find_builtin("xcosx");
  std::vector<dynamics::Trajectory> trajs;
  for (const auto& x0 : datagen::sample_initial_conditions(sys, 3)) {
    trajs.push_back(dynamics::integrate(sys, x0));
    if (trajs.size() == 5) break;
  }
  NoiseSpec spec;
  const auto out = datagen::add_noise(trajs, spec);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    EXPECT_EQ(out[i].states, trajs[i].states);
  }
}

TEST(Datagen, NoiseMomentMatchesLevel) {
  // one long synthetic trajectory per stream, 1e6 draws total
  const std::size_t n_traj = 100, m = 10000;
  std::vector<dynamics::Trajectory> trajs(n_traj);
  for (auto& t : trajs) {
    t.times.resize(m);
    t.states = Matrix(m, 1);
    for (std::size_t j = 0; j < m; ++j) {
      t.times[j] = static_cast<double>(j);
      t.states(j, 0) = std::sin(0.001 * static_cast<double>(j));
    }
    t.ic = {0.0};
  }
  NoiseSpec spec;
  spec.level = 0.01;
  spec.seed = 1234;
  const double range = datagen::mean_range(trajs, 0);
  const auto noisy = datagen::add_noise(trajs, spec);
  double acc = 0.0;
  for (std::size_t i = 0; i < n_traj; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = (noisy[i].states(j, 0) - trajs[i].states(j, 0)) / range;
      acc += d * d;
    }
  }
  const double std_hat = std::sqrt(acc / static_cast<double>(n_traj * m));
  EXPECT_NEAR(std_hat, 0.01, 0.0005);
}

TEST(Datagen, ConstantTrajectoriesUnaffectedByNoise) {
  std::vector<dynamics::Trajectory> trajs = {traj_from_values({2.0, 2.0, 2.0, 2.0})};
  NoiseSpec spec;
  spec.level = 0.02;
  spec.seed = 9;
  const auto out = datagen::add_noise(trajs, spec);
  EXPECT_EQ(out[0].states, trajs[0].states);
}

TEST(Datagen, NoiseScaleEquivariance) {
  // scaling by a power of two scales the noisy output exactly
  const auto sys = dynamics::find_builtin("xcosx");
  std::vector<dynamics::Trajectory> trajs;
  for (const auto& x0 : datagen::sample_initial_conditions(sys, 3)) {
    trajs.push_back(dynamics::integrate(sys, x0));
    if (trajs.size() == 4) break;
  }
  std::vector<dynamics::Trajectory> scaled = trajs;
  for (auto& t : scaled) {
    for (double& v : t.states.data) v *= 2.0;
  }
  NoiseSpec spec;
  spec.level = 0.01;
  spec.seed = 77;
  const auto noisy = datagen::add_noise(trajs, spec);
  const auto noisy_scaled = datagen::add_noise(scaled, spec);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    for (std::size_t k = 0; k < trajs[i].states.data.size(); ++k) {
      EXPECT_DOUBLE_EQ(noisy_scaled[i].states.data[k], 2.0 * noisy[i].states.data[k]);
    }
  }
}

TEST(Datagen, OddExtendExamples) {
  EXPECT_EQ(datagen::odd_extend({1.0, 2.0, 4.0}, 2),
            (std::vector<double>{-2.0, 0.0, 1.0, 2.0, 4.0, 6.0, 7.0}));
  EXPECT_EQ(datagen::odd_extend({0.0, 1.0, 2.0}, 1), (std::vector<double>{-1.0, 0.0, 1.0, 2.0, 3.0}));
  EXPECT_EQ(datagen::odd_extend({3.0, 3.0, 3.0}, 2),
            (std::vector<double>(7, 3.0)));
  EXPECT_THROW(datagen::odd_extend({1.0, 2.0}, 2), std::invalid_argument);
}

TEST(Datagen, SplineInterpolatesAtZeroPenalty) {
  const std::vector<double> t = {0.0, 0.4, 1.1, 1.5, 2.2, 3.0};
  const std::vector<double> y = {0.3, -1.0, 2.0, 0.7, 0.1, -0.4};
  const auto curve = datagen::fit_smoothing_curve(t, y, 0.0);
  for (std::size_t j = 0; j < t.size(); ++j) {
    EXPECT_NEAR(curve(t[j]), y[j], 1e-10);
  }
}

TEST(Datagen, SplineReproducesLinesForAnyPenalty) {
  std::vector<double> t = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5};
  std::vector<double> y(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) y[j] = 2.0 - 3.0 * t[j];
  for (double lambda : {0.0, 1e-3, 1.0, 1e4}) {
    const auto curve = datagen::fit_smoothing_curve(t, y, lambda);
    for (double u : {0.0, 0.21, 1.0, 1.73, 2.5}) {
      EXPECT_NEAR(curve(u), 2.0 - 3.0 * u, 1e-10) << "lambda=" << lambda;
    }
  }
}

TEST(Datagen, SplineDefaultRuleDenoisesSine) {
  // Monte Carlo with a fixed seed: smoothing with the residual-matching rule
  // beats the raw noisy samples against the clean sine.
  Rng rng(4242);
  const std::size_t m = 60, reps = 20;
  std::vector<double> t(m);
  for (std::size_t j = 0; j < m; ++j) t[j] = 0.1 * static_cast<double>(j);
  double smoothed_err = 0.0, raw_err = 0.0;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    std::vector<std::vector<double>> series(1, std::vector<double>(m));
    for (std::size_t j = 0; j < m; ++j) {
      series[0][j] = std::sin(t[j]) + rng.normal(0.0, 0.05);
    }
    const double lambda = datagen::choose_smoothing_penalty(t, series, 0.05);
    const auto curve = datagen::fit_smoothing_curve(t, series[0], lambda);
    for (std::size_t j = 0; j < m; ++j) {
      smoothed_err += std::pow(curve(t[j]) - std::sin(t[j]), 2);
      raw_err += std::pow(series[0][j] - std::sin(t[j]), 2);
    }
  }
  EXPECT_LT(smoothed_err, raw_err);
}

TEST(Datagen, SplineInputValidation) {
  EXPECT_THROW(datagen::fit_smoothing_curve({0, 1, 2}, {0, 1, 2}, 0.0), std::invalid_argument);
  EXPECT_THROW(datagen::fit_smoothing_curve({0, 1, 1, 2}, {0, 1, 2, 3}, 0.0), std::invalid_argument);
  EXPECT_THROW(datagen::fit_smoothing_curve({0, 1, 2, 3}, {0, 1, 2, 3}, -1.0), std::invalid_argument);
}

TEST(Datagen, CentralDifferenceExactForQuadratic) {
  // v(t) = t^2, dt = 0.5: interior central differences are exactly 2t
  std::vector<double> v;
  for (int j = 0; j <= 6; ++j) {
    const double t = 0.5 * j;
    v.push_back(t * t);
  }
  const auto ext = datagen::odd_extend(v, 2);
  const auto deriv = datagen::estimate_derivatives(ext, 2, 0.5);
  ASSERT_EQ(deriv.size(), v.size());
  for (int j = 1; j <= 5; ++j) {
    EXPECT_NEAR(deriv[j], 2.0 * 0.5 * j, 1e-12);
  }
}

TEST(Datagen, CentralDifferenceConstantsAreZero) {
  const auto deriv = datagen::estimate_derivatives(std::vector<double>(9, 5.0), 2, 0.5);
  for (double d : deriv) EXPECT_DOUBLE_EQ(d, 0.0);
}

TEST(Datagen, CentralDifferenceSineTaylorBound) {
  // dt = 0.5 central differences of sin against cos: error <= dt^2/6
  std::vector<double> v;
  const double dt = 0.5;
  for (int j = 0; j <= 20; ++j) v.push_back(std::sin(dt * j));
  const auto ext = datagen::odd_extend(v, 1);
  const auto deriv = datagen::estimate_derivatives(ext, 1, dt);
  for (int j = 1; j < 20; ++j) {
    EXPECT_LE(std::fabs(deriv[j] - std::cos(dt * j)), dt * dt / 6.0 + 1e-12);
  }
}

TEST(Datagen, OddExtensionPreservesBoundaryDerivative) {
  // For sine on [0, pi] the end curvature vanishes, so boundary central
  // differences through the extension converge at second order.
  const double b = std::numbers::pi;
  double prev_err = 0.0;
  for (int halvings = 0; halvings < 4; ++halvings) {
    const std::size_t m = 8u << halvings;
    const double dt = b / static_cast<double>(m);
    std::vector<double> v(m + 1);
    for (std::size_t j = 0; j <= m; ++j) v[j] = std::sin(dt * static_cast<double>(j));
    const auto deriv = datagen::estimate_derivatives(datagen::odd_extend(v, 1), 1, dt);
    const double err =
        std::max(std::fabs(deriv.front() - 1.0), std::fabs(deriv.back() - std::cos(b)));
    if (halvings > 0) {
      EXPECT_GE(prev_err / err, 3.0) << "m=" << m;  // ~4x for O(dt^2)
    }
    prev_err = err;
  }
}

TEST(Datagen, EstimateDerivativesValidation) {
  EXPECT_THROW(datagen::estimate_derivatives({1, 2, 3}, 0, 0.5), std::invalid_argument);
  EXPECT_THROW(datagen::estimate_derivatives({1, 2}, 1, 0.5), std::invalid_argument);
  EXPECT_THROW(datagen::estimate_derivatives({1, 2, 3}, 1, 0.0), std::invalid_argument);
}

TEST(Datagen, BuildDatasetCountsForXcosx) {
  const auto sys = dynamics::find_builtin("xcosx");
  const auto ds = datagen::build_dataset(sys, NoiseSpec{}, 11, 12);
  EXPECT_EQ(ds.train.size() + ds.test.size(), 1400u);
  EXPECT_EQ(ds.train.size(), 1120u);
  EXPECT_EQ(ds.test.size(), 280u);
  EXPECT_EQ(ds.n_times, 7u);
  EXPECT_EQ(ds.dim, 1u);
  ASSERT_EQ(ds.train.front().input.size(), 2u);
  ASSERT_EQ(ds.train.front().target.size(), 1u);
}

TEST(Datagen, BuildDatasetNoiselessTargetsTrackTruth) {
  const auto sys = dynamics::find_builtin("xcosx");
  const auto ds = datagen::build_dataset(sys, NoiseSpec{}, 11, 12);
  // interior samples: targets close to f at the observed state; the dt^2
  // truncation bound with max |x'''| ~ 4 gives ~0.17, boundary rows are
  // one-sided and held to a looser O(dt) bound
  for (const auto* part : {&ds.train, &ds.test}) {
    for (const auto& pair : *part) {
      const double t = pair.input[0];
      const double f = pair.input[1] * std::cos(pair.input[1]);
      const bool boundary = t < 0.25 || t > 2.75;
      EXPECT_LE(std::fabs(pair.target[0] - f), boundary ? 1.0 : 0.17)
          << "t=" << t << " x=" << pair.input[1];
    }
  }
}

TEST(Datagen, BuildDatasetDeterministic) {
  const auto sys = dynamics::find_builtin("xcosx");
  NoiseSpec spec;
  spec.level = 0.01;
  spec.seed = 5;
  const auto a = datagen::build_dataset(sys, spec, 11, 12);
  const auto b = datagen::build_dataset(sys, spec, 11, 12);
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].input, b.train[i].input);
    EXPECT_EQ(a.train[i].target, b.train[i].target);
    EXPECT_EQ(a.train[i].grid_index, b.train[i].grid_index);
  }
}

TEST(Datagen, SplitCoversGridExactlyOnce) {
  const auto sys = dynamics::find_builtin("explog");
  NoiseSpec spec;
  spec.level = 0.01;
  spec.seed = 3;
  const auto ds = datagen::build_dataset(sys, spec, 21, 22);
  std::set<std::size_t> seen;
  for (const auto* part : {&ds.train, &ds.test}) {
    for (const auto& pair : *part) {
      EXPECT_TRUE(seen.insert(pair.grid_index).second);
    }
  }
  EXPECT_EQ(seen.size(), ds.n_trajectories * ds.n_times);
  EXPECT_EQ(*seen.rbegin(), ds.n_trajectories * ds.n_times - 1);
}

TEST(Datagen, ComponentViewExtractsScalarTargets) {
  const auto sys = dynamics::find_builtin("lotka_volterra");
  dynamics::RhsSystem small = sys;
  small.n_ic = 10;
  const auto ds = datagen::build_dataset(small, NoiseSpec{}, 1, 2);
  const auto view = datagen::component_view(ds, 1);
  ASSERT_EQ(view.train.size(), ds.train.size());
  for (std::size_t i = 0; i < view.train.size(); ++i) {
    ASSERT_EQ(view.train[i].target.size(), 1u);
    EXPECT_DOUBLE_EQ(view.train[i].target[0], ds.train[i].target[1]);
    EXPECT_EQ(view.train[i].input, ds.train[i].input);
  }
  EXPECT_THROW(datagen::component_view(ds, 2), std::invalid_argument);
}
