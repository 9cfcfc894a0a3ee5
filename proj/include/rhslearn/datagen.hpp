#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rhslearn/dynamics.hpp"
#include "rhslearn/linalg.hpp"
#include "rhslearn/rng.hpp"

namespace rhslearn::datagen {

struct NoiseSpec {
  double level = 0.0;  // noise scale as a fraction of the mean component range
  // Literal reading of "N(0, 0.01)" as variance instead of standard deviation.
  bool param_is_variance = false;
  std::uint64_t seed = 0;

  double sigma() const { return param_is_variance ? std::sqrt(level) : level; }
};

struct SamplePair {
  std::vector<double> input;   // (t, x^1, ..., x^d)
  std::vector<double> target;  // derivative estimate, one entry per component
  std::size_t grid_index = 0;  // h = i*M + j over the (trajectory, time) grid
};

struct Dataset {
  std::vector<SamplePair> train;
  std::vector<SamplePair> test;
  std::size_t dim = 1;
  NoiseSpec noise;
  std::string system_id;
  std::uint64_t ic_seed = 0;
  std::uint64_t split_seed = 0;
  double dt = 0.0;
  std::size_t n_trajectories = 0;  // K
  std::size_t n_times = 0;         // M
};

// Natural cubic smoothing spline in Reinsch form: fitted knot values plus
// second derivatives (zero at the end knots). Linear beyond the knot span.
struct SmoothingCurve {
  std::vector<double> knots;
  std::vector<double> values;
  std::vector<double> second_derivs;

  double operator()(double t) const {
    const std::size_t n = knots.size();
    if (t <= knots.front()) {
      const double h = knots[1] - knots[0];
      const double slope = (values[1] - values[0]) / h - h * second_derivs[1] / 6.0;
      return values[0] + slope * (t - knots[0]);
    }
    if (t >= knots.back()) {
      const double h = knots[n - 1] - knots[n - 2];
      const double slope =
          (values[n - 1] - values[n - 2]) / h + h * second_derivs[n - 2] / 6.0;
      return values[n - 1] + slope * (t - knots[n - 1]);
    }
    std::size_t i = static_cast<std::size_t>(
                        std::upper_bound(knots.begin(), knots.end(), t) - knots.begin()) -
                    1;
    if (i >= n - 1) i = n - 2;
    const double h = knots[i + 1] - knots[i];
    const double a = knots[i + 1] - t;
    const double b = t - knots[i];
    return (second_derivs[i] * a * a * a + second_derivs[i + 1] * b * b * b) / (6.0 * h) +
           (values[i] / h - second_derivs[i] * h / 6.0) * a +
           (values[i + 1] / h - second_derivs[i + 1] * h / 6.0) * b;
  }
};

inline std::vector<std::vector<double>> sample_initial_conditions(const dynamics::RhsSystem& system,
                                                                  std::uint64_t seed) {
  if (system.n_ic == 0) throw std::invalid_argument("sample_initial_conditions: K must be positive");
  if (system.ic_box.size() != system.dim) {
    throw std::invalid_argument("sample_initial_conditions: ic_box dimension mismatch");
  }
  Rng rng(seed);
  std::vector<std::vector<double>> out(system.n_ic, std::vector<double>(system.dim));
  for (auto& point : out) {
    for (std::size_t k = 0; k < system.dim; ++k) {
      point[k] = rng.uniform(system.ic_box[k][0], system.ic_box[k][1]);
    }
  }
  return out;
}

// Mean over trajectories of (max - min) of component k.
inline double mean_range(const std::vector<dynamics::Trajectory>& trajectories, std::size_t k) {
  if (trajectories.empty()) throw std::invalid_argument("mean_range: empty trajectory list");
  double acc = 0.0;
  for (const auto& traj : trajectories) {
    if (k >= traj.states.cols) throw std::invalid_argument("mean_range: component index out of range");
    double lo = traj.states(0, k);
    double hi = lo;
    for (std::size_t j = 1; j < traj.states.rows; ++j) {
      lo = std::min(lo, traj.states(j, k));
      hi = std::max(hi, traj.states(j, k));
    }
    acc += std::abs(hi - lo);
  }
  return acc / static_cast<double>(trajectories.size());
}

// Additive noise n_ijk * M_k with n ~ Normal(0, sigma), independent per
// (trajectory, time, component). Draws are streamed per trajectory so that
// per-trajectory processing order never changes the result.
inline std::vector<dynamics::Trajectory> add_noise(const std::vector<dynamics::Trajectory>& trajectories,
                                                   const NoiseSpec& spec) {
  if (spec.level < 0.0) throw std::invalid_argument("add_noise: noise level must be nonnegative");
  if (spec.level == 0.0) return trajectories;
  if (trajectories.empty()) throw std::invalid_argument("add_noise: empty trajectory list");

  const std::size_t d = trajectories.front().states.cols;
  std::vector<double> ranges(d);
  for (std::size_t k = 0; k < d; ++k) ranges[k] = mean_range(trajectories, k);

  const double sigma = spec.sigma();
  std::vector<dynamics::Trajectory> out = trajectories;
  for (std::size_t i = 0; i < out.size(); ++i) {
    Rng rng(spec.seed, i);
    auto& states = out[i].states;
    for (std::size_t j = 0; j < states.rows; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        states(j, k) += rng.normal(0.0, sigma) * ranges[k];
      }
    }
  }
  return out;
}

// Reflects p samples through each endpoint value: v(t0 - q*dt) = 2 v(t0) - v(t0 + q*dt),
// and the mirror image on the right. Keeps boundary first derivatives intact
// under central differencing.
inline std::vector<double> odd_extend(const std::vector<double>& values, std::size_t p) {
  const std::size_t m = values.size();
  if (m <= p) throw std::invalid_argument("odd_extend: need more samples than extension depth");
  if (p == 0) return values;
  std::vector<double> out(m + 2 * p);
  for (std::size_t j = 0; j < m; ++j) out[p + j] = values[j];
  for (std::size_t q = 1; q <= p; ++q) {
    out[p - q] = 2.0 * values[0] - values[q];
    out[p + m - 1 + q] = 2.0 * values[m - 1] - values[m - 1 - q];
  }
  return out;
}

// Natural cubic smoothing spline minimizing
//   sum_j (g(t_j) - y_j)^2 + lambda * int g''(u)^2 du.
// lambda = 0 gives the exact interpolating natural cubic spline.
inline SmoothingCurve fit_smoothing_curve(const std::vector<double>& times,
                                          const std::vector<double>& values, double lambda) {
  const std::size_t n = times.size();
  if (n < 4 || values.size() != n) {
    throw std::invalid_argument("fit_smoothing_curve: need at least 4 (time, value) samples");
  }
  if (lambda < 0.0) throw std::invalid_argument("fit_smoothing_curve: lambda must be nonnegative");
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(times[i] < times[i + 1])) {
      throw std::invalid_argument("fit_smoothing_curve: times must be strictly increasing");
    }
  }

  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = times[i + 1] - times[i];

  // Second-difference operator D ((n-2) x n) and the tridiagonal Gram matrix W
  // of the natural-spline basis; solve (W + lambda D D^T) gamma = D y, then
  // fitted values are y - lambda D^T gamma (Reinsch).
  const std::size_t m = n - 2;
  Matrix lhs(m, m);
  std::vector<double> rhs(m);
  auto d_row = [&](std::size_t r, std::size_t c) -> double {
    if (c == r) return 1.0 / h[r];
    if (c == r + 1) return -1.0 / h[r] - 1.0 / h[r + 1];
    if (c == r + 2) return 1.0 / h[r + 1];
    return 0.0;
  };
  for (std::size_t r = 0; r < m; ++r) {
    rhs[r] = (values[r + 2] - values[r + 1]) / h[r + 1] - (values[r + 1] - values[r]) / h[r];
    for (std::size_t c = 0; c < m; ++c) {
      double w = 0.0;
      if (c == r) w = (h[r] + h[r + 1]) / 3.0;
      else if (c == r + 1 || c + 1 == r) w = h[std::max(r, c)] / 6.0;
      double ddt = 0.0;
      if (c + 2 >= r && c <= r + 2) {
        for (std::size_t j = std::max(r, c); j <= std::min(r, c) + 2; ++j) {
          ddt += d_row(r, j) * d_row(c, j);
        }
      }
      lhs(r, c) = w + lambda * ddt;
    }
  }
  const std::vector<double> gamma = solve_spd(std::move(lhs), std::move(rhs));

  SmoothingCurve curve;
  curve.knots = times;
  curve.values = values;
  curve.second_derivs.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    curve.second_derivs[r + 1] = gamma[r];
    // fitted values are y - lambda * D^T gamma
    curve.values[r] -= lambda * d_row(r, r) * gamma[r];
    curve.values[r + 1] -= lambda * d_row(r, r + 1) * gamma[r];
    curve.values[r + 2] -= lambda * d_row(r, r + 2) * gamma[r];
  }
  return curve;
}

// Central differences (v_{j+1} - v_{j-1}) / (2 dt) at each original index of
// an extended sequence. Returns M = len - 2p values.
inline std::vector<double> estimate_derivatives(const std::vector<double>& extended, std::size_t p,
                                                double dt) {
  if (p == 0) throw std::invalid_argument("estimate_derivatives: extension depth must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("estimate_derivatives: dt must be positive");
  if (extended.size() <= 2 * p) {
    throw std::invalid_argument("estimate_derivatives: extended length inconsistent with depth");
  }
  const std::size_t m = extended.size() - 2 * p;
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    out[j] = (extended[p + j + 1] - extended[p + j - 1]) / (2.0 * dt);
  }
  return out;
}

// Picks lambda so that the pooled fit residual RMS over all series matches
// target_rms. Residual RMS grows monotonically with lambda, so bisection on
// log10(lambda) suffices; the result is clamped when the target is
// unreachable.
inline double choose_smoothing_penalty(const std::vector<double>& times,
                                       const std::vector<std::vector<double>>& series,
                                       double target_rms) {
  if (series.empty()) throw std::invalid_argument("choose_smoothing_penalty: no series given");
  if (!(target_rms > 0.0)) return 0.0;

  auto pooled_rms = [&](double lambda) {
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& y : series) {
      const SmoothingCurve curve = fit_smoothing_curve(times, y, lambda);
      for (std::size_t j = 0; j < y.size(); ++j) {
        const double r = curve.values[j] - y[j];
        acc += r * r;
      }
      count += y.size();
    }
    return std::sqrt(acc / static_cast<double>(count));
  };

  double lo = -12.0, hi = 12.0;
  if (pooled_rms(std::pow(10.0, hi)) < target_rms) return std::pow(10.0, hi);
  if (pooled_rms(std::pow(10.0, lo)) > target_rms) return 0.0;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (pooled_rms(std::pow(10.0, mid)) < target_rms) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::pow(10.0, 0.5 * (lo + hi));
}

// How derivative targets are read off the fitted curve.
//  - CurveQuotient: central difference quotients of the fitted spline at a
//    fine step, so the target tracks the instantaneous derivative.
//  - GridQuotient: plain central differences on the dt sample grid. Cheaper
//    but biased by the dt^2 truncation term of the coarse grid.
enum class TargetScheme { CurveQuotient, GridQuotient };

struct DatagenOptions {
  std::size_t extension_depth = 2;
  TargetScheme target_scheme = TargetScheme::CurveQuotient;
  // Quotient step for the curve scheme, as a fraction of dt.
  double quotient_step_fraction = 0.01;
  // Pipeline order for the grid scheme with noise: odd-extend the noisy
  // samples first, then smooth over the extended grid.
  bool extend_before_smoothing = false;
  std::size_t n_substeps = 20;
};

// Full pipeline: integrate K trajectories, add noise, estimate derivative
// targets (through odd extension, and spline smoothing when noisy), pair the
// noisy states with the targets, and split 80/20 at the pair level.
inline Dataset build_dataset(const dynamics::RhsSystem& system, const NoiseSpec& spec,
                             std::uint64_t ic_seed, std::uint64_t split_seed,
                             const DatagenOptions& options = {}) {
  const std::size_t p = options.extension_depth;
  if (p == 0) throw std::invalid_argument("build_dataset: extension depth must be positive");

  const auto ics = sample_initial_conditions(system, ic_seed);
  std::vector<dynamics::Trajectory> clean;
  clean.reserve(ics.size());
  for (const auto& x0 : ics) clean.push_back(dynamics::integrate(system, x0, options.n_substeps));

  const auto noisy = add_noise(clean, spec);
  const std::size_t big_k = clean.size();
  const std::size_t m = clean.front().times.size();
  const std::size_t d = system.dim;
  const std::vector<double>& times = clean.front().times;

  const bool extend_first =
      options.target_scheme == TargetScheme::CurveQuotient || options.extend_before_smoothing;
  std::vector<double> ext_times(m + 2 * p);
  for (std::size_t q = 0; q < ext_times.size(); ++q) {
    ext_times[q] = system.t_start + (static_cast<double>(q) - static_cast<double>(p)) * system.dt;
  }

  // Per-component smoothing penalties for the noisy pipeline: residual RMS of
  // the fit should match the injected noise scale sigma * M_k.
  std::vector<double> lambdas(d, 0.0);
  if (spec.level > 0.0) {
    for (std::size_t k = 0; k < d; ++k) {
      const double target = spec.sigma() * mean_range(clean, k);
      std::vector<std::vector<double>> series(big_k);
      for (std::size_t i = 0; i < big_k; ++i) {
        std::vector<double> y(m);
        for (std::size_t j = 0; j < m; ++j) y[j] = noisy[i].states(j, k);
        series[i] = extend_first ? odd_extend(y, p) : std::move(y);
      }
      lambdas[k] = choose_smoothing_penalty(extend_first ? ext_times : times, series, target);
    }
  }

  const double h = system.dt * options.quotient_step_fraction;
  std::vector<SamplePair> pairs(big_k * m);
  for (std::size_t i = 0; i < big_k; ++i) {
    Matrix targets(m, d);
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<double> y(m);
      for (std::size_t j = 0; j < m; ++j) y[j] = noisy[i].states(j, k);

      if (options.target_scheme == TargetScheme::CurveQuotient) {
        // Odd-extend, fit the (interpolating or smoothing) spline over the
        // extended span, and take difference quotients of the curve itself.
        const SmoothingCurve curve = fit_smoothing_curve(ext_times, odd_extend(y, p), lambdas[k]);
        for (std::size_t j = 0; j < m; ++j) {
          targets(j, k) = (curve(times[j] + h) - curve(times[j] - h)) / (2.0 * h);
        }
        continue;
      }

      std::vector<double> extended;
      if (spec.level == 0.0) {
        extended = odd_extend(y, p);
      } else if (options.extend_before_smoothing) {
        const SmoothingCurve curve = fit_smoothing_curve(ext_times, odd_extend(y, p), lambdas[k]);
        extended = curve.values;
      } else {
        const SmoothingCurve curve = fit_smoothing_curve(times, y, lambdas[k]);
        extended = odd_extend(curve.values, p);
      }
      const std::vector<double> deriv = estimate_derivatives(extended, p, system.dt);
      for (std::size_t j = 0; j < m; ++j) targets(j, k) = deriv[j];
    }
    for (std::size_t j = 0; j < m; ++j) {
      SamplePair& pair = pairs[i * m + j];
      pair.grid_index = i * m + j;
      pair.input.resize(1 + d);
      pair.input[0] = times[j];
      for (std::size_t k = 0; k < d; ++k) pair.input[1 + k] = noisy[i].states(j, k);
      pair.target.resize(d);
      for (std::size_t k = 0; k < d; ++k) pair.target[k] = targets(j, k);
    }
  }

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t h = 0; h < order.size(); ++h) order[h] = h;
  Rng split_rng(split_seed);
  split_rng.shuffle(order);
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(pairs.size())));

  Dataset ds;
  ds.dim = d;
  ds.noise = spec;
  ds.system_id = system.id;
  ds.ic_seed = ic_seed;
  ds.split_seed = split_seed;
  ds.dt = system.dt;
  ds.n_trajectories = big_k;
  ds.n_times = m;
  ds.train.reserve(n_train);
  ds.test.reserve(pairs.size() - n_train);
  for (std::size_t r = 0; r < order.size(); ++r) {
    (r < n_train ? ds.train : ds.test).push_back(pairs[order[r]]);
  }
  return ds;
}

// Scalar-target view for component-wise training.
inline Dataset component_view(const Dataset& ds, std::size_t component) {
  if (component >= ds.dim) throw std::invalid_argument("component_view: component out of range");
  Dataset out = ds;
  for (auto* part : {&out.train, &out.test}) {
    for (auto& pair : *part) {
      pair.target = {pair.target[component]};
    }
  }
  return out;
}

}  // namespace rhslearn::datagen
