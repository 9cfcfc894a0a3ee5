#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rhslearn/errors.hpp"
#include "rhslearn/linalg.hpp"

namespace rhslearn::dynamics {

using RhsFn = std::function<std::vector<double>(double, const std::vector<double>&)>;

// A first-order system xdot = f(t, x) with the sampling setup used to
// generate trajectory data from it.
struct RhsSystem {
  std::string id;
  std::size_t dim = 1;
  RhsFn rhs;
  double t_start = 0.0;
  double t_end = 1.0;
  double dt = 0.5;
  std::vector<std::array<double, 2>> ic_box;  // per-component [lo, hi]
  std::size_t n_ic = 1;
  // Per-component state range for dense-grid evaluation; defaults to ic_box.
  std::vector<std::array<double, 2>> recovery_box;
};

// Number of sample times t_start + j*dt inside [t_start, t_end].
// The small slack absorbs representation error in the span/dt ratio.
inline std::size_t num_samples(const RhsSystem& s) {
  if (!(s.dt > 0.0) || !(s.t_start < s.t_end)) {
    throw std::invalid_argument("num_samples: need t_start < t_end and dt > 0");
  }
  const double ratio = (s.t_end - s.t_start) / s.dt;
  const std::size_t m = static_cast<std::size_t>(std::floor(ratio + 1e-9)) + 1;
  if (m < 2) throw std::invalid_argument("num_samples: fewer than 2 sample times");
  return m;
}

struct Trajectory {
  std::vector<double> times;  // length M, uniformly spaced
  Matrix states;              // M x d
  std::vector<double> ic;     // states row 0, exactly
};

inline std::vector<double> eval_rhs(const RhsSystem& system, double t, const std::vector<double>& x) {
  if (x.size() != system.dim) throw std::invalid_argument("eval_rhs: state dimension mismatch");
  return system.rhs(t, x);
}

// Classical fixed-step RK4 from t to t+h, in place.
inline void rk4_step(const RhsSystem& system, double t, double h, std::vector<double>& x) {
  const std::size_t d = x.size();
  const std::vector<double> k1 = system.rhs(t, x);
  std::vector<double> tmp(d);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
  const std::vector<double> k2 = system.rhs(t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
  const std::vector<double> k3 = system.rhs(t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + h * k3[i];
  const std::vector<double> k4 = system.rhs(t + h, tmp);
  for (std::size_t i = 0; i < d; ++i) {
    x[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

// Integrates the system from x0, sampling exactly at t_start + j*dt.
// Each output step is covered by n_substeps internal RK4 steps.
inline Trajectory integrate(const RhsSystem& system, const std::vector<double>& x0,
                            std::size_t n_substeps = 20) {
  if (x0.size() != system.dim) throw std::invalid_argument("integrate: initial condition dimension mismatch");
  if (n_substeps == 0) throw std::invalid_argument("integrate: n_substeps must be positive");
  const std::size_t m = num_samples(system);

  Trajectory traj;
  traj.ic = x0;
  traj.times.resize(m);
  traj.states = Matrix(m, system.dim);
  for (std::size_t j = 0; j < m; ++j) traj.times[j] = system.t_start + static_cast<double>(j) * system.dt;
  for (std::size_t k = 0; k < system.dim; ++k) traj.states(0, k) = x0[k];

  std::vector<double> x = x0;
  const double h = system.dt / static_cast<double>(n_substeps);
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double t0 = traj.times[j];
    for (std::size_t s = 0; s < n_substeps; ++s) {
      rk4_step(system, t0 + static_cast<double>(s) * h, h, x);
    }
    for (std::size_t k = 0; k < system.dim; ++k) {
      if (!std::isfinite(x[k])) {
        throw integration_error("integrate: state blew up for system '" + system.id + "'",
                                traj.times[j + 1]);
      }
      traj.states(j + 1, k) = x[k];
    }
  }
  return traj;
}

// The four systems of the experiments, with their sampling defaults.
inline std::vector<RhsSystem> builtin_systems() {
  std::vector<RhsSystem> out;

  {
    RhsSystem s;
    s.id = "xcosx";
    s.dim = 1;
    s.rhs = [](double, const std::vector<double>& x) {
      return std::vector<double>{x[0] * std::cos(x[0])};
    };
    s.t_start = 0.0;
    s.t_end = 3.0;
    s.dt = 0.5;
    s.ic_box = {{-2.5, 2.5}};
    s.n_ic = 200;
    s.recovery_box = s.ic_box;
    out.push_back(std::move(s));
  }
  {
    RhsSystem s;
    s.id = "explog";
    s.dim = 1;
    s.rhs = [](double t, const std::vector<double>& x) {
      if (!(t > 0.0)) throw std::domain_error("explog: requires t > 0");
      return std::vector<double>{std::exp(-x[0]) * std::log(t) - t * t};
    };
    s.t_start = 0.1;
    s.t_end = 2.0;
    s.dt = 0.5;
    s.ic_box = {{0.5, 5.0}};
    s.n_ic = 200;
    s.recovery_box = {{-1.5, 5.0}};
    out.push_back(std::move(s));
  }
  {
    RhsSystem s;
    s.id = "lotka_volterra";
    s.dim = 2;
    s.rhs = [](double, const std::vector<double>& x) {
      return std::vector<double>{1.5 * x[0] - x[0] * x[1], -3.0 * x[1] + x[0] * x[1]};
    };
    s.t_start = 0.0;
    s.t_end = 4.0;
    s.dt = 0.5;
    s.ic_box = {{1.0, 5.0}, {1.0, 5.0}};
    s.n_ic = 400;
    s.recovery_box = s.ic_box;
    out.push_back(std::move(s));
  }
  {
    // Damped driven pendulum, reduced to first order with x1 = z, x2 = zdot.
    RhsSystem s;
    s.id = "pendulum";
    s.dim = 2;
    s.rhs = [](double t, const std::vector<double>& x) {
      return std::vector<double>{x[1], -2.0 * x[0] - 2.0 * x[1] + std::cos(2.0 * t)};
    };
    s.t_start = 0.0;
    s.t_end = 2.0;
    s.dt = 0.5;
    s.ic_box = {{0.0, 2.0}, {0.0, 2.0}};
    s.n_ic = 1000;
    s.recovery_box = s.ic_box;
    out.push_back(std::move(s));
  }
  return out;
}

// Simple known-solution systems for integrator and pipeline checks.
// Not part of the builtin catalog.
inline std::vector<RhsSystem> test_systems() {
  std::vector<RhsSystem> out;
  {
    RhsSystem s;
    s.id = "exp_decay";
    s.dim = 1;
    s.rhs = [](double, const std::vector<double>& x) { return std::vector<double>{-x[0]}; };
    s.t_start = 0.0;
    s.t_end = 1.0;
    s.dt = 0.5;
    s.ic_box = {{1.0, 1.0}};
    s.n_ic = 1;
    s.recovery_box = s.ic_box;
    out.push_back(std::move(s));
  }
  {
    RhsSystem s;
    s.id = "zero";
    s.dim = 1;
    s.rhs = [](double, const std::vector<double>& x) {
      return std::vector<double>(x.size(), 0.0);
    };
    s.t_start = 0.0;
    s.t_end = 1.0;
    s.dt = 0.5;
    s.ic_box = {{0.0, 1.0}};
    s.n_ic = 1;
    s.recovery_box = s.ic_box;
    out.push_back(std::move(s));
  }
  return out;
}

inline RhsSystem find_builtin(const std::string& id) {
  for (auto& s : builtin_systems()) {
    if (s.id == id) return s;
  }
  throw std::invalid_argument("unknown system id '" + id + "'");
}

}  // namespace rhslearn::dynamics
