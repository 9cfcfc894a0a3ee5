#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rhslearn/datagen.hpp"
#include "rhslearn/dynamics.hpp"
#include "rhslearn/io.hpp"
#include "rhslearn/lipreg.hpp"
#include "rhslearn/net.hpp"
#include "rhslearn/train.hpp"

namespace rhslearn::eval {

// Test-set expectation minus training expectation, both as absolute MSEs.
inline double generalization_gap(double train_mse_abs, double test_mse_abs) {
  return test_mse_abs - train_mse_abs;
}

// P(|test estimate - true expectation| > eps) <= 2 exp(-2 eps^2 m).
inline double hoeffding_bound(std::size_t m, double eps) {
  if (m < 1) throw std::invalid_argument("hoeffding_bound: need at least one test point");
  if (!(eps > 0.0)) throw std::invalid_argument("hoeffding_bound: eps must be positive");
  return 2.0 * std::exp(-2.0 * eps * eps * static_cast<double>(m));
}

// Per-point Euclidean error ||N(x) - reference||, in input order.
inline std::vector<double> error_field(const net::MlpParams& params, const Matrix& inputs,
                                       const Matrix& references) {
  if (inputs.rows != references.rows) throw std::invalid_argument("error_field: row count mismatch");
  const Matrix out = net::predict(params, inputs);
  if (out.cols != references.cols) throw std::invalid_argument("error_field: reference width mismatch");
  std::vector<double> field(inputs.rows);
  for (std::size_t r = 0; r < inputs.rows; ++r) {
    field[r] = std::sqrt(squared_distance(out.row(r), references.row(r), out.cols));
  }
  return field;
}

// One trained network per output component; together they predict the full
// right-hand side.
struct ComponentModel {
  std::vector<net::MlpParams> components;

  Matrix predict(const Matrix& inputs) const {
    Matrix out(inputs.rows, components.size());
    for (std::size_t k = 0; k < components.size(); ++k) {
      const Matrix col = net::predict(components[k], inputs);
      if (col.cols != 1) throw std::invalid_argument("ComponentModel: component nets must be scalar");
      for (std::size_t r = 0; r < inputs.rows; ++r) out(r, k) = col(r, 0);
    }
    return out;
  }
};

inline ComponentModel single_model(const net::MlpParams& params) {
  if (params.output_width() != 1) {
    throw std::invalid_argument("single_model: expected a scalar-output network");
  }
  return ComponentModel{{params}};
}

struct GridSpec {
  std::size_t nt = 100;
  std::size_t nx = 100;  // per state dimension
};

// Regular grid over the time interval times the per-component recovery box,
// t-major, endpoints included.
inline Matrix make_grid(const dynamics::RhsSystem& system, const GridSpec& spec) {
  if (spec.nt < 2 || spec.nx < 2) throw std::invalid_argument("make_grid: need at least 2 points per axis");
  if (system.recovery_box.size() != system.dim) {
    throw std::invalid_argument("make_grid: recovery box dimension mismatch");
  }
  std::size_t x_points = 1;
  for (std::size_t k = 0; k < system.dim; ++k) x_points *= spec.nx;

  Matrix grid(spec.nt * x_points, 1 + system.dim);
  std::size_t row = 0;
  for (std::size_t it = 0; it < spec.nt; ++it) {
    const double t = system.t_start + (system.t_end - system.t_start) *
                                          static_cast<double>(it) /
                                          static_cast<double>(spec.nt - 1);
    for (std::size_t flat = 0; flat < x_points; ++flat) {
      grid(row, 0) = t;
      std::size_t rem = flat;
      for (std::size_t k = system.dim; k-- > 0;) {
        const std::size_t ix = rem % spec.nx;
        rem /= spec.nx;
        const auto& box = system.recovery_box[k];
        grid(row, 1 + k) =
            box[0] + (box[1] - box[0]) * static_cast<double>(ix) / static_cast<double>(spec.nx - 1);
      }
      ++row;
    }
  }
  return grid;
}

inline Matrix eval_rhs_on_grid(const dynamics::RhsSystem& system, const Matrix& grid) {
  Matrix values(grid.rows, system.dim);
  std::vector<double> x(system.dim);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t k = 0; k < system.dim; ++k) x[k] = grid(r, 1 + k);
    const std::vector<double> f = dynamics::eval_rhs(system, grid(r, 0), x);
    for (std::size_t k = 0; k < system.dim; ++k) values(r, k) = f[k];
  }
  return values;
}

// Relative recovery error over a dense grid, in percent. Default is the
// ratio of means, mean ||N - f|| / mean ||f||; the pointwise-relative variant
// averages ||N - f|| / (||f|| + 1e-8) instead.
inline double recovery_error(const ComponentModel& model, const dynamics::RhsSystem& system,
                             const GridSpec& spec = {}, bool pointwise_relative = false) {
  const Matrix grid = make_grid(system, spec);
  const Matrix truth = eval_rhs_on_grid(system, grid);
  const Matrix pred = model.predict(grid);
  if (pred.cols != truth.cols) throw std::invalid_argument("recovery_error: model width mismatch");

  if (pointwise_relative) {
    double acc = 0.0;
    for (std::size_t r = 0; r < grid.rows; ++r) {
      const double err = std::sqrt(squared_distance(pred.row(r), truth.row(r), pred.cols));
      double ref = 0.0;
      for (std::size_t c = 0; c < truth.cols; ++c) ref += truth(r, c) * truth(r, c);
      acc += err / (std::sqrt(ref) + 1e-8);
    }
    return 100.0 * acc / static_cast<double>(grid.rows);
  }
  double err_mean = 0.0;
  double ref_mean = 0.0;
  for (std::size_t r = 0; r < grid.rows; ++r) {
    err_mean += std::sqrt(squared_distance(pred.row(r), truth.row(r), pred.cols));
    double ref = 0.0;
    for (std::size_t c = 0; c < truth.cols; ++c) ref += truth(r, c) * truth(r, c);
    ref_mean += std::sqrt(ref);
  }
  return 100.0 * err_mean / ref_mean;
}

struct ReportRow {
  double alpha = 0.0;
  double train_rel_mse_pct = 0.0;
  double generalization_gap = 0.0;  // absolute
  double test_rel_mse_pct = 0.0;
  double lip_estimate = 0.0;
  bool flagged = false;
  std::optional<double> recovery_error_pct;
};

struct ExperimentReport {
  std::string system_id;
  double noise_level = 0.0;
  std::vector<ReportRow> rows;  // in alpha grid order
  std::size_t best_index = 0;
};

// Assembles the per-alpha table: relative train/test MSE, absolute gap,
// final Lipschitz estimate on a shared probe set, flags, optional recovery
// errors. Best row has minimal test MSE, ties broken by the smaller gap.
inline ExperimentReport build_report(const std::vector<train::SweepRun>& runs,
                                     const datagen::Dataset& dataset,
                                     const lipreg::ProbeSet& probe,
                                     const std::optional<std::vector<double>>& recovery = {}) {
  if (runs.empty()) throw std::invalid_argument("build_report: no sweep results");
  if (recovery && recovery->size() != runs.size()) {
    throw std::invalid_argument("build_report: recovery list does not match sweep results");
  }
  ExperimentReport report;
  report.system_id = dataset.system_id;
  report.noise_level = dataset.noise.level;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const train::SweepRun& run = runs[i];
    ReportRow row;
    row.alpha = run.alpha;
    const double train_abs = train::mse(run.params, dataset.train);
    const double test_abs = train::mse(run.params, dataset.test);
    row.train_rel_mse_pct = run.record.epochs.back().train_rel_mse_pct;
    row.test_rel_mse_pct = train::relative_mse(run.params, dataset.test);
    row.generalization_gap = generalization_gap(train_abs, test_abs);
    row.lip_estimate = lipreg::estimate_lipschitz(run.params, probe).value;
    row.flagged = run.record.flagged;
    if (recovery) row.recovery_error_pct = (*recovery)[i];
    report.rows.push_back(row);
  }
  report.best_index = 0;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const ReportRow& cur = report.rows[i];
    const ReportRow& best = report.rows[report.best_index];
    if (cur.test_rel_mse_pct < best.test_rel_mse_pct ||
        (cur.test_rel_mse_pct == best.test_rel_mse_pct &&
         cur.generalization_gap < best.generalization_gap)) {
      report.best_index = i;
    }
  }
  return report;
}

inline std::string report_to_csv(const ExperimentReport& report) {
  const bool with_recovery = !report.rows.empty() && report.rows.front().recovery_error_pct.has_value();
  std::string out = "alpha,train_rel_mse_pct,generalization_gap,test_rel_mse_pct,lip_estimate,flagged";
  if (with_recovery) out += ",recovery_error_pct";
  out += ",best\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const ReportRow& row = report.rows[i];
    out += format_full(row.alpha);
    out += ',';
    out += format_full(row.train_rel_mse_pct);
    out += ',';
    out += format_full(row.generalization_gap);
    out += ',';
    out += format_full(row.test_rel_mse_pct);
    out += ',';
    out += format_full(row.lip_estimate);
    out += ',';
    out += row.flagged ? '1' : '0';
    if (with_recovery) {
      out += ',';
      out += format_full(*row.recovery_error_pct);
    }
    out += ',';
    out += i == report.best_index ? '1' : '0';
    out += '\n';
  }
  return out;
}

}  // namespace rhslearn::eval
