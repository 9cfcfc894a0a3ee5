#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rhslearn/datagen.hpp"
#include "rhslearn/dynamics.hpp"
#include "rhslearn/eval.hpp"
#include "rhslearn/io.hpp"
#include "rhslearn/train.hpp"

namespace rhslearn::cli {

// Everything one experiment needs, resolvable from a key-value config file.
// Defaults depend on the chosen system and mirror the per-system experiment
// setups (layers, widths, batch sizes, schedules).
struct ExperimentConfig {
  std::string system = "xcosx";
  double noise = 0.0;  // one of {0, 0.01, 0.02}
  std::uint64_t seed = 1;
  std::string out = "out";
  std::vector<double> alphas = {0.0, 0.01, 0.005, 0.0025, 0.001};

  std::size_t hidden_layers = 8;
  std::size_t hidden_width = 30;
  std::size_t batch_size = 50;
  double lr0 = 1e-2;
  double decay_factor = 0.1;
  std::size_t decay_period = 7;
  std::size_t max_epochs = 80;
  std::size_t baseline_epochs = 10;
  std::size_t probe_n = 1024;
  std::size_t step_probe_n = 64;
  std::string optimizer = "gauss_newton";  // gauss_newton | adam | sgd
  double gn_damping = 2e-2;
  double momentum = 0.0;
  double lrelu_eps = 0.01;

  std::size_t n_substeps = 20;
  std::size_t extension_depth = 2;
  std::string target_scheme = "curve";  // curve | grid difference quotients
  double quotient_step_fraction = 0.01;
  bool noise_param_is_variance = false;
  bool extend_before_smoothing = false;
  bool pointwise_relative = false;
  bool recovery_grid = false;
  std::size_t grid_nt = 100;
  std::size_t grid_nx = 100;

  // Named seed streams derived from the master seed.
  std::uint64_t ic_seed() const { return derive_seed(seed, 101); }
  std::uint64_t noise_seed() const { return derive_seed(seed, 102); }
  std::uint64_t split_seed() const { return derive_seed(seed, 103); }
  std::uint64_t init_seed() const { return derive_seed(seed, 104); }
  std::uint64_t shuffle_seed() const { return derive_seed(seed, 105); }
  std::uint64_t probe_seed() const { return derive_seed(seed, 106); }
};

inline ExperimentConfig default_config(const std::string& system_id) {
  ExperimentConfig cfg;
  cfg.system = system_id;
  if (system_id == "xcosx") {
    cfg.hidden_layers = 8;
    cfg.hidden_width = 30;
    cfg.batch_size = 50;
    cfg.decay_period = 7;
  } else if (system_id == "explog") {
    cfg.hidden_layers = 8;
    cfg.hidden_width = 30;
    cfg.batch_size = 100;
    cfg.decay_period = 5;
  } else if (system_id == "lotka_volterra") {
    cfg.hidden_layers = 10;
    cfg.hidden_width = 50;
    cfg.batch_size = 200;
    cfg.decay_period = 3;
  } else if (system_id == "pendulum") {
    cfg.hidden_layers = 10;
    cfg.hidden_width = 60;
    cfg.batch_size = 100;
    cfg.decay_period = 3;
  } else {
    dynamics::find_builtin(system_id);  // throws with a clear message
  }
  return cfg;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') {
    throw std::invalid_argument("config: bad number for '" + key + "': " + value);
  }
  return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0') {
    throw std::invalid_argument("config: bad integer for '" + key + "': " + value);
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config: bad boolean for '" + key + "': " + value);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw std::invalid_argument("config: empty list for '" + key + "'");
  return out;
}

inline std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_full(values[i]);
  }
  return out;
}

}  // namespace detail

// Applies explicit key/value settings over the per-system defaults.
// Unknown keys are rejected.
inline ExperimentConfig apply_settings(const std::map<std::string, std::string>& settings) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_list;
  using detail::parse_u64;

  std::string system_id = "xcosx";
  if (auto it = settings.find("system"); it != settings.end()) system_id = it->second;
  ExperimentConfig cfg = default_config(system_id);

  for (const auto& [key, value] : settings) {
    if (key == "system") continue;
    else if (key == "noise") cfg.noise = parse_double(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "out") cfg.out = value;
    else if (key == "alphas") cfg.alphas = parse_list(key, value);
    else if (key == "hidden_layers") cfg.hidden_layers = parse_u64(key, value);
    else if (key == "hidden_width") cfg.hidden_width = parse_u64(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_u64(key, value);
    else if (key == "lr0") cfg.lr0 = parse_double(key, value);
    else if (key == "decay_factor") cfg.decay_factor = parse_double(key, value);
    else if (key == "decay_period") cfg.decay_period = parse_u64(key, value);
    else if (key == "max_epochs") cfg.max_epochs = parse_u64(key, value);
    else if (key == "baseline_epochs") cfg.baseline_epochs = parse_u64(key, value);
    else if (key == "probe_n") cfg.probe_n = parse_u64(key, value);
    else if (key == "step_probe_n") cfg.step_probe_n = parse_u64(key, value);
    else if (key == "optimizer") cfg.optimizer = value;
    else if (key == "gn_damping") cfg.gn_damping = parse_double(key, value);
    else if (key == "momentum") cfg.momentum = parse_double(key, value);
    else if (key == "lrelu_eps") cfg.lrelu_eps = parse_double(key, value);
    else if (key == "n_substeps") cfg.n_substeps = parse_u64(key, value);
    else if (key == "extension_depth") cfg.extension_depth = parse_u64(key, value);
    else if (key == "target_scheme") cfg.target_scheme = value;
    else if (key == "quotient_step_fraction") cfg.quotient_step_fraction = parse_double(key, value);
    else if (key == "noise_param_is_variance") cfg.noise_param_is_variance = parse_bool(key, value);
    else if (key == "extend_before_smoothing") cfg.extend_before_smoothing = parse_bool(key, value);
    else if (key == "pointwise_relative") cfg.pointwise_relative = parse_bool(key, value);
    else if (key == "recovery_grid") cfg.recovery_grid = parse_bool(key, value);
    else if (key == "grid_nt") cfg.grid_nt = parse_u64(key, value);
    else if (key == "grid_nx") cfg.grid_nx = parse_u64(key, value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  if (!(cfg.noise == 0.0 || cfg.noise == 0.01 || cfg.noise == 0.02)) {
    throw std::invalid_argument("config: noise level must be one of 0, 0.01, 0.02");
  }
  if (cfg.optimizer != "gauss_newton" && cfg.optimizer != "adam" && cfg.optimizer != "sgd") {
    throw std::invalid_argument("config: optimizer must be gauss_newton, adam or sgd");
  }
  if (cfg.target_scheme != "curve" && cfg.target_scheme != "grid") {
    throw std::invalid_argument("config: target_scheme must be curve or grid");
  }
  return cfg;
}

inline std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::map<std::string, std::string> settings;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = detail::trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) + " is not key = value");
    }
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key on line " + std::to_string(line_no));
    settings[key] = value;
  }
  return settings;
}

inline ExperimentConfig load_config(const std::string& path) {
  return apply_settings(read_key_values(path));
}

// The fully resolved configuration, echoed so that it re-parses to itself.
inline std::string config_to_text(const ExperimentConfig& cfg) {
  std::string out;
  auto kv = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  kv("system", cfg.system);
  kv("noise", format_full(cfg.noise));
  kv("seed", std::to_string(cfg.seed));
  kv("out", cfg.out);
  kv("alphas", detail::format_list(cfg.alphas));
  kv("hidden_layers", std::to_string(cfg.hidden_layers));
  kv("hidden_width", std::to_string(cfg.hidden_width));
  kv("batch_size", std::to_string(cfg.batch_size));
  kv("lr0", format_full(cfg.lr0));
  kv("decay_factor", format_full(cfg.decay_factor));
  kv("decay_period", std::to_string(cfg.decay_period));
  kv("max_epochs", std::to_string(cfg.max_epochs));
  kv("baseline_epochs", std::to_string(cfg.baseline_epochs));
  kv("probe_n", std::to_string(cfg.probe_n));
  kv("step_probe_n", std::to_string(cfg.step_probe_n));
  kv("optimizer", cfg.optimizer);
  kv("gn_damping", format_full(cfg.gn_damping));
  kv("momentum", format_full(cfg.momentum));
  kv("lrelu_eps", format_full(cfg.lrelu_eps));
  kv("n_substeps", std::to_string(cfg.n_substeps));
  kv("extension_depth", std::to_string(cfg.extension_depth));
  kv("target_scheme", cfg.target_scheme);
  kv("quotient_step_fraction", format_full(cfg.quotient_step_fraction));
  kv("noise_param_is_variance", cfg.noise_param_is_variance ? "true" : "false");
  kv("extend_before_smoothing", cfg.extend_before_smoothing ? "true" : "false");
  kv("pointwise_relative", cfg.pointwise_relative ? "true" : "false");
  kv("recovery_grid", cfg.recovery_grid ? "true" : "false");
  kv("grid_nt", std::to_string(cfg.grid_nt));
  kv("grid_nx", std::to_string(cfg.grid_nx));
  return out;
}

// ---------------------------------------------------------------------------
// Derived runtime pieces

inline dynamics::RhsSystem resolve_system(const ExperimentConfig& cfg) {
  return dynamics::find_builtin(cfg.system);
}

inline datagen::NoiseSpec resolve_noise(const ExperimentConfig& cfg) {
  datagen::NoiseSpec spec;
  spec.level = cfg.noise;
  spec.param_is_variance = cfg.noise_param_is_variance;
  spec.seed = cfg.noise_seed();
  return spec;
}

inline datagen::Dataset build_dataset(const ExperimentConfig& cfg) {
  datagen::DatagenOptions options;
  options.extension_depth = cfg.extension_depth;
  options.target_scheme = cfg.target_scheme == "grid" ? datagen::TargetScheme::GridQuotient
                                                      : datagen::TargetScheme::CurveQuotient;
  options.quotient_step_fraction = cfg.quotient_step_fraction;
  options.extend_before_smoothing = cfg.extend_before_smoothing;
  options.n_substeps = cfg.n_substeps;
  return datagen::build_dataset(resolve_system(cfg), resolve_noise(cfg), cfg.ic_seed(),
                                cfg.split_seed(), options);
}

inline train::TrainConfig resolve_train_config(const ExperimentConfig& cfg) {
  train::TrainConfig tc;
  tc.hidden_sizes.assign(cfg.hidden_layers, cfg.hidden_width);
  tc.batch_size = cfg.batch_size;
  tc.lr0 = cfg.lr0;
  tc.decay_factor = cfg.decay_factor;
  tc.decay_period = cfg.decay_period;
  tc.max_epochs = cfg.max_epochs;
  tc.baseline_epochs = cfg.baseline_epochs;
  tc.probe_n = cfg.probe_n;
  tc.step_probe_n = cfg.step_probe_n;
  tc.optimizer = cfg.optimizer == "adam" ? train::Optimizer::Adam
                 : cfg.optimizer == "sgd" ? train::Optimizer::GradientDescent
                                          : train::Optimizer::GaussNewton;
  tc.gn_damping = cfg.gn_damping;
  tc.momentum = cfg.momentum;
  tc.lrelu_eps = cfg.lrelu_eps;
  tc.init_seed = cfg.init_seed();
  tc.shuffle_seed = cfg.shuffle_seed();
  tc.probe_seed = cfg.probe_seed();
  return tc;
}

// ---------------------------------------------------------------------------
// File output

inline std::string dataset_to_csv(const datagen::Dataset& ds) {
  std::string out = "t";
  for (std::size_t k = 1; k <= ds.dim; ++k) out += ",x" + std::to_string(k);
  for (std::size_t k = 1; k <= ds.dim; ++k) out += ",y" + std::to_string(k);
  out += ",split\n";

  // Rows in the original (trajectory, time) grid order with split tags.
  std::vector<const datagen::SamplePair*> ordered(ds.train.size() + ds.test.size(), nullptr);
  std::vector<bool> is_train(ordered.size(), false);
  for (const auto& pair : ds.train) {
    ordered[pair.grid_index] = &pair;
    is_train[pair.grid_index] = true;
  }
  for (const auto& pair : ds.test) ordered[pair.grid_index] = &pair;

  for (std::size_t h = 0; h < ordered.size(); ++h) {
    const datagen::SamplePair& pair = *ordered[h];
    for (std::size_t c = 0; c < pair.input.size(); ++c) {
      if (c) out += ',';
      out += format_full(pair.input[c]);
    }
    for (double y : pair.target) {
      out += ',';
      out += format_full(y);
    }
    out += is_train[h] ? ",train\n" : ",test\n";
  }
  return out;
}

inline std::string dataset_metadata_json(const datagen::Dataset& ds, const ExperimentConfig& cfg) {
  nlohmann::ordered_json meta;
  meta["schema_version"] = 1;
  meta["system"] = ds.system_id;
  meta["dim"] = ds.dim;
  meta["noise_level"] = ds.noise.level;
  meta["noise_param_is_variance"] = ds.noise.param_is_variance;
  meta["dt"] = ds.dt;
  meta["n_trajectories"] = ds.n_trajectories;
  meta["n_times"] = ds.n_times;
  meta["n_train"] = ds.train.size();
  meta["n_test"] = ds.test.size();
  meta["extension_depth"] = cfg.extension_depth;
  meta["extend_before_smoothing"] = cfg.extend_before_smoothing;
  meta["n_substeps"] = cfg.n_substeps;
  meta["seeds"] = {
      {"master", cfg.seed},         {"ic", cfg.ic_seed()},       {"noise", cfg.noise_seed()},
      {"split", cfg.split_seed()},  {"init", cfg.init_seed()},   {"shuffle", cfg.shuffle_seed()},
      {"probe", cfg.probe_seed()},
  };
  return meta.dump(2) + "\n";
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

// Short alpha tag for file names ("0.005" rather than a 17-digit form).
inline std::string alpha_tag(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", alpha);
  return buf;
}

inline std::string component_suffix(std::size_t dim, std::size_t component) {
  return dim == 1 ? "" : "_c" + std::to_string(component + 1);
}

inline std::string grid_to_csv(const dynamics::RhsSystem& system, const Matrix& grid,
                               const Matrix& values) {
  std::string out = "t";
  for (std::size_t k = 1; k <= system.dim; ++k) out += ",x" + std::to_string(k);
  out += ",value\n";
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      if (c) out += ',';
      out += format_full(grid(r, c));
    }
    // Scalar field per row: the Euclidean norm for vector-valued entries.
    double v;
    if (values.cols == 1) {
      v = values(r, 0);
    } else {
      double acc = 0.0;
      for (std::size_t c = 0; c < values.cols; ++c) acc += values(r, c) * values(r, c);
      v = std::sqrt(acc);
    }
    out += ',';
    out += format_full(v);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_generate(const ExperimentConfig& cfg) {
  const datagen::Dataset ds = build_dataset(cfg);
  std::filesystem::create_directories(cfg.out);
  write_text_file(std::filesystem::path(cfg.out) / "dataset.csv", dataset_to_csv(ds));
  write_text_file(std::filesystem::path(cfg.out) / "dataset.meta.json",
                  dataset_metadata_json(ds, cfg));
  write_text_file(std::filesystem::path(cfg.out) / "effective.cfg", config_to_text(cfg));
  return 0;
}

struct SweepOutput {
  std::vector<eval::ExperimentReport> reports;  // one per component
  bool any_flagged = false;
};

inline SweepOutput run_sweep(const ExperimentConfig& cfg, const datagen::Dataset& ds) {
  const dynamics::RhsSystem system = resolve_system(cfg);
  const train::TrainConfig base = resolve_train_config(cfg);
  const std::filesystem::path out_dir(cfg.out);
  std::filesystem::create_directories(out_dir);

  // Per-component sweeps; multi-dimensional systems train one scalar network
  // per output component.
  std::vector<std::vector<train::SweepRun>> component_runs;
  for (std::size_t k = 0; k < ds.dim; ++k) {
    const datagen::Dataset view = ds.dim == 1 ? ds : datagen::component_view(ds, k);
    component_runs.push_back(train::run_alpha_sweep(view, base, cfg.alphas));
    for (const auto& run : component_runs.back()) {
      const std::string suffix = component_suffix(ds.dim, k);
      write_text_file(out_dir / ("record_alpha" + alpha_tag(run.alpha) + suffix + ".csv"),
                      train::record_to_csv(run.record));
      net::save_checkpoint(run.params,
                           (out_dir / ("model_alpha" + alpha_tag(run.alpha) + suffix + ".ckpt")).string());
    }
  }

  std::optional<std::vector<double>> recovery;
  if (cfg.recovery_grid) {
    recovery.emplace();
    const eval::GridSpec grid{cfg.grid_nt, cfg.grid_nx};
    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
      eval::ComponentModel model;
      for (std::size_t k = 0; k < ds.dim; ++k) model.components.push_back(component_runs[k][a].params);
      recovery->push_back(eval::recovery_error(model, system, grid, cfg.pointwise_relative));
    }
  }

  SweepOutput out;
  for (std::size_t k = 0; k < ds.dim; ++k) {
    const datagen::Dataset view = ds.dim == 1 ? ds : datagen::component_view(ds, k);
    const lipreg::ProbeSet probe = lipreg::sample_probe_set(
        view, std::min<std::size_t>(cfg.probe_n, view.train.size()), cfg.probe_seed());
    const eval::ExperimentReport report = eval::build_report(component_runs[k], view, probe, recovery);
    write_text_file(out_dir / ("report" + component_suffix(ds.dim, k) + ".csv"),
                    eval::report_to_csv(report));
    for (const auto& row : report.rows) out.any_flagged = out.any_flagged || row.flagged;
    out.reports.push_back(report);
  }
  return out;
}

inline int cmd_sweep(const ExperimentConfig& cfg) {
  const datagen::Dataset ds = build_dataset(cfg);
  std::filesystem::create_directories(cfg.out);
  write_text_file(std::filesystem::path(cfg.out) / "dataset.csv", dataset_to_csv(ds));
  write_text_file(std::filesystem::path(cfg.out) / "dataset.meta.json",
                  dataset_metadata_json(ds, cfg));
  const SweepOutput out = run_sweep(cfg, ds);
  write_text_file(std::filesystem::path(cfg.out) / "effective.cfg", config_to_text(cfg));
  return out.any_flagged ? 2 : 0;
}

// Writes the dense-grid fields (prediction, truth, absolute error) and the
// per-alpha recovery errors from saved checkpoints.
inline int cmd_recover(const ExperimentConfig& cfg, const std::string& checkpoint = "") {
  const dynamics::RhsSystem system = resolve_system(cfg);
  const eval::GridSpec spec{cfg.grid_nt, cfg.grid_nx};
  const Matrix grid = eval::make_grid(system, spec);
  const Matrix truth = eval::eval_rhs_on_grid(system, grid);
  const std::filesystem::path out_dir(cfg.out);
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "grid_true.csv", grid_to_csv(system, grid, truth));

  struct Entry {
    std::string tag;
    eval::ComponentModel model;
  };
  std::vector<Entry> entries;
  if (!checkpoint.empty()) {
    if (!std::filesystem::exists(checkpoint)) {
      throw std::runtime_error("recover: missing checkpoint '" + checkpoint + "'");
    }
    entries.push_back({"checkpoint", eval::single_model(net::load_checkpoint(checkpoint))});
  } else {
    for (double alpha : cfg.alphas) {
      Entry entry;
      entry.tag = alpha_tag(alpha);
      for (std::size_t k = 0; k < system.dim; ++k) {
        const std::filesystem::path path =
            out_dir / ("model_alpha" + entry.tag + component_suffix(system.dim, k) + ".ckpt");
        if (!std::filesystem::exists(path)) {
          throw std::runtime_error("recover: missing checkpoint '" + path.string() + "'");
        }
        entry.model.components.push_back(net::load_checkpoint(path.string()));
      }
      entries.push_back(std::move(entry));
    }
  }

  std::string recovery_csv = "alpha,recovery_error_pct\n";
  for (const Entry& entry : entries) {
    const Matrix pred = entry.model.predict(grid);
    Matrix abs_err(grid.rows, 1);
    for (std::size_t r = 0; r < grid.rows; ++r) {
      abs_err(r, 0) = std::sqrt(squared_distance(pred.row(r), truth.row(r), pred.cols));
    }
    write_text_file(out_dir / ("grid_pred_alpha" + entry.tag + ".csv"),
                    grid_to_csv(system, grid, pred));
    write_text_file(out_dir / ("grid_abserr_alpha" + entry.tag + ".csv"),
                    grid_to_csv(system, grid, abs_err));
    recovery_csv += entry.tag + "," +
                    format_full(eval::recovery_error(entry.model, system, spec, cfg.pointwise_relative)) +
                    "\n";
  }
  write_text_file(out_dir / "recovery.csv", recovery_csv);
  return 0;
}

// Pretty-prints the report tables found in the output directory.
inline int cmd_report(const ExperimentConfig& cfg, std::ostream& os = std::cout) {
  const std::filesystem::path out_dir(cfg.out);
  std::vector<std::filesystem::path> files;
  if (std::filesystem::exists(out_dir / "report.csv")) {
    files.push_back(out_dir / "report.csv");
  } else {
    for (std::size_t k = 1;; ++k) {
      const auto path = out_dir / ("report_c" + std::to_string(k) + ".csv");
      if (!std::filesystem::exists(path)) break;
      files.push_back(path);
    }
  }
  if (files.empty()) throw std::runtime_error("report: no report CSV found in '" + cfg.out + "'");

  for (const auto& file : files) {
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);  // header
    os << file.filename().string() << "\n";
    os << "  alpha      train MSE   gap         test MSE    lip       flags\n";
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() < 7) continue;
      const bool with_recovery = cells.size() >= 8;
      const std::string& best = cells.back();
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%s %-9s %9s%%  %-10s  %9s%%  %-8s  %s%s\n",
                    best == "1" ? "*" : " ", cells[0].c_str(),
                    format_sig3(detail::parse_double("train", cells[1])).c_str(),
                    format_sig3(detail::parse_double("gap", cells[2])).c_str(),
                    format_sig3(detail::parse_double("test", cells[3])).c_str(),
                    format_sig3(detail::parse_double("lip", cells[4])).c_str(),
                    cells[5] == "1" ? "FLAGGED" : "",
                    with_recovery
                        ? ("  recovery " + format_sig3(detail::parse_double("rec", cells[6])) + "%").c_str()
                        : "");
      os << buf;
    }
    os << "\n";
  }
  return 0;
}

}  // namespace rhslearn::cli
